#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "roughwall/cell.hpp"
#include "roughwall/channel.hpp"
#include "roughwall/geometry.hpp"
#include "roughwall/halfspace.hpp"

namespace roughwall {

// One quadrature point of the box B^eps_{r,+}(0).
struct BoxSample {
  double weight = 0.0;  // physical volume weight
  double x3 = 0.0;
  Vec3 u{0, 0, 0};
  Vec3 d3u{0, 0, 0};
  double grad2 = 0.0;          // |grad u|^2
  std::array<Vec3, 2> v{};     // v^(1), v^(2) at x / eps (zero without correctors)
  std::array<double, 2> vgrad2{};  // |grad_y v^(j)|^2 where the source provides it
};

class BoxField {
 public:
  virtual ~BoxField() = default;
  virtual double epsilon() const = 0;
  virtual bool has_correctors() const { return false; }
  virtual std::array<Vec3, 2> alphas() const { return {}; }
  // Horizontal quadrature spacing in physical units.
  virtual double spacing() const = 0;
  virtual void visit(double r, const std::function<void(const BoxSample&)>& f) const = 0;
};

// u = A (x3 e_j + eps v^(j)(x / eps)) built from the corrector itself. Either corrector may be
// absent except the one selected by j.
class ManufacturedField : public BoxField {
 public:
  ManufacturedField(std::shared_ptr<const CorrectorSolution> c1, std::shared_ptr<const CorrectorSolution> c2,
                    double epsilon, int j = 1, double amplitude = 1.0);
  ~ManufacturedField() override;

  double epsilon() const override { return eps_; }
  bool has_correctors() const override { return c_[0] && c_[1]; }
  std::array<Vec3, 2> alphas() const override;
  double spacing() const override;
  void visit(double r, const std::function<void(const BoxSample&)>& f) const override;

 private:
  std::array<std::shared_ptr<const CorrectorSolution>, 2> c_;
  double eps_;
  int j_;
  double amp_;
  struct Cache;
  std::unique_ptr<Cache> cache_;
};

// Channel velocity with correctors resampled onto the channel's horizontal nodes.
class ChannelBoxField : public BoxField {
 public:
  ChannelBoxField(std::shared_ptr<const ChannelSolution> sol, std::shared_ptr<const CorrectorSolution> c1 = nullptr,
                  std::shared_ptr<const CorrectorSolution> c2 = nullptr);
  ~ChannelBoxField() override;

  double epsilon() const override;
  bool has_correctors() const override { return c_[0] && c_[1]; }
  std::array<Vec3, 2> alphas() const override;
  double spacing() const override;
  void visit(double r, const std::function<void(const BoxSample&)>& f) const override;

 private:
  std::shared_ptr<const ChannelSolution> sol_;
  std::array<std::shared_ptr<const CorrectorSolution>, 2> c_;
  struct Cache;
  std::unique_ptr<Cache> cache_;
};

// Closed-form field over the bumpy wall, integrated with a midpoint rule in x' (ncell per side
// of the box) and Gauss-Legendre in x3.
class AnalyticField : public BoxField {
 public:
  using Value = std::function<Vec3(const Vec3&)>;
  using Gradient = std::function<Mat3(const Vec3&)>;  // G[c][d] = d u_c / d x_d
  AnalyticField(BoundaryFunction gamma, double epsilon, Value u, Gradient grad, int ncell = 64, int nvert = 8);

  double epsilon() const override { return eps_; }
  double spacing() const override { return spacing_; }
  void visit(double r, const std::function<void(const BoxSample&)>& f) const override;

 private:
  BoundaryFunction gamma_;
  double eps_;
  Value u_;
  Gradient grad_;
  int ncell_, nvert_;
  mutable double spacing_ = 0.0;
};

double box_average_l2(const BoxField& field, double r);

struct SlipFit {
  std::array<double, 2> c_grad{};
  std::array<double, 2> c_lsq{};
};

SlipFit fit_slip_coefficients(const BoxField& field, double r);

struct ScaleRow {
  double r = 0.0;
  bool small_scale = false;  // r < eps
  double volume = 0.0;
  double avg_l2 = 0.0;
  double lipschitz_ratio = 0.0;
  std::array<double, 2> c_grad{}, c_lsq{};
  // Residuals with c_lsq (primary) and with c_grad.
  double res_plain = 0.0, res_corrector = 0.0, res_navier = 0.0;
  double res_plain_grad = 0.0, res_corrector_grad = 0.0, res_navier_grad = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% confidence half-width of the slope
  int points = 0;
};

struct ScaleReport {
  double epsilon = 0.0;
  std::vector<ScaleRow> rows;
  std::map<std::string, RateFit> slopes;  // vs r, for every positive column
};

ScaleReport scale_scan(const BoxField& field, const std::vector<double>& r_values);

// Column names: avg_l2, lipschitz_ratio, res_plain, res_corrector, res_navier, the *_grad
// variants, and improvement (res_navier / res_plain).
double column_value(const ScaleRow& row, const std::string& column);

// Ordinary least squares of log y against log x.
RateFit rate_fit(const std::vector<double>& x, const std::vector<double>& y);
RateFit rate_fit(const ScaleReport& report, const std::string& column);
// Slope of a column against epsilon across reports, at the row whose r matches.
RateFit rate_fit_epsilon(const std::vector<ScaleReport>& reports, const std::string& column, double r);

struct ScalingCheck {
  double r = 0.0;
  std::vector<double> epsilons;
  std::vector<double> grad_integral;                // int |grad_y v(x/eps)|^2
  std::vector<int> moments;                         // m values
  std::vector<std::vector<double>> moment_integral;  // [m][eps] int |v(x/eps)|^(2+m)
  double grad_exponent = 0.0;
  std::vector<double> moment_exponents;
};

ScalingCheck corrector_scaling_check(std::shared_ptr<const CorrectorSolution> c, const std::vector<double>& epsilons,
                                     double r, const std::vector<int>& moments = {0});

// P(x) = x3 e_j + eps alpha^(j); an exact Navier-slip shear flow with zero pressure.
struct NavierPolynomial {
  int j = 1;
  double epsilon = 0.0;
  Vec3 alpha{0, 0, 0};

  Vec3 operator()(const Vec3& x) const;
  Mat3 gradient() const;
  Vec3 momentum_residual(const Vec3& x) const;  // -Lap P + P.grad P (pressure zero)
  double divergence(const Vec3& x) const;
  // (P1, P2) - eps M (d3 P1, d3 P2) at x3 = 0.
  std::array<double, 2> navier_slip_residual(const std::array<std::array<double, 2>, 2>& m) const;
};

NavierPolynomial navier_polynomial_field(int j, double epsilon, const Vec3& alpha);

struct CaccioppoliResult {
  double lhs = 0.0;
  std::array<double, 2> rhs_terms{};
  double implied_K = 0.0;
};

CaccioppoliResult caccioppoli_ratio(const BoxField& field, double rho, double r);

}  // namespace roughwall
