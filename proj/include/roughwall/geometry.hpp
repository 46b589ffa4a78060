#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roughwall/types.hpp"

namespace roughwall {

struct FourierMode {
  int k1 = 0;
  int k2 = 0;
  cplx c;
};

inline constexpr double kRangeMargin = 1e-6;

// 2 pi periodic wall profile gamma(y') with values in (-1, 0).
class BoundaryFunction {
 public:
  BoundaryFunction() = default;

  static BoundaryFunction from_modes(const std::vector<FourierMode>& modes, int n);
  static BoundaryFunction from_grid(const std::vector<double>& samples, int n);

  int grid() const { return n_; }
  int kmax() const { return kmax_; }
  const std::vector<FourierMode>& modes() const { return modes_; }
  cplx coeff(int k1, int k2) const;
  const std::vector<double>& samples() const { return samples_; }
  double lipschitz_bound() const { return lipschitz_; }
  std::pair<double, double> range() const { return {min_, max_}; }
  double mean() const { return coeff(0, 0).real(); }
  bool is_flat() const { return modes_.size() <= 1 && kmax_ == 0; }
  // True when gamma depends on y1 only.
  bool is_groove() const;

  double eval(double y1, double y2) const;
  std::array<double, 2> gradient(double y1, double y2) const;

  // Values and spectral derivatives on an n1 x n2 grid of (0, 2 pi)^2 (y1 fastest).
  // Modes beyond the target Nyquist are dropped.
  void sample(int n1, int n2, std::vector<double>* g, std::vector<double>* g1 = nullptr,
              std::vector<double>* g2 = nullptr) const;

  // Stable identifier of the coefficient set.
  std::string hash() const;

 private:
  int n_ = 0;
  int kmax_ = 0;
  std::vector<FourierMode> modes_;
  std::vector<double> samples_;
  double lipschitz_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;

  void finish();
};

// B^eps_{r,+}(0): x' in (-r, r)^2, eps*gamma(x'/eps) < x3 < eps*gamma(x'/eps) + r.
struct BumpyBox {
  double epsilon = 1.0;
  double r = 1.0;
  bool small_scale() const { return r < epsilon; }
  double volume() const { return 4.0 * r * r * r; }
  bool contains(const BoundaryFunction& g, double x1, double x2, double x3) const;
};

enum class MapKind { ChannelShear, StripSigma };

struct TerrainMap {
  MapKind kind = MapKind::StripSigma;
  double epsilon = 1.0;
  int n = 0;
  // Bottom height, its slopes and the layer depth at the grid nodes. For the channel the nodes
  // are x' = eps * 2 pi i / n, for the strip y' = 2 pi i / n.
  std::vector<double> bottom, slope1, slope2, depth;
  double min_depth = 0.0;
  BoundaryFunction gamma;

  double bottom_at(double x1, double x2) const;
  // Mapped vertical coordinate s of a physical point and its inverse.
  double to_mapped(double x1, double x2, double x3) const;
  double from_mapped(double x1, double x2, double s) const;
  // Determinant of d(x)/d(x', s).
  double jacobian(double x1, double x2) const;
};

TerrainMap terrain_map(const BoundaryFunction& gamma, MapKind kind,
                       std::optional<double> epsilon = std::nullopt);

}  // namespace roughwall
