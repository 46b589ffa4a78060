#pragma once

#include <array>
#include <memory>
#include <vector>

#include "roughwall/geometry.hpp"
#include "roughwall/strip_stokes.hpp"

namespace roughwall {

struct ChannelResolution {
  int n1 = 96;
  int n2 = 96;  // 1 selects the groove fast path
  int nz = 64;
  double stretch = 1.5;
};

struct ChannelResiduals {
  double weak_residual = 0.0;        // dual norm of the momentum functional over ||grad u||
  double divergence_residual = 0.0;  // rms cell divergence over rms |grad u|
  double energy_mismatch = 0.0;      // |a(u,u) - top work| / a(u,u)
  int picard_iterations = 0;
  int stokes_iterations = 0;
  std::vector<double> picard_history;  // relative change per Picard step
};

struct ChannelOptions {
  double tol = 1e-8;
  int max_picard = 200;
  double relaxation = 0.7;
  int max_krylov = 3000;
};

// Bumpy channel eps*gamma(x'/eps) < x3 < 1 with lateral period 2*pi*eps*nper.
struct ChannelSolution {
  BoundaryFunction boundary;
  double epsilon = 0.0;
  int nper = 2;
  std::array<double, 2> u_top{0, 0};
  bool nonlinear = false;
  ChannelResolution grid;
  std::shared_ptr<const LayerStokes> op;
  std::vector<double> u;  // nodal velocity, LayerStokes layout
  std::vector<double> p;  // cell pressure, zero mean
  ChannelResiduals residuals;

  double period() const { return kTwoPi * epsilon * nper; }
};

ChannelSolution solve_channel(const BoundaryFunction& gamma, double epsilon, int nper, std::array<double, 2> u_top,
                              bool nonlinear, const ChannelResolution& res, const ChannelOptions& opt = {});

// Relative weak residual. test_space_size = 0 gives the exact dual norm over the discrete
// divergence-free space; otherwise the maximum over that many projected random test functions.
double weak_residual(const ChannelSolution& sol, int test_space_size = 0);
// Residual of another velocity field; the pressure only conditions the computation.
double weak_residual(const ChannelSolution& sol, const std::vector<double>& u, const std::vector<double>& p,
                     int test_space_size = 0);

struct ChannelSample {
  Vec3 u{0, 0, 0};
  double p = 0.0;
};

// Interpolation in mapped coordinates: bilinear in x', linear in s for velocity, cellwise in s
// for pressure.
std::vector<ChannelSample> evaluate(const ChannelSolution& sol, const std::vector<Vec3>& points);

// Exact Couette profile over a flat bottom at height eps*gamma0.
Vec3 couette_velocity(double epsilon, double gamma0, std::array<double, 2> u_top, double x3);

}  // namespace roughwall
