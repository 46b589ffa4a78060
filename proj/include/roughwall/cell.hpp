#pragma once

#include <array>
#include <memory>
#include <vector>

#include "roughwall/geometry.hpp"
#include "roughwall/halfspace.hpp"
#include "roughwall/strip_stokes.hpp"

namespace roughwall {

struct CellResolution {
  int n1 = 64;
  int n2 = 64;  // 1 selects the groove fast path (gamma = gamma(y1) only)
  int nz = 64;
  double stretch = 0.0;
};

struct CorrectorDiagnostics {
  double divergence_residual = 0.0;
  double momentum_residual = 0.0;
  double dn_residual = 0.0;
  double noslip_residual = 0.0;
  int iterations = 0;
};

// Boundary-layer corrector on the strip gamma(y') < y3 < 0 with the DN condition on top.
struct CorrectorSolution {
  int j = 1;
  BoundaryFunction boundary;
  CellResolution grid;
  std::shared_ptr<const LayerStokes> op;
  std::vector<double> w;  // v + y3 e_j at the nodes (zero on the bottom graph)
  std::vector<double> v;  // the corrector itself
  std::vector<double> q;  // pressure per cell
  SpectralTrace trace;    // of v at y3 = 0
  Vec3 alpha{0, 0, 0};
  CorrectorDiagnostics diagnostics;
};

CorrectorSolution solve_corrector(const BoundaryFunction& gamma, int j, const CellResolution& res,
                                  double solver_tol = 1e-8, int max_iterations = 3000);

// Fields of the half-space extension at the requested heights, on the corrector's grid.
HalfspaceEval extend_to_halfspace(const CorrectorSolution& c, const std::vector<double>& heights,
                                  bool with_gradient = false);

Vec3 slip_vector(const CorrectorSolution& c);

struct SlipMatrix {
  std::array<std::array<double, 2>, 2> m{};  // m[i][j] = alpha_i^(j)
  double asymmetry = 0.0;
  std::array<double, 2> eigenvalues{};  // of the symmetric part, ascending
  Vec3 alpha1{0, 0, 0}, alpha2{0, 0, 0};
};

SlipMatrix slip_matrix(const CorrectorSolution& c1, const CorrectorSolution& c2);
SlipMatrix slip_matrix(const BoundaryFunction& gamma, const CellResolution& res, double solver_tol = 1e-8);

struct EnergySlip {
  double alpha_from_trace = 0.0;
  double alpha_from_energy = 0.0;
  double mismatch = 0.0;
};

EnergySlip energy_slip_identity(const CorrectorSolution& c);

struct DecayFit {
  double fitted_rate = 0.0;
  double prefactor = 0.0;
  bool degenerate = false;
};

inline constexpr double kDefaultDecayYmax = 12.0;

DecayFit decay_fit(const CorrectorSolution& c, double y_max = kDefaultDecayYmax, double y_min = 1.0);

}  // namespace roughwall
