#pragma once

#include <array>
#include <vector>

#include "roughwall/types.hpp"

namespace roughwall {

using CMat3 = std::array<std::array<cplx, 3>, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Horizontal Fourier coefficients of a real 3-vector field on the torus of side `period`:
// b(y') = sum_k b_k exp(i 2 pi k.y' / period), |k1| <= kmax1, |k2| <= kmax2.
struct SpectralTrace {
  int kmax1 = 0;
  int kmax2 = 0;
  double period = kTwoPi;
  std::vector<CVec3> coeffs;  // index (k2 + kmax2) * (2 kmax1 + 1) + (k1 + kmax1)

  SpectralTrace() = default;
  SpectralTrace(int k1max, int k2max, double len = kTwoPi);

  int kmax() const { return kmax1 > kmax2 ? kmax1 : kmax2; }
  int width() const { return 2 * kmax1 + 1; }
  CVec3& at(int k1, int k2) { return coeffs[(k2 + kmax2) * width() + (k1 + kmax1)]; }
  const CVec3& at(int k1, int k2) const { return coeffs[(k2 + kmax2) * width() + (k1 + kmax1)]; }
  CVec3 mean() const { return at(0, 0); }
  bool hermitian(double tol = 1e-12) const;
  double l2_coeff_norm() const;

  // Samples on an n1 x n2 grid (y1 fastest), three components back to back.
  static SpectralTrace from_grid(const std::vector<double>& field, int n1, int n2, double len = kTwoPi);
  std::vector<double> to_grid(int n1, int n2) const;
};

struct KernelValue {
  Mat3 U;
  double P = 0.0;
};

// Poisson kernel of the half-space Stokes problem.
KernelValue poisson_kernel_eval(const Vec3& y);

// Velocity datum on a uniform planar grid, compactly supported inside the grid.
struct PlanarDatum {
  double x0 = 0.0, y0 = 0.0;  // coordinates of node (0, 0)
  double h = 1.0;
  int n1 = 0, n2 = 0;
  std::vector<Vec3> values;  // y1 fastest
};

struct PoissonResult {
  std::vector<Vec3> u;
  double error_estimate = 0.0;  // O(h^2) scale declared by the rule
};

PoissonResult poisson_solve(const PlanarDatum& u0, const std::vector<Vec3>& points);

struct DnSymbol {
  double xi1 = 0.0, xi2 = 0.0;
  CMat3 matrix;
  CMat3 singular_part;
};

DnSymbol dn_symbol(double xi1, double xi2);

// Mode-wise M(k) b_k; the zero mode maps to zero.
SpectralTrace dn_apply_periodic(const SpectralTrace& trace);

// <DN b, b> over one period cell.
double dn_pairing(const SpectralTrace& trace);

struct ModeValue {
  CVec3 v;    // velocity coefficient
  CVec3 dv3;  // its y3 derivative
  cplx q;     // pressure coefficient
  cplx dq3;
};

// Decaying half-space solution of one Fourier mode with wavevector xi at height y3.
ModeValue halfspace_mode(double xi1, double xi2, const CVec3& b, double y3);

struct PointValue {
  Vec3 u{0, 0, 0};
  std::array<Vec3, 3> grad{};  // grad[c][d] = d u_c / d y_d
  double p = 0.0;
};

// Direct Fourier sum at one point. Modes whose decayed amplitude is below `cutoff` times the
// trace scale are skipped.
PointValue halfspace_point(const SpectralTrace& trace, double y1, double y2, double y3,
                           double cutoff = 0.0);

// Physical fields on an n1 x n2 grid at one height.
struct HalfspaceSlice {
  double y3 = 0.0;
  std::vector<double> u1, u2, u3, p;
  std::vector<double> grad2;  // |grad u|^2, filled when requested
  std::vector<double> d3u1, d3u2, d3u3;
};

struct HalfspaceEval {
  std::vector<double> heights;
  // modes[h][i] matches trace.coeffs ordering
  std::vector<std::vector<ModeValue>> modes;
  std::vector<HalfspaceSlice> slices;
};

HalfspaceEval halfspace_fourier_eval(const SpectralTrace& trace, const std::vector<double>& heights,
                                     int n1 = 0, int n2 = 0, bool with_gradient = false);

// L2(torus) norm of the field minus its mean at height y3.
double halfspace_deviation(const SpectralTrace& trace, double y3);

}  // namespace roughwall
