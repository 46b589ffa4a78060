#pragma once

#include <array>
#include <memory>
#include <vector>

#include "roughwall/fft.hpp"
#include "roughwall/krylov.hpp"
#include "roughwall/types.hpp"

namespace roughwall {

// Vertical nodes in [0, 1], clustered toward s = 0 when stretch > 0.
std::vector<double> stretched_levels(int nz, double stretch);

// Column-wise terrain-following layer between a periodic bottom graph g(x') and the flat
// top x3 = z_top: x3 = g (1 - s) + z_top s.
struct LayerGrid {
  int n1 = 0, n2 = 0;
  double len1 = kTwoPi, len2 = kTwoPi;
  double z_top = 0.0;
  std::vector<double> s;  // nz + 1 nodes
  std::vector<double> g;  // bottom height at the horizontal nodes (y1 fastest)

  int nz() const { return static_cast<int>(s.size()) - 1; }
  int ncol() const { return n1 * n2; }
};

enum class TopCondition { DirichletToNeumann, Dirichlet };

// Per Gauss point data handed to visitors.
struct GaussPoint {
  int column = 0;
  int cell = 0;
  double xi = 0.0;      // local coordinate in the cell, node k at 0 and k+1 at 1
  double s = 0.0;
  double x3 = 0.0;
  double weight = 0.0;  // physical volume weight
  double jac = 0.0;     // column depth z_top - g
};

struct StokesSolveReport {
  int iterations = 0;
  double residual = 0.0;   // final ||b - A x|| relative to the reference norm
  double reference = 0.0;
  bool converged = false;
  std::vector<double> history;
};

// Q1-in-s / spectral-in-x' velocity, cellwise pressure. Velocity vector layout is
// [component][level][i2][i1]; pressure [cell][i2][i1].
class LayerStokes {
 public:
  LayerStokes(LayerGrid grid, TopCondition top);
  ~LayerStokes();
  LayerStokes(const LayerStokes&) = delete;
  LayerStokes& operator=(const LayerStokes&) = delete;

  const LayerGrid& grid() const { return grid_; }
  TopCondition top() const { return top_; }
  int ncol() const { return grid_.ncol(); }
  int nz() const { return grid_.nz(); }
  size_t nvel() const { return static_cast<size_t>(3) * (nz() + 1) * ncol(); }
  size_t npres() const { return static_cast<size_t>(nz()) * ncol(); }
  size_t vidx(int c, int k, int i) const { return (static_cast<size_t>(c) * (nz() + 1) + k) * ncol() + i; }
  size_t pidx(int k, int i) const { return static_cast<size_t>(k) * ncol() + i; }
  double cell_area() const { return area_; }
  const std::vector<double>& depth() const { return jac_; }
  const std::vector<double>& slope1() const { return dg1_; }
  const std::vector<double>& slope2() const { return dg2_; }
  const Fft2& fft() const { return fft_; }
  bool dirichlet_level(int k) const { return k == 0 || (top_ == TopCondition::Dirichlet && k == nz()); }

  // Discrete bilinear forms (no boundary masking).
  void apply_stiffness(const double* w, double* out) const;  // energy form plus DN when active
  void apply_div(const double* w, double* out) const;
  void apply_div_t(const double* lam, double* out) const;
  // Skew-symmetric advection functional n(u; u, .).
  void apply_advection(const double* u, double* out) const;
  double energy(const double* w) const;  // Dirichlet energy only
  // Discrete <DN w_top, w_top> (area-weighted grid pairing).
  double dn_energy(const double* w) const;
  // Area-weighted DN of the top slice, three components back to back.
  void apply_dn_top(const double* w, double* out) const;

  // Full saddle operator on [w; lam].
  void apply_saddle(const std::vector<double>& x, std::vector<double>& y) const;

  // Solves [K B^T; B 0][w; lam] = [f; 0] with w fixed to `w` on Dirichlet levels. `w` and
  // `lam` hold the initial guess (w must carry the Dirichlet data) and receive the solution.
  StokesSolveReport solve(const std::vector<double>& f, std::vector<double>& w, std::vector<double>& lam,
                          double rel_tol, int max_iterations, int restart = 40) const;

  // Visits every Gauss point with interpolated values u[c] and physical gradients G[c][d].
  template <class F>
  void visit(const double* w, F&& f) const;

  // Physical gradients at the horizontal nodes of every level, per component: D1, D2.
  void horizontal_derivatives(const double* w, std::vector<double>& d1, std::vector<double>& d2) const;

 private:
  LayerGrid grid_;
  TopCondition top_;
  Fft2 fft_;
  double area_;
  std::vector<double> jac_, dg1_, dg2_;
  struct Precond;
  std::unique_ptr<Precond> pre_;

  void derivative_pair(const double* f, double* d1, double* d2) const;
  // out += D1^T a + D2^T b
  void add_divergence_t(const double* a, const double* b, double* out) const;
  void apply_precond(const std::vector<double>& r, std::vector<double>& z) const;
  void build_precond();
  void mask_dirichlet(std::vector<double>& x) const;
};

inline constexpr double kGaussXi[2] = {0.5 - 0.28867513459481288, 0.5 + 0.28867513459481288};

template <class F>
void LayerStokes::visit(const double* w, F&& f) const {
  const int n = ncol(), L = nz() + 1;
  std::vector<double> d1, d2;
  horizontal_derivatives(w, d1, d2);
  const auto& s = grid_.s;
  for (int k = 0; k < nz(); ++k) {
    const double ds = s[k + 1] - s[k];
    for (int i = 0; i < n; ++i) {
      const double J = jac_[i];
      const double a1 = dg1_[i], a2 = dg2_[i];
      for (int q = 0; q < 2; ++q) {
        const double xi = kGaussXi[q];
        GaussPoint gp;
        gp.column = i;
        gp.cell = k;
        gp.xi = xi;
        gp.s = s[k] + xi * ds;
        gp.x3 = grid_.g[i] * (1.0 - gp.s) + grid_.z_top * gp.s;
        gp.weight = 0.5 * area_ * J * ds;
        gp.jac = J;
        const double os = 1.0 - gp.s;
        double u[3], G[3][3];
        for (int c = 0; c < 3; ++c) {
          const size_t lo = (static_cast<size_t>(c) * L + k) * n + i, hi = lo + n;
          u[c] = (1 - xi) * w[lo] + xi * w[hi];
          const double sv = (w[hi] - w[lo]) / ds;
          G[c][0] = (1 - xi) * d1[lo] + xi * d1[hi] - a1 * os * sv / J;
          G[c][1] = (1 - xi) * d2[lo] + xi * d2[hi] - a2 * os * sv / J;
          G[c][2] = sv / J;
        }
        f(gp, u, G);
      }
    }
  }
}

}  // namespace roughwall
