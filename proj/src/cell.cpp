#include "roughwall/cell.hpp"

#include <algorithm>
#include <cmath>

#include "roughwall/error.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

CorrectorSolution solve_corrector(const BoundaryFunction& gamma, int j, const CellResolution& res,
                                  double solver_tol, int max_iterations) {
  if (j != 1 && j != 2) throw Error(ErrorKind::ConfigError, "corrector index j must be 1 or 2");
  if (res.n1 < 16 || res.nz < 16 || (res.n2 < 16 && res.n2 != 1))
    throw Error(ErrorKind::ConfigError, "corrector resolution must be at least 16x16x16");
  if (res.n2 == 1 && !gamma.is_groove())
    throw Error(ErrorKind::ConfigError, "the n2 = 1 fast path requires a profile depending on y1 only");

  LayerGrid lg;
  lg.n1 = res.n1;
  lg.n2 = res.n2;
  lg.z_top = 0.0;
  lg.s = stretched_levels(res.nz, res.stretch);
  gamma.sample(res.n1, res.n2, &lg.g);
  auto op = std::make_shared<const LayerStokes>(lg, TopCondition::DirichletToNeumann);

  const int n = op->ncol(), Z = op->nz();
  const int jc = j - 1;
  std::vector<double> f(op->nvel(), 0.0);
  for (int i = 0; i < n; ++i) f[op->vidx(jc, Z, i)] = op->cell_area();

  // Flat-wall solution as initial guess; it vanishes on the bottom.
  std::vector<double> w(op->nvel(), 0.0), lam(op->npres(), 0.0);
  for (int k = 0; k <= Z; ++k)
    for (int i = 0; i < n; ++i) w[op->vidx(jc, k, i)] = -lg.g[i] * lg.s[k];

  const StokesSolveReport rep = op->solve(f, w, lam, 0.5 * solver_tol, max_iterations);
  if (!rep.converged)
    throw Error(ErrorKind::SolverDiverged, "corrector solve stalled at relative residual " + fmt17(rep.residual) +
                                               " after " + std::to_string(rep.iterations) + " iterations");

  CorrectorSolution c;
  c.j = j;
  c.boundary = gamma;
  c.grid = res;
  c.op = op;
  c.w = w;
  c.v = w;
  for (int k = 0; k <= Z; ++k)
    for (int i = 0; i < n; ++i) c.v[op->vidx(jc, k, i)] -= lg.g[i] * (1.0 - lg.s[k]);
  c.q.resize(lam.size());
  for (size_t i = 0; i < lam.size(); ++i) c.q[i] = -lam[i];

  std::vector<double> top(3 * static_cast<size_t>(n));
  for (int cc = 0; cc < 3; ++cc)
    for (int i = 0; i < n; ++i) top[cc * n + i] = w[op->vidx(cc, Z, i)];
  c.trace = SpectralTrace::from_grid(top, res.n1, res.n2, kTwoPi);
  for (int cc = 0; cc < 3; ++cc) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += top[cc * n + i];
    c.alpha[cc] = s / n;
  }

  // Diagnostics, relative to the norm of the load.
  double fn = 0.0;
  for (double x : f) fn += x * x;
  fn = std::sqrt(fn);
  std::vector<double> x(op->nvel() + op->npres()), y;
  std::copy(w.begin(), w.end(), x.begin());
  std::copy(lam.begin(), lam.end(), x.begin() + op->nvel());
  op->apply_saddle(x, y);
  double mom = 0.0, dn = 0.0, div = 0.0, slip = 0.0;
  for (int cc = 0; cc < 3; ++cc)
    for (int k = 1; k <= Z; ++k)
      for (int i = 0; i < n; ++i) {
        const size_t idx = op->vidx(cc, k, i);
        const double r = y[idx] - f[idx];
        (k == Z ? dn : mom) += r * r;
      }
  for (size_t i = 0; i < op->npres(); ++i) div += y[op->nvel() + i] * y[op->nvel() + i];
  for (int cc = 0; cc < 3; ++cc)
    for (int i = 0; i < n; ++i) slip = std::max(slip, std::abs(w[op->vidx(cc, 0, i)]));
  c.diagnostics.momentum_residual = std::sqrt(mom) / fn;
  c.diagnostics.dn_residual = std::sqrt(dn) / fn;
  c.diagnostics.divergence_residual = std::sqrt(div) / fn;
  c.diagnostics.noslip_residual = slip;
  c.diagnostics.iterations = rep.iterations;
  return c;
}

HalfspaceEval extend_to_halfspace(const CorrectorSolution& c, const std::vector<double>& heights, bool with_gradient) {
  return halfspace_fourier_eval(c.trace, heights, c.grid.n1, c.grid.n2, with_gradient);
}

Vec3 slip_vector(const CorrectorSolution& c) { return c.alpha; }

SlipMatrix slip_matrix(const CorrectorSolution& c1, const CorrectorSolution& c2) {
  SlipMatrix s;
  s.alpha1 = c1.alpha;
  s.alpha2 = c2.alpha;
  for (int i = 0; i < 2; ++i) {
    s.m[i][0] = c1.alpha[i];
    s.m[i][1] = c2.alpha[i];
  }
  s.asymmetry = std::abs(s.m[0][1] - s.m[1][0]);
  const double a = s.m[0][0], d = s.m[1][1], b = 0.5 * (s.m[0][1] + s.m[1][0]);
  const double mid = 0.5 * (a + d), rad = std::hypot(0.5 * (a - d), b);
  s.eigenvalues = {mid - rad, mid + rad};
  return s;
}

SlipMatrix slip_matrix(const BoundaryFunction& gamma, const CellResolution& res, double solver_tol) {
  return slip_matrix(solve_corrector(gamma, 1, res, solver_tol), solve_corrector(gamma, 2, res, solver_tol));
}

EnergySlip energy_slip_identity(const CorrectorSolution& c) {
  EnergySlip e;
  e.alpha_from_trace = c.alpha[c.j - 1];
  const double total = c.op->energy(c.w.data()) + c.op->dn_energy(c.w.data());
  e.alpha_from_energy = total / (kTwoPi * kTwoPi);
  e.mismatch = std::abs(e.alpha_from_energy - e.alpha_from_trace) / std::abs(e.alpha_from_trace);
  return e;
}

DecayFit decay_fit(const CorrectorSolution& c, double y_max, double y_min) {
  if (y_max < 3.0) throw Error(ErrorKind::ConfigError, "decay fit needs Ymax >= 3");
  DecayFit fit;
  const int m = 64;
  const double floor = 1e-13 * (1.0 + std::sqrt(norm2(c.alpha)));
  std::vector<double> ys, ls;
  for (int i = 0; i <= m; ++i) {
    const double y = y_min + (y_max - y_min) * i / m;
    const double d = halfspace_deviation(c.trace, y);
    if (d <= floor) break;
    ys.push_back(y);
    ls.push_back(std::log(d));
  }
  if (ys.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(ys.size());
  double sy = 0, sl = 0;
  for (size_t i = 0; i < ys.size(); ++i) {
    sy += ys[i];
    sl += ls[i];
  }
  const double my = sy / n, ml = sl / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < ys.size(); ++i) {
    sxx += (ys[i] - my) * (ys[i] - my);
    sxy += (ys[i] - my) * (ls[i] - ml);
  }
  const double slope = sxy / sxx;
  fit.fitted_rate = -slope;
  fit.prefactor = std::exp(ml - slope * my);
  return fit;
}

}  // namespace roughwall
