#include "roughwall/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "roughwall/error.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

double rms(const std::vector<double>& v) { return norm2(v); }

// Momentum functional K u + N(u) - B^T p on the interior rows, Dirichlet rows zeroed. The
// pressure term vanishes on divergence-free tests; including it keeps the load small.
std::vector<double> momentum_functional(const LayerStokes& op, const std::vector<double>& u,
                                        const std::vector<double>& p, bool nonlinear) {
  std::vector<double> r(op.nvel()), t(op.nvel());
  op.apply_stiffness(u.data(), r.data());
  if (nonlinear) {
    op.apply_advection(u.data(), t.data());
    for (size_t i = 0; i < r.size(); ++i) r[i] += t[i];
  }
  if (p.size() == op.npres()) {
    op.apply_div_t(p.data(), t.data());
    for (size_t i = 0; i < r.size(); ++i) r[i] -= t[i];
  }
  const int n = op.ncol();
  for (int k = 0; k <= op.nz(); ++k)
    if (op.dirichlet_level(k))
      for (int c = 0; c < 3; ++c) std::fill(r.begin() + op.vidx(c, k, 0), r.begin() + op.vidx(c, k, 0) + n, 0.0);
  return r;
}

// Energy-orthogonal projection of a load onto the discrete divergence-free space with zero
// boundary values: returns z with a(z, phi) = <r, phi> for all such phi.
std::vector<double> project_load(const LayerStokes& op, const std::vector<double>& r) {
  std::vector<double> z(op.nvel(), 0.0), mu(op.npres(), 0.0);
  const StokesSolveReport rep = op.solve(r, z, mu, 1e-9, 3000);
  if (!rep.converged)
    throw Error(ErrorKind::SolverDiverged, "projection solve stalled at relative residual " + fmt17(rep.residual));
  return z;
}

double dotp(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Vec3 couette_velocity(double epsilon, double gamma0, std::array<double, 2> u_top, double x3) {
  const double b = epsilon * gamma0;
  const double t = (x3 - b) / (1.0 - b);
  return {t * u_top[0], t * u_top[1], 0.0};
}

ChannelSolution solve_channel(const BoundaryFunction& gamma, double epsilon, int nper, std::array<double, 2> u_top,
                              bool nonlinear, const ChannelResolution& res, const ChannelOptions& opt) {
  if (!(epsilon > 0.0 && epsilon <= 0.25)) throw Error(ErrorKind::ConfigError, "channel needs epsilon in (0, 0.25]");
  if (nper < 2) throw Error(ErrorKind::ConfigError, "channel needs at least two periods per side");
  if (std::hypot(u_top[0], u_top[1]) > 4.0) throw Error(ErrorKind::ConfigError, "|U_top| must not exceed 4");
  if (res.nz < 4 || res.n1 % nper != 0 || res.n1 / nper < 4)
    throw Error(ErrorKind::ConfigError, "n1 must be a multiple of nper with at least 4 nodes per period");
  if (res.n2 != 1 && (res.n2 % nper != 0 || res.n2 / nper < 4))
    throw Error(ErrorKind::ConfigError, "n2 must be 1 or a multiple of nper with at least 4 nodes per period");
  if (res.n2 == 1 && !gamma.is_groove())
    throw Error(ErrorKind::ConfigError, "the n2 = 1 fast path requires a profile depending on y1 only");
  if (!(opt.relaxation > 0.0 && opt.relaxation <= 1.0))
    throw Error(ErrorKind::ConfigError, "Picard relaxation must lie in (0, 1]");

  const int m1 = res.n1 / nper, m2 = res.n2 == 1 ? 1 : res.n2 / nper;
  std::vector<double> gs;
  gamma.sample(m1, m2, &gs);

  ChannelSolution sol;
  sol.boundary = gamma;
  sol.epsilon = epsilon;
  sol.nper = nper;
  sol.u_top = u_top;
  sol.nonlinear = nonlinear;
  sol.grid = res;

  LayerGrid lg;
  lg.n1 = res.n1;
  lg.n2 = res.n2;
  lg.len1 = sol.period();
  lg.len2 = sol.period();
  lg.z_top = 1.0;
  lg.s = stretched_levels(res.nz, res.stretch);
  lg.g.resize(static_cast<size_t>(res.n1) * res.n2);
  for (int i2 = 0; i2 < res.n2; ++i2)
    for (int i1 = 0; i1 < res.n1; ++i1) lg.g[i1 + res.n1 * i2] = epsilon * gs[(i1 % m1) + m1 * (i2 % m2)];
  auto op = std::make_shared<const LayerStokes>(lg, TopCondition::Dirichlet);
  sol.op = op;

  const int n = op->ncol(), Z = op->nz();
  std::vector<double> u(op->nvel(), 0.0), lam(op->npres(), 0.0), f(op->nvel(), 0.0);
  for (int k = 0; k <= Z; ++k)
    for (int i = 0; i < n; ++i) {
      u[op->vidx(0, k, i)] = lg.s[k] * u_top[0];
      u[op->vidx(1, k, i)] = lg.s[k] * u_top[1];
    }
  const double inner_tol = 0.01 * opt.tol;

  StokesSolveReport rep = op->solve(f, u, lam, inner_tol, opt.max_krylov);
  if (!rep.converged)
    throw Error(ErrorKind::SolverDiverged, "channel Stokes solve stalled at relative residual " + fmt17(rep.residual));
  sol.residuals.stokes_iterations = rep.iterations;

  if (nonlinear) {
    std::vector<double> star = u, lam_star = lam, next(u.size());
    bool converged = false;
    for (int it = 1; it <= opt.max_picard; ++it) {
      op->apply_advection(u.data(), f.data());
      for (double& x : f) x = -x;
      star = u;
      lam_star = lam;
      rep = op->solve(f, star, lam_star, inner_tol, opt.max_krylov);
      sol.residuals.stokes_iterations += rep.iterations;
      if (!rep.converged)
        throw Error(ErrorKind::SolverDiverged,
                    "Picard step " + std::to_string(it) + " Stokes solve stalled at " + fmt17(rep.residual),
                    sol.residuals.picard_history);
      double dn = 0.0, nn = 0.0;
      for (size_t i = 0; i < u.size(); ++i) {
        next[i] = (1.0 - opt.relaxation) * u[i] + opt.relaxation * star[i];
        dn += (next[i] - u[i]) * (next[i] - u[i]);
        nn += next[i] * next[i];
      }
      const double change = nn > 0.0 ? std::sqrt(dn / nn) : std::sqrt(dn);
      sol.residuals.picard_history.push_back(change);
      sol.residuals.picard_iterations = it;
      if (!std::isfinite(change) || change > 10.0)
        throw Error(ErrorKind::PicardDiverged, "Picard iteration blew up at step " + std::to_string(it),
                    sol.residuals.picard_history);
      u.swap(next);
      lam = lam_star;
      if (change <= opt.tol) {
        // Return the last unrelaxed solve together with its multiplier.
        u = star;
        converged = true;
        break;
      }
    }
    if (!converged)
      throw Error(ErrorKind::PicardDiverged,
                  "Picard iteration did not reach tolerance in " + std::to_string(opt.max_picard) + " steps",
                  sol.residuals.picard_history);
  }

  sol.u = u;
  sol.p.resize(lam.size());
  for (size_t i = 0; i < lam.size(); ++i) sol.p[i] = -lam[i];

  // Volume-weighted rms of the cell divergence over the rms velocity gradient.
  std::vector<double> bu(op->npres());
  op->apply_div(u.data(), bu.data());
  const double a = op->energy(u.data());
  double dsum = 0.0, vol = 0.0;
  for (int k = 0; k < Z; ++k)
    for (int i = 0; i < n; ++i) {
      const double cv = op->cell_area() * op->depth()[i] * (lg.s[k + 1] - lg.s[k]);
      const double d = bu[op->pidx(k, i)] / cv;
      dsum += d * d * cv;
      vol += cv;
    }
  const double grad_rms = std::sqrt(a / vol);
  sol.residuals.divergence_residual = grad_rms > 0.0 ? std::sqrt(dsum / vol) / grad_rms : std::sqrt(dsum / vol);

  // Power identity: a(u,u) equals the work of the top reaction.
  std::vector<double> ku(op->nvel()), bt(op->nvel()), nu(op->nvel(), 0.0);
  op->apply_stiffness(u.data(), ku.data());
  op->apply_div_t(lam.data(), bt.data());
  if (nonlinear) op->apply_advection(u.data(), nu.data());
  double work = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < n; ++i) {
      const size_t id = op->vidx(c, Z, i);
      work += (ku[id] + bt[id] + nu[id]) * u[id];
    }
  sol.residuals.energy_mismatch = a > 0.0 ? std::abs(a - work) / a : std::abs(work);

  sol.residuals.weak_residual = weak_residual(sol, 0);
  return sol;
}

double weak_residual(const ChannelSolution& sol, int test_space_size) {
  return weak_residual(sol, sol.u, sol.p, test_space_size);
}

double weak_residual(const ChannelSolution& sol, const std::vector<double>& u, const std::vector<double>& p,
                     int test_space_size) {
  const LayerStokes& op = *sol.op;
  if (u.size() != op.nvel()) throw Error(ErrorKind::ConfigError, "weak_residual: field size mismatch");
  const std::vector<double> r = momentum_functional(op, u, p, sol.nonlinear);
  const double rn = rms(r);
  const double grad = std::sqrt(op.energy(u.data()));
  const double scale = grad > 0.0 ? grad : 1.0;
  if (rn == 0.0) return 0.0;
  if (test_space_size <= 0) {
    const std::vector<double> z = project_load(op, r);
    return std::sqrt(std::max(0.0, dotp(r, z))) / scale;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int nn = op.ncol();
  double best = 0.0;
  for (int t = 0; t < test_space_size; ++t) {
    std::vector<double> g(op.nvel(), 0.0);
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k <= op.nz(); ++k)
        if (!op.dirichlet_level(k))
          for (int i = 0; i < nn; ++i) g[op.vidx(c, k, i)] = nd(rng);
    const std::vector<double> phi = project_load(op, g);
    const double e = op.energy(phi.data());
    if (e <= 0.0) continue;
    best = std::max(best, std::abs(dotp(r, phi)) / std::sqrt(e));
  }
  return best / scale;
}

std::vector<ChannelSample> evaluate(const ChannelSolution& sol, const std::vector<Vec3>& points) {
  const LayerStokes& op = *sol.op;
  const LayerGrid& lg = op.grid();
  const int n1 = lg.n1, n2 = lg.n2, Z = op.nz();
  const double h1 = lg.len1 / n1, h2 = lg.len2 / n2;
  std::vector<ChannelSample> out;
  out.reserve(points.size());
  for (const Vec3& x : points) {
    const double t1 = x[0] / h1;
    const double f1 = std::floor(t1);
    const double a1 = t1 - f1;
    const int j1 = static_cast<int>(((static_cast<long long>(f1) % n1) + n1) % n1);
    int j2 = 0;
    double a2 = 0.0;
    if (n2 > 1) {
      const double t2 = x[1] / h2;
      const double f2 = std::floor(t2);
      a2 = t2 - f2;
      j2 = static_cast<int>(((static_cast<long long>(f2) % n2) + n2) % n2);
    }
    int col[4];
    double wt[4];
    int nc = 0;
    for (int b2 = 0; b2 < (n2 > 1 ? 2 : 1); ++b2)
      for (int b1 = 0; b1 < 2; ++b1) {
        col[nc] = (j1 + b1) % n1 + n1 * ((j2 + b2) % n2);
        wt[nc] = (b1 ? a1 : 1.0 - a1) * (n2 > 1 ? (b2 ? a2 : 1.0 - a2) : 1.0);
        ++nc;
      }
    double g = 0.0;
    for (int q = 0; q < nc; ++q) g += wt[q] * lg.g[col[q]];
    const double tolz = 1e-12 * (1.0 + std::abs(x[2]));
    if (x[2] < g - tolz || x[2] > lg.z_top + tolz)
      throw Error(ErrorKind::OutOfDomain, "point (" + fmt17(x[0]) + ", " + fmt17(x[1]) + ", " + fmt17(x[2]) +
                                              ") lies outside the channel");
    const double s = std::clamp((x[2] - g) / (lg.z_top - g), 0.0, 1.0);
    int k = static_cast<int>(std::upper_bound(lg.s.begin(), lg.s.end(), s) - lg.s.begin()) - 1;
    k = std::clamp(k, 0, Z - 1);
    const double xi = (s - lg.s[k]) / (lg.s[k + 1] - lg.s[k]);
    ChannelSample smp;
    for (int q = 0; q < nc; ++q) {
      for (int c = 0; c < 3; ++c)
        smp.u[c] += wt[q] * ((1.0 - xi) * sol.u[op.vidx(c, k, col[q])] + xi * sol.u[op.vidx(c, k + 1, col[q])]);
      smp.p += wt[q] * sol.p[op.pidx(k, col[q])];
    }
    out.push_back(smp);
  }
  return out;
}

}  // namespace roughwall
