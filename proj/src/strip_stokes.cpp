#include "roughwall/strip_stokes.hpp"

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughwall/error.hpp"
#include "roughwall/halfspace.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

std::vector<double> stretched_levels(int nz, double stretch) {
  std::vector<double> s(nz + 1);
  for (int k = 0; k <= nz; ++k) {
    const double t = static_cast<double>(k) / nz;
    s[k] = stretch > 0.0 ? 1.0 + std::tanh(stretch * (t - 1.0)) / std::tanh(stretch) : t;
  }
  s[0] = 0.0;
  s[nz] = 1.0;
  return s;
}

struct LayerStokes::Precond {
  int nb = 0;
  static constexpr int kl = 6, ku = 6, ldab = 2 * kl + ku + 1;
  std::vector<cplx> ab;
  std::vector<lapack_int> ipiv;
  std::vector<CMat3> dn;  // area * effective DN symbol per mode
};

LayerStokes::LayerStokes(LayerGrid grid, TopCondition top)
    : grid_(std::move(grid)), top_(top), fft_(grid_.n1, grid_.n2, grid_.len1, grid_.len2) {
  const int n = ncol();
  if (grid_.g.size() != static_cast<size_t>(n)) throw Error(ErrorKind::ConfigError, "bottom sample count mismatch");
  if (nz() < 1) throw Error(ErrorKind::ConfigError, "need at least one vertical cell");
  area_ = grid_.len1 * grid_.len2 / n;
  jac_.resize(n);
  for (int i = 0; i < n; ++i) {
    jac_[i] = grid_.z_top - grid_.g[i];
    if (jac_[i] < 1e-6) throw Error(ErrorKind::DegenerateMap, "layer depth " + fmt17(jac_[i]) + " below 1e-6");
  }
  dg1_.resize(n);
  dg2_.resize(n);
  fft_.gradient(grid_.g.data(), dg1_.data(), dg2_.data());
  build_precond();
}

LayerStokes::~LayerStokes() = default;

void LayerStokes::derivative_pair(const double* f, double* d1, double* d2) const {
  const int hs = fft_.h1();
  std::vector<cplx> a(fft_.spec_size()), b(fft_.spec_size());
  fft_.forward(f, a.data());
  const cplx I(0.0, 1.0);
  for (int m2 = 0; m2 < grid_.n2; ++m2) {
    const double k2 = fft_.deriv2(m2);
    for (int m1 = 0; m1 < hs; ++m1) {
      const int q = m2 * hs + m1;
      b[q] = I * k2 * a[q];
      a[q] = I * fft_.deriv1(m1) * a[q];
    }
  }
  fft_.inverse_destroy(a.data(), d1);
  fft_.inverse_destroy(b.data(), d2);
}

void LayerStokes::add_divergence_t(const double* a, const double* b, double* out) const {
  const int hs = fft_.h1(), n = ncol();
  std::vector<cplx> sa(fft_.spec_size()), sb(fft_.spec_size());
  std::vector<double> t(n);
  fft_.forward(a, sa.data());
  fft_.forward(b, sb.data());
  const cplx I(0.0, 1.0);
  for (int m2 = 0; m2 < grid_.n2; ++m2) {
    const double k2 = fft_.deriv2(m2);
    for (int m1 = 0; m1 < hs; ++m1) {
      const int q = m2 * hs + m1;
      sa[q] = -I * (fft_.deriv1(m1) * sa[q] + k2 * sb[q]);
    }
  }
  fft_.inverse_destroy(sa.data(), t.data());
  for (int i = 0; i < n; ++i) out[i] += t[i];
}

void LayerStokes::horizontal_derivatives(const double* w, std::vector<double>& d1, std::vector<double>& d2) const {
  const int n = ncol(), planes = 3 * (nz() + 1);
  d1.assign(nvel(), 0.0);
  d2.assign(nvel(), 0.0);
  for (int p = 0; p < planes; ++p) derivative_pair(w + static_cast<size_t>(p) * n, &d1[p * n], &d2[p * n]);
}

void LayerStokes::apply_stiffness(const double* w, double* out) const {
  const int n = ncol(), L = nz() + 1;
  std::fill(out, out + nvel(), 0.0);
  std::vector<double> d1, d2;
  horizontal_derivatives(w, d1, d2);
  std::vector<double> y1(nvel(), 0.0), y2(nvel(), 0.0);
  const auto& s = grid_.s;
  for (int k = 0; k < nz(); ++k) {
    const double ds = s[k + 1] - s[k];
    for (int c = 0; c < 3; ++c) {
      const size_t base = (static_cast<size_t>(c) * L + k) * n;
      for (int i = 0; i < n; ++i) {
        const size_t lo = base + i, hi = lo + n;
        const double J = jac_[i], a1 = dg1_[i], a2 = dg2_[i];
        const double sv = (w[hi] - w[lo]) / ds;
        double T = 0.0;
        for (int q = 0; q < 2; ++q) {
          const double xi = kGaussXi[q];
          const double os = 1.0 - (s[k] + xi * ds);
          const double om = 0.5 * area_ * J * ds;
          const double g1 = (1 - xi) * d1[lo] + xi * d1[hi] - a1 * os * sv / J;
          const double g2 = (1 - xi) * d2[lo] + xi * d2[hi] - a2 * os * sv / J;
          const double g3 = sv / J;
          const double x1 = om * g1, x2 = om * g2, x3 = om * g3;
          y1[lo] += (1 - xi) * x1;
          y1[hi] += xi * x1;
          y2[lo] += (1 - xi) * x2;
          y2[hi] += xi * x2;
          T += -(x1 * a1 + x2 * a2) * os / J + x3 / J;
        }
        out[lo] -= T / ds;
        out[hi] += T / ds;
      }
    }
  }
  for (int p = 0; p < 3 * L; ++p) add_divergence_t(&y1[p * n], &y2[p * n], out + static_cast<size_t>(p) * n);

  if (top_ == TopCondition::DirichletToNeumann) {
    std::vector<double> t(3 * static_cast<size_t>(n));
    apply_dn_top(w, t.data());
    for (int c = 0; c < 3; ++c) {
      double* o = out + vidx(c, nz(), 0);
      for (int i = 0; i < n; ++i) o[i] += t[c * n + i];
    }
  }
}

void LayerStokes::apply_dn_top(const double* w, double* out) const {
  const int n = ncol(), hs = fft_.h1();
  std::vector<std::vector<cplx>> sp(3, std::vector<cplx>(fft_.spec_size()));
  for (int c = 0; c < 3; ++c) fft_.forward(w + vidx(c, nz(), 0), sp[c].data());
  std::vector<std::vector<cplx>> so(3, std::vector<cplx>(fft_.spec_size()));
  for (int q = 0; q < grid_.n2 * hs; ++q) {
    const CMat3& M = pre_->dn[q];
    for (int c = 0; c < 3; ++c) so[c][q] = M[c][0] * sp[0][q] + M[c][1] * sp[1][q] + M[c][2] * sp[2][q];
  }
  for (int c = 0; c < 3; ++c) fft_.inverse_destroy(so[c].data(), out + static_cast<size_t>(c) * n);
}

void LayerStokes::apply_advection(const double* u, double* out) const {
  const int n = ncol(), L = nz() + 1;
  std::fill(out, out + nvel(), 0.0);
  std::vector<double> d1, d2;
  horizontal_derivatives(u, d1, d2);
  std::vector<double> y1(nvel(), 0.0), y2(nvel(), 0.0);
  const auto& s = grid_.s;
  for (int k = 0; k < nz(); ++k) {
    const double ds = s[k + 1] - s[k];
    for (int i = 0; i < n; ++i) {
      const double J = jac_[i], a1 = dg1_[i], a2 = dg2_[i];
      size_t lo[3], hi[3];
      double sv[3];
      for (int c = 0; c < 3; ++c) {
        lo[c] = (static_cast<size_t>(c) * L + k) * n + i;
        hi[c] = lo[c] + n;
        sv[c] = (u[hi[c]] - u[lo[c]]) / ds;
      }
      double T[3] = {0, 0, 0};
      for (int q = 0; q < 2; ++q) {
        const double xi = kGaussXi[q];
        const double os = 1.0 - (s[k] + xi * ds);
        const double om = 0.5 * area_ * J * ds;
        double U[3], G[3][3];
        for (int c = 0; c < 3; ++c) {
          U[c] = (1 - xi) * u[lo[c]] + xi * u[hi[c]];
          G[c][0] = (1 - xi) * d1[lo[c]] + xi * d1[hi[c]] - a1 * os * sv[c] / J;
          G[c][1] = (1 - xi) * d2[lo[c]] + xi * d2[hi[c]] - a2 * os * sv[c] / J;
          G[c][2] = sv[c] / J;
        }
        for (int c = 0; c < 3; ++c) {
          // n(u; u, phi) = 1/2 [ (u.grad u).phi - (u.grad phi).u ]
          const double V = 0.5 * om * (U[0] * G[c][0] + U[1] * G[c][1] + U[2] * G[c][2]);
          const double x1 = -0.5 * om * U[0] * U[c], x2 = -0.5 * om * U[1] * U[c], x3 = -0.5 * om * U[2] * U[c];
          y1[lo[c]] += (1 - xi) * x1;
          y1[hi[c]] += xi * x1;
          y2[lo[c]] += (1 - xi) * x2;
          y2[hi[c]] += xi * x2;
          T[c] += -(x1 * a1 + x2 * a2) * os / J + x3 / J;
          out[lo[c]] += (1 - xi) * V;
          out[hi[c]] += xi * V;
        }
      }
      for (int c = 0; c < 3; ++c) {
        out[lo[c]] -= T[c] / ds;
        out[hi[c]] += T[c] / ds;
      }
    }
  }
  for (int p = 0; p < 3 * L; ++p) add_divergence_t(&y1[p * n], &y2[p * n], out + static_cast<size_t>(p) * n);
}

void LayerStokes::apply_div(const double* w, double* out) const {
  const int n = ncol(), hs = fft_.h1();
  const auto& s = grid_.s;
  std::vector<double> h1(n), h2(n), t(n);
  std::vector<cplx> a(fft_.spec_size()), b(fft_.spec_size());
  const cplx I(0.0, 1.0);
  for (int k = 0; k < nz(); ++k) {
    const double ds = s[k + 1] - s[k];
    const double* u1 = w + vidx(0, k, 0);
    const double* u2 = w + vidx(1, k, 0);
    for (int i = 0; i < n; ++i) {
      h1[i] = 0.5 * jac_[i] * ds * (u1[i] + u1[i + n]);
      h2[i] = 0.5 * jac_[i] * ds * (u2[i] + u2[i + n]);
    }
    fft_.forward(h1.data(), a.data());
    fft_.forward(h2.data(), b.data());
    for (int m2 = 0; m2 < grid_.n2; ++m2)
      for (int m1 = 0; m1 < hs; ++m1) {
        const int q = m2 * hs + m1;
        a[q] = I * (fft_.deriv1(m1) * a[q] + fft_.deriv2(m2) * b[q]);
      }
    fft_.inverse_destroy(a.data(), t.data());
    const double os0 = 1.0 - s[k], os1 = 1.0 - s[k + 1];
    const double* w0 = w + vidx(2, k, 0);
    const double* w1 = w + vidx(2, k + 1, 0);
    double* o = out + pidx(k, 0);
    for (int i = 0; i < n; ++i) {
      const double W0 = w0[i] - (dg1_[i] * u1[i] + dg2_[i] * u2[i]) * os0;
      const double W1 = w1[i] - (dg1_[i] * u1[i + n] + dg2_[i] * u2[i + n]) * os1;
      o[i] = area_ * (t[i] + W1 - W0);
    }
  }
}

void LayerStokes::apply_div_t(const double* lam, double* out) const {
  const int n = ncol();
  std::fill(out, out + nvel(), 0.0);
  const auto& s = grid_.s;
  std::vector<double> q1(n), q2(n), zero(n, 0.0);
  for (int k = 0; k < nz(); ++k) {
    const double ds = s[k + 1] - s[k];
    std::fill(q1.begin(), q1.end(), 0.0);
    // q1 = D1^T lam_k, q2 = D2^T lam_k
    add_divergence_t(lam + pidx(k, 0), zero.data(), q1.data());
    std::fill(q2.begin(), q2.end(), 0.0);
    add_divergence_t(zero.data(), lam + pidx(k, 0), q2.data());
    for (int i = 0; i < n; ++i) {
      const double f = 0.5 * area_ * ds * jac_[i];
      out[vidx(0, k, i)] += f * q1[i];
      out[vidx(0, k + 1, i)] += f * q1[i];
      out[vidx(1, k, i)] += f * q2[i];
      out[vidx(1, k + 1, i)] += f * q2[i];
    }
  }
  for (int m = 0; m <= nz(); ++m) {
    const double os = 1.0 - s[m];
    for (int i = 0; i < n; ++i) {
      const double below = m > 0 ? lam[pidx(m - 1, i)] : 0.0;
      const double above = m < nz() ? lam[pidx(m, i)] : 0.0;
      const double R = area_ * (below - above);
      out[vidx(2, m, i)] += R;
      out[vidx(0, m, i)] -= dg1_[i] * os * R;
      out[vidx(1, m, i)] -= dg2_[i] * os * R;
    }
  }
}

double LayerStokes::energy(const double* w) const {
  double e = 0.0;
  visit(w, [&](const GaussPoint& gp, const double*, const double (*G)[3]) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) s += G[c][d] * G[c][d];
    e += gp.weight * s;
  });
  return e;
}

double LayerStokes::dn_energy(const double* w) const {
  if (top_ != TopCondition::DirichletToNeumann) return 0.0;
  const int n = ncol();
  std::vector<double> t(3 * static_cast<size_t>(n));
  apply_dn_top(w, t.data());
  double e = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < n; ++i) e += w[vidx(c, nz(), i)] * t[c * n + i];
  return e;
}

void LayerStokes::mask_dirichlet(std::vector<double>& x) const {
  const int n = ncol();
  for (int k = 0; k <= nz(); ++k)
    if (dirichlet_level(k))
      for (int c = 0; c < 3; ++c) std::fill(x.begin() + vidx(c, k, 0), x.begin() + vidx(c, k, 0) + n, 0.0);
}

void LayerStokes::apply_saddle(const std::vector<double>& x, std::vector<double>& y) const {
  const size_t nv = nvel();
  y.assign(nv + npres(), 0.0);
  std::vector<double> t(nv);
  apply_stiffness(x.data(), y.data());
  apply_div_t(x.data() + nv, t.data());
  for (size_t i = 0; i < nv; ++i) y[i] += t[i];
  apply_div(x.data(), y.data() + nv);
}

void LayerStokes::build_precond() {
  pre_ = std::make_unique<Precond>();
  Precond& P = *pre_;
  const int hs = fft_.h1(), nmodes = hs * grid_.n2, Z = nz();
  P.nb = 4 * Z + 3;
  const int nb = P.nb, ldab = Precond::ldab, kl = Precond::kl, ku = Precond::ku;
  P.ab.assign(static_cast<size_t>(nmodes) * ldab * nb, cplx(0.0));
  P.ipiv.assign(static_cast<size_t>(nmodes) * nb, 0);
  P.dn.assign(nmodes, CMat3{});

  const double Jbar = std::accumulate(jac_.begin(), jac_.end(), 0.0) / ncol();
  const cplx I(0.0, 1.0);
  const auto& s = grid_.s;

  for (int m2 = 0; m2 < grid_.n2; ++m2)
    for (int m1 = 0; m1 < hs; ++m1) {
      const int q = m2 * hs + m1;
      if (top_ == TopCondition::DirichletToNeumann) {
        // Average over sign flips of Nyquist components so the discrete operator stays real.
        const double w1 = fft_.wave1(m1), w2 = fft_.wave2(m2);
        const int f1 = fft_.nyquist1(m1) ? 2 : 1, f2 = fft_.nyquist2(m2) ? 2 : 1;
        CMat3 acc{};
        for (int a = 0; a < f1; ++a)
          for (int b = 0; b < f2; ++b) {
            const double x1 = a ? -w1 : w1, x2 = b ? -w2 : w2;
            if (x1 == 0.0 && x2 == 0.0) continue;
            const CMat3 M = dn_symbol(x1, x2).matrix;
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j < 3; ++j) acc[i][j] += M[i][j] * (area_ / (f1 * f2));
          }
        P.dn[q] = acc;
      }
      const double k1 = fft_.deriv1(m1), k2 = fft_.deriv2(m2);
      const double kk = k1 * k1 + k2 * k2;
      const bool pin = top_ == TopCondition::Dirichlet && k1 == 0.0 && k2 == 0.0;
      cplx* ab = &P.ab[static_cast<size_t>(q) * ldab * nb];
      auto vi = [](int c, int k) { return 4 * k + c; };
      auto pi = [](int k) { return 4 * k + 3; };
      auto fixed = [&](int idx) {
        if (idx % 4 == 3) return pin && idx == 3;
        return dirichlet_level(idx / 4);
      };
      auto add = [&](int i, int j, cplx v) {
        if (fixed(i) || fixed(j)) return;
        ab[(kl + ku + i - j) + static_cast<size_t>(j) * ldab] += v;
      };
      for (int k = 0; k < Z; ++k) {
        const double ds = s[k + 1] - s[k];
        const double mass = area_ * Jbar * ds * kk, stiff = area_ / (Jbar * ds);
        for (int c = 0; c < 3; ++c) {
          add(vi(c, k), vi(c, k), mass / 3 + stiff);
          add(vi(c, k + 1), vi(c, k + 1), mass / 3 + stiff);
          add(vi(c, k), vi(c, k + 1), mass / 6 - stiff);
          add(vi(c, k + 1), vi(c, k), mass / 6 - stiff);
        }
        const cplx b1 = 0.5 * area_ * ds * Jbar * I * k1, b2 = 0.5 * area_ * ds * Jbar * I * k2;
        const cplx row[6] = {b1, b1, b2, b2, -area_, area_};
        const int col[6] = {vi(0, k), vi(0, k + 1), vi(1, k), vi(1, k + 1), vi(2, k), vi(2, k + 1)};
        for (int e = 0; e < 6; ++e) {
          add(pi(k), col[e], row[e]);
          add(col[e], pi(k), std::conj(row[e]));
        }
      }
      if (top_ == TopCondition::DirichletToNeumann)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) add(vi(c, Z), vi(d, Z), P.dn[q][c][d]);
      for (int i = 0; i < nb; ++i)
        if (fixed(i)) ab[(kl + ku) + static_cast<size_t>(i) * ldab] = 1.0;
      const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, nb, nb, kl, ku, ab, ldab,
                                             &P.ipiv[static_cast<size_t>(q) * nb]);
      if (info != 0)
        throw Error(ErrorKind::SolverDiverged, "singular preconditioner block at mode (" + std::to_string(m1) +
                                                   "," + std::to_string(m2) + ")");
    }
}

void LayerStokes::apply_precond(const std::vector<double>& r, std::vector<double>& z) const {
  const Precond& P = *pre_;
  const int n = ncol(), hs = fft_.h1(), nmodes = hs * grid_.n2, Z = nz(), L = Z + 1;
  const int planes = 3 * L + Z;
  const size_t nv = nvel();
  std::vector<cplx> spec(static_cast<size_t>(planes) * nmodes);
  auto plane_ptr = [&](int p) -> size_t {
    if (p < 3 * L) return static_cast<size_t>(p) * n;
    return nv + static_cast<size_t>(p - 3 * L) * n;
  };
  for (int p = 0; p < planes; ++p) fft_.forward(r.data() + plane_ptr(p), &spec[static_cast<size_t>(p) * nmodes]);
  std::vector<cplx> x(P.nb);
  for (int q = 0; q < nmodes; ++q) {
    for (int k = 0; k <= Z; ++k)
      for (int c = 0; c < 3; ++c) x[4 * k + c] = spec[static_cast<size_t>(c * L + k) * nmodes + q];
    for (int k = 0; k < Z; ++k) x[4 * k + 3] = spec[static_cast<size_t>(3 * L + k) * nmodes + q];
    LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', P.nb, Precond::kl, Precond::ku, 1,
                   &P.ab[static_cast<size_t>(q) * Precond::ldab * P.nb], Precond::ldab,
                   &P.ipiv[static_cast<size_t>(q) * P.nb], x.data(), P.nb);
    for (int k = 0; k <= Z; ++k)
      for (int c = 0; c < 3; ++c) spec[static_cast<size_t>(c * L + k) * nmodes + q] = x[4 * k + c];
    for (int k = 0; k < Z; ++k) spec[static_cast<size_t>(3 * L + k) * nmodes + q] = x[4 * k + 3];
  }
  z.assign(r.size(), 0.0);
  for (int p = 0; p < planes; ++p)
    fft_.inverse_destroy(&spec[static_cast<size_t>(p) * nmodes], z.data() + plane_ptr(p));
}

StokesSolveReport LayerStokes::solve(const std::vector<double>& f, std::vector<double>& w, std::vector<double>& lam,
                                     double rel_tol, int max_iterations, int restart) const {
  const size_t nv = nvel(), np = npres();
  if (f.size() != nv || w.size() != nv) throw Error(ErrorKind::ConfigError, "solve: vector size mismatch");
  if (lam.size() != np) lam.assign(np, 0.0);

  std::vector<double> b(nv + np, 0.0);
  std::copy(f.begin(), f.end(), b.begin());

  auto masked_residual = [&](const std::vector<double>& x) {
    std::vector<double> y;
    apply_saddle(x, y);
    for (size_t i = 0; i < y.size(); ++i) y[i] = b[i] - y[i];
    mask_dirichlet(y);
    return y;
  };

  // Reference: residual of the Dirichlet lift with zero interior and zero pressure.
  std::vector<double> lift(nv + np, 0.0);
  for (int k = 0; k <= nz(); ++k)
    if (dirichlet_level(k))
      for (int c = 0; c < 3; ++c)
        for (int i = 0; i < ncol(); ++i) lift[vidx(c, k, i)] = w[vidx(c, k, i)];
  StokesSolveReport rep;
  rep.reference = norm2(masked_residual(lift));
  if (rep.reference == 0.0) {
    w.assign(lift.begin(), lift.begin() + nv);
    lam.assign(np, 0.0);
    rep.converged = true;
    return rep;
  }

  std::vector<double> x(nv + np);
  std::copy(w.begin(), w.end(), x.begin());
  std::copy(lam.begin(), lam.end(), x.begin() + nv);
  std::vector<double> r0 = masked_residual(x);

  LinearMap A = [&](const std::vector<double>& in, std::vector<double>& out) {
    std::vector<double> m = in;
    mask_dirichlet(m);
    apply_saddle(m, out);
    for (int k = 0; k <= nz(); ++k)
      if (dirichlet_level(k))
        for (int c = 0; c < 3; ++c)
          for (int i = 0; i < ncol(); ++i) out[vidx(c, k, i)] = in[vidx(c, k, i)];
  };
  LinearMap M = [&](const std::vector<double>& in, std::vector<double>& out) { apply_precond(in, out); };
  std::vector<double> delta(nv + np, 0.0);
  GmresReport g = gmres(A, M, r0, delta, rel_tol * rep.reference, restart, max_iterations);
  for (size_t i = 0; i < x.size(); ++i) x[i] += delta[i];

  if (top_ == TopCondition::Dirichlet) {
    // Pressure modes invisible to the discrete divergence: constants and the horizontal
    // checkerboards (Nyquist patterns with zero spectral derivative).
    const int n1 = grid_.n1, n2 = grid_.n2, n = ncol();
    std::vector<std::vector<double>> null;
    for (int a = 0; a < 2; ++a)
      for (int b2 = 0; b2 < 2; ++b2) {
        if ((a && (n1 % 2 || n1 == 1)) || (b2 && (n2 % 2 || n2 == 1))) continue;
        std::vector<double> v(n);
        for (int i2 = 0; i2 < n2; ++i2)
          for (int i1 = 0; i1 < n1; ++i1) v[i1 + n1 * i2] = ((a * i1 + b2 * i2) % 2) ? -1.0 : 1.0;
        null.push_back(std::move(v));
      }
    for (const auto& v : null) {
      double dotv = 0.0;
      for (int k = 0; k < nz(); ++k)
        for (int i = 0; i < n; ++i) dotv += x[nv + pidx(k, i)] * v[i];
      dotv /= static_cast<double>(n) * nz();
      for (int k = 0; k < nz(); ++k)
        for (int i = 0; i < n; ++i) x[nv + pidx(k, i)] -= dotv * v[i];
    }
  }

  rep.iterations = g.iterations;
  rep.history = g.history;
  rep.residual = norm2(masked_residual(x)) / rep.reference;
  rep.converged = rep.residual <= rel_tol;
  std::copy(x.begin(), x.begin() + nv, w.begin());
  std::copy(x.begin() + nv, x.end(), lam.begin());
  return rep;
}

}  // namespace roughwall
