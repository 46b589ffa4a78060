#include "roughwall/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <Eigen/Dense>
#include <limits>

#include "roughwall/error.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

constexpr double kPanelWidth = 0.5;
constexpr int kPanelCount = 60;
constexpr double kDecayTop = kPanelWidth * kPanelCount;  // corrector treated as alpha above
constexpr double kPointCutoff = 1e-16;

struct Rule {
  std::vector<double> t, w;  // nodes on [0, 1], weights summing to 1
};

template <int N>
Rule gauss_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  Rule r;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool centre = a[i] == 0.0;
    r.t.push_back(0.5 - 0.5 * a[i]);
    r.w.push_back(0.5 * b[i]);
    if (!centre) {
      r.t.push_back(0.5 + 0.5 * a[i]);
      r.w.push_back(0.5 * b[i]);
    }
  }
  return r;
}

const Rule& rule2() {
  static const Rule r = gauss_rule<2>();
  return r;
}
const Rule& rule3() {
  static const Rule r = gauss_rule<3>();
  return r;
}
const Rule& rule8() {
  static const Rule r = gauss_rule<8>();
  return r;
}

// Length of (-a, a) covered by the periodic copies of each node's cell [x_i - h/2, x_i + h/2].
std::vector<double> overlap_weights(int n, double period, double a) {
  std::vector<double> w(n, 0.0);
  const double h = period / n;
  for (int i = 0; i < n; ++i) {
    const double lo = i * h - 0.5 * h, hi = lo + h;
    const long long m0 = static_cast<long long>(std::floor((-a - hi) / period));
    const long long m1 = static_cast<long long>(std::ceil((a - lo) / period));
    for (long long m = m0; m <= m1; ++m) {
      const double l = std::max(lo + m * period, -a), u = std::min(hi + m * period, a);
      if (u > l) w[i] += u - l;
    }
  }
  return w;
}

double sq(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

Vec3 axis(int j) {
  Vec3 e{0, 0, 0};
  e[j] = 1.0;
  return e;
}

// Corrector values resampled onto an m1 x m2 horizontal grid per period.
class CorrectorSampler {
 public:
  CorrectorSampler(const CorrectorSolution& c, int m1, int m2) : m1_(m1), m2_(m2), alpha_(c.alpha) {
    const LayerStokes& op = *c.op;
    const int n = op.ncol(), m = m1 * m2;
    c.boundary.sample(m1, m2, &gam_);
    s_ = op.grid().s;
    strip_.resize(s_.size());
    std::vector<double> lvl(3 * static_cast<size_t>(n));
    for (int k = 0; k <= op.nz(); ++k) {
      for (int cc = 0; cc < 3; ++cc)
        for (int i = 0; i < n; ++i) lvl[cc * n + i] = c.v[op.vidx(cc, k, i)];
      strip_[k] = SpectralTrace::from_grid(lvl, c.grid.n1, c.grid.n2, kTwoPi).to_grid(m1, m2);
    }
    for (double y = 0.0; y < 2.0 - 1e-12; y += 0.02) h_.push_back(y);
    for (double y = 2.0; y < 10.0 - 1e-12; y += 0.1) h_.push_back(y);
    for (double y = 10.0; y <= kDecayTop + 1e-12; y += 0.5) h_.push_back(y);
    hv_.resize(h_.size());
    hd_.resize(h_.size());
    const size_t chunk = 16;
    for (size_t h0 = 0; h0 < h_.size(); h0 += chunk) {
      std::vector<double> hs(h_.begin() + h0, h_.begin() + std::min(h_.size(), h0 + chunk));
      HalfspaceEval ev = halfspace_fourier_eval(c.trace, hs, m1, m2, true);
      for (size_t q = 0; q < hs.size(); ++q) {
        auto& sl = ev.slices[q];
        auto& v = hv_[h0 + q];
        auto& d = hd_[h0 + q];
        v.resize(3 * static_cast<size_t>(m));
        d.resize(3 * static_cast<size_t>(m));
        std::copy(sl.u1.begin(), sl.u1.end(), v.begin());
        std::copy(sl.u2.begin(), sl.u2.end(), v.begin() + m);
        std::copy(sl.u3.begin(), sl.u3.end(), v.begin() + 2 * m);
        std::copy(sl.d3u1.begin(), sl.d3u1.end(), d.begin());
        std::copy(sl.d3u2.begin(), sl.d3u2.end(), d.begin() + m);
        std::copy(sl.d3u3.begin(), sl.d3u3.end(), d.begin() + 2 * m);
      }
    }
  }

  Vec3 value(int col, double y3) const {
    const int m = m1_ * m2_;
    Vec3 out{0, 0, 0};
    if (y3 >= kDecayTop) return alpha_;
    if (y3 >= 0.0) {
      size_t a = std::upper_bound(h_.begin(), h_.end(), y3) - h_.begin();
      a = std::min(std::max<size_t>(a, 1), h_.size() - 1) - 1;
      const double h = h_[a + 1] - h_[a], t = (y3 - h_[a]) / h;
      const double t2 = t * t, t3 = t2 * t;
      const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
      for (int c = 0; c < 3; ++c) {
        const size_t id = static_cast<size_t>(c) * m + col;
        out[c] = h00 * hv_[a][id] + h10 * h * hd_[a][id] + h01 * hv_[a + 1][id] + h11 * h * hd_[a + 1][id];
      }
      return out;
    }
    const double g = gam_[col];
    const double s = std::clamp(1.0 - y3 / g, 0.0, 1.0);
    int k = static_cast<int>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin()) - 1;
    k = std::clamp(k, 0, static_cast<int>(s_.size()) - 2);
    const double xi = (s - s_[k]) / (s_[k + 1] - s_[k]);
    for (int c = 0; c < 3; ++c) {
      const size_t id = static_cast<size_t>(c) * m + col;
      out[c] = (1.0 - xi) * strip_[k][id] + xi * strip_[k + 1][id];
    }
    return out;
  }

 private:
  int m1_, m2_;
  Vec3 alpha_;
  std::vector<double> gam_, s_, h_;
  std::vector<std::vector<double>> strip_, hv_, hd_;
};

}  // namespace

// ---------------------------------------------------------------------------------------------
// ManufacturedField

struct ManufacturedField::Cache {
  int n1 = 0, n2 = 0;
  std::vector<double> d1, d2;  // horizontal derivatives of the selected corrector
  std::vector<double> heights, hweights;
  // Per corrector and panel height: values (3n) and for the selected one d3 (3n) and |grad|^2.
  std::array<std::vector<std::vector<double>>, 2> val;
  std::vector<std::vector<double>> d3, g2;
};

ManufacturedField::ManufacturedField(std::shared_ptr<const CorrectorSolution> c1,
                                     std::shared_ptr<const CorrectorSolution> c2, double epsilon, int j,
                                     double amplitude)
    : c_{std::move(c1), std::move(c2)}, eps_(epsilon), j_(j), amp_(amplitude) {
  if (j != 1 && j != 2) throw Error(ErrorKind::ConfigError, "manufactured field index j must be 1 or 2");
  if (!c_[j - 1]) throw Error(ErrorKind::ConfigError, "manufactured field needs the corrector it is built from");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  for (int q = 0; q < 2; ++q)
    if (c_[q] && c_[q]->j != q + 1) throw Error(ErrorKind::ConfigError, "corrector slots must hold j = 1 and j = 2");
  const CorrectorSolution& p = *c_[j - 1];
  if (c_[2 - j]) {
    const CorrectorSolution& o = *c_[2 - j];
    if (o.grid.n1 != p.grid.n1 || o.grid.n2 != p.grid.n2 || o.grid.nz != p.grid.nz ||
        o.op->grid().s != p.op->grid().s || o.boundary.hash() != p.boundary.hash())
      throw Error(ErrorKind::ConfigError, "corrector pair must share profile and grid");
  }
  cache_ = std::make_unique<Cache>();
  Cache& ch = *cache_;
  ch.n1 = p.grid.n1;
  ch.n2 = p.grid.n2;
  p.op->horizontal_derivatives(p.v.data(), ch.d1, ch.d2);
  const Rule& g8 = rule8();
  for (int pnl = 0; pnl < kPanelCount; ++pnl)
    for (size_t q = 0; q < g8.t.size(); ++q) {
      ch.heights.push_back(kPanelWidth * (pnl + g8.t[q]));
      ch.hweights.push_back(kPanelWidth * g8.w[q]);
    }
  const int n = ch.n1 * ch.n2;
  const size_t nh = ch.heights.size(), chunk = 16;
  for (int q = 0; q < 2; ++q) {
    if (!c_[q]) continue;
    const bool primary = q == j - 1;
    ch.val[q].resize(nh);
    if (primary) {
      ch.d3.resize(nh);
      ch.g2.resize(nh);
    }
    for (size_t h0 = 0; h0 < nh; h0 += chunk) {
      std::vector<double> hs(ch.heights.begin() + h0, ch.heights.begin() + std::min(nh, h0 + chunk));
      HalfspaceEval ev = halfspace_fourier_eval(c_[q]->trace, hs, ch.n1, ch.n2, primary);
      for (size_t t = 0; t < hs.size(); ++t) {
        auto& sl = ev.slices[t];
        auto& v = ch.val[q][h0 + t];
        v.resize(3 * static_cast<size_t>(n));
        std::copy(sl.u1.begin(), sl.u1.end(), v.begin());
        std::copy(sl.u2.begin(), sl.u2.end(), v.begin() + n);
        std::copy(sl.u3.begin(), sl.u3.end(), v.begin() + 2 * n);
        if (primary) {
          auto& d = ch.d3[h0 + t];
          d.resize(3 * static_cast<size_t>(n));
          std::copy(sl.d3u1.begin(), sl.d3u1.end(), d.begin());
          std::copy(sl.d3u2.begin(), sl.d3u2.end(), d.begin() + n);
          std::copy(sl.d3u3.begin(), sl.d3u3.end(), d.begin() + 2 * n);
          ch.g2[h0 + t] = std::move(sl.grad2);
        }
      }
    }
  }
}

ManufacturedField::~ManufacturedField() = default;

std::array<Vec3, 2> ManufacturedField::alphas() const {
  std::array<Vec3, 2> a{};
  for (int q = 0; q < 2; ++q)
    if (c_[q]) a[q] = c_[q]->alpha;
  return a;
}

double ManufacturedField::spacing() const { return eps_ * kTwoPi / cache_->n1; }

void ManufacturedField::visit(double r, const std::function<void(const BoxSample&)>& f) const {
  if (!(r > 0.0)) throw Error(ErrorKind::DegenerateBox, "box half-width must be positive");
  const Cache& ch = *cache_;
  const int pj = j_ - 1;
  const CorrectorSolution& P = *c_[pj];
  const LayerStokes& op = *P.op;
  const int n1 = ch.n1, n2 = ch.n2, n = n1 * n2, Z = op.nz();
  const auto& s = op.grid().s;
  const auto& gam = op.grid().g;
  const double R = r / eps_;
  const std::vector<double> w1 = overlap_weights(n1, kTwoPi, R);
  const std::vector<double> w2 = n2 == 1 ? std::vector<double>{2.0 * R} : overlap_weights(n2, kTwoPi, R);
  const double e3 = eps_ * eps_ * eps_;
  const Vec3 ej = axis(pj);
  const std::array<Vec3, 2> al = alphas();
  const Rule& g2r = rule2();
  const Rule& g3r = rule3();
  const Rule& g8r = rule8();

  // d3v = d v^(j) / d y3, gg = |grad_y v^(j)|^2.
  auto emit = [&](double weight, double y3, const Vec3& vp, const Vec3& d3v, double gg,
                  const std::array<Vec3, 2>& vv) {
    BoxSample b;
    b.weight = weight;
    b.x3 = eps_ * y3;
    for (int c = 0; c < 3; ++c) {
      b.u[c] = amp_ * (b.x3 * ej[c] + eps_ * vp[c]);
      b.d3u[c] = amp_ * (ej[c] + d3v[c]);
    }
    b.grad2 = amp_ * amp_ * (gg + 2.0 * d3v[pj] + 1.0);
    b.v = vv;
    b.vgrad2[pj] = gg;
    f(b);
  };
  auto norm_g = [](const Mat3& G) {
    double gg = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) gg += G[c][d] * G[c][d];
    return gg;
  };

  for (int i = 0; i < n; ++i) {
    const int i1 = i % n1, i2 = i / n1;
    const double cw = w1[i1] * w2[i2];
    if (cw <= 0.0) continue;
    const double g = gam[i], J = -g, T = g + R;
    const double a1 = op.slope1()[i], a2 = op.slope2()[i];
    const double sT = R / J;

    // Strip part, truncated at the box top when the box is shallower than the strip.
    for (int k = 0; k < Z; ++k) {
      if (s[k] >= sT) break;
      const double ds = s[k + 1] - s[k];
      const double sb = std::min(s[k + 1], sT);
      for (size_t q = 0; q < g2r.t.size(); ++q) {
        const double sv = s[k] + g2r.t[q] * (sb - s[k]);
        const double xi = (sv - s[k]) / ds, os = 1.0 - sv;
        std::array<Vec3, 2> vv{};
        Vec3 vp{0, 0, 0};
        Mat3 G{};
        for (int c = 0; c < 3; ++c) {
          const size_t lo = op.vidx(c, k, i), hi = op.vidx(c, k + 1, i);
          vp[c] = (1 - xi) * P.v[lo] + xi * P.v[hi];
          const double dv = (P.v[hi] - P.v[lo]) / ds;
          G[c][0] = (1 - xi) * ch.d1[lo] + xi * ch.d1[hi] - a1 * os * dv / J;
          G[c][1] = (1 - xi) * ch.d2[lo] + xi * ch.d2[hi] - a2 * os * dv / J;
          G[c][2] = dv / J;
        }
        vv[pj] = vp;
        if (c_[1 - pj]) {
          const CorrectorSolution& O = *c_[1 - pj];
          for (int c = 0; c < 3; ++c)
            vv[1 - pj][c] = (1 - xi) * O.v[op.vidx(c, k, i)] + xi * O.v[op.vidx(c, k + 1, i)];
        }
        emit(cw * e3 * J * (sb - s[k]) * g2r.w[q], g * os, vp, {G[0][2], G[1][2], G[2][2]}, norm_g(G), vv);
      }
    }
    if (T <= 0.0) continue;

    // Half-space part on fixed panels, the last one truncated per column.
    const double y1 = i1 * kTwoPi / n1, y2 = n2 == 1 ? 0.0 : i2 * kTwoPi / n2;
    for (int pnl = 0; pnl < kPanelCount; ++pnl) {
      const double a = kPanelWidth * pnl, b = a + kPanelWidth;
      if (a >= T) break;
      if (b <= T) {
        for (size_t q = 0; q < g8r.t.size(); ++q) {
          const size_t h = static_cast<size_t>(pnl) * g8r.t.size() + q;
          std::array<Vec3, 2> vv{};
          Vec3 d3v{0, 0, 0};
          for (int o = 0; o < 2; ++o)
            if (c_[o])
              for (int c = 0; c < 3; ++c) vv[o][c] = ch.val[o][h][static_cast<size_t>(c) * n + i];
          for (int c = 0; c < 3; ++c) d3v[c] = ch.d3[h][static_cast<size_t>(c) * n + i];
          emit(cw * e3 * ch.hweights[h], ch.heights[h], vv[pj], d3v, ch.g2[h][i], vv);
        }
      } else {
        for (size_t q = 0; q < g8r.t.size(); ++q) {
          const double y3 = a + g8r.t[q] * (T - a);
          std::array<Vec3, 2> vv{};
          Mat3 G{};
          for (int o = 0; o < 2; ++o) {
            if (!c_[o]) continue;
            const PointValue pv = halfspace_point(c_[o]->trace, y1, y2, y3, kPointCutoff);
            vv[o] = pv.u;
            if (o == pj)
              for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) G[c][d] = pv.grad[c][d];
          }
          emit(cw * e3 * (T - a) * g8r.w[q], y3, vv[pj], {G[0][2], G[1][2], G[2][2]}, norm_g(G), vv);
        }
      }
    }
    if (T > kDecayTop) {
      for (size_t q = 0; q < g3r.t.size(); ++q) {
        const double y3 = kDecayTop + g3r.t[q] * (T - kDecayTop);
        emit(cw * e3 * (T - kDecayTop) * g3r.w[q], y3, al[pj], Vec3{0, 0, 0}, 0.0, al);
      }
    }
  }
}

// ---------------------------------------------------------------------------------------------
// ChannelBoxField

struct ChannelBoxField::Cache {
  std::vector<double> d1, d2;
  int m1 = 0, m2 = 0;
  std::array<std::unique_ptr<CorrectorSampler>, 2> samplers;
};

ChannelBoxField::ChannelBoxField(std::shared_ptr<const ChannelSolution> sol, std::shared_ptr<const CorrectorSolution> c1,
                                 std::shared_ptr<const CorrectorSolution> c2)
    : sol_(std::move(sol)), c_{std::move(c1), std::move(c2)} {
  if (!sol_ || !sol_->op) throw Error(ErrorKind::ConfigError, "channel field needs a solved channel");
  cache_ = std::make_unique<Cache>();
  const LayerGrid& lg = sol_->op->grid();
  sol_->op->horizontal_derivatives(sol_->u.data(), cache_->d1, cache_->d2);
  cache_->m1 = lg.n1 / sol_->nper;
  cache_->m2 = lg.n2 == 1 ? 1 : lg.n2 / sol_->nper;
  for (int q = 0; q < 2; ++q) {
    if (!c_[q]) continue;
    if (c_[q]->j != q + 1) throw Error(ErrorKind::ConfigError, "corrector slots must hold j = 1 and j = 2");
    if (c_[q]->boundary.hash() != sol_->boundary.hash())
      throw Error(ErrorKind::ConfigError, "correctors and channel must share the wall profile");
    cache_->samplers[q] = std::make_unique<CorrectorSampler>(*c_[q], cache_->m1, cache_->m2);
  }
}

ChannelBoxField::~ChannelBoxField() = default;

double ChannelBoxField::epsilon() const { return sol_->epsilon; }

std::array<Vec3, 2> ChannelBoxField::alphas() const {
  std::array<Vec3, 2> a{};
  for (int q = 0; q < 2; ++q)
    if (c_[q]) a[q] = c_[q]->alpha;
  return a;
}

double ChannelBoxField::spacing() const { return sol_->op->grid().len1 / sol_->op->grid().n1; }

void ChannelBoxField::visit(double r, const std::function<void(const BoxSample&)>& f) const {
  if (!(r > 0.0)) throw Error(ErrorKind::DegenerateBox, "box half-width must be positive");
  const LayerStokes& op = *sol_->op;
  const LayerGrid& lg = op.grid();
  const Cache& ch = *cache_;
  const int n1 = lg.n1, n2 = lg.n2, n = n1 * n2, Z = op.nz();
  const auto& s = lg.s;
  const std::vector<double> w1 = overlap_weights(n1, lg.len1, r);
  const std::vector<double> w2 = n2 == 1 ? std::vector<double>{2.0 * r} : overlap_weights(n2, lg.len2, r);
  const double eps = sol_->epsilon;
  const Rule& g2r = rule2();
  for (int i = 0; i < n; ++i) {
    const int i1 = i % n1, i2 = i / n1;
    const double cw = w1[i1] * w2[i2];
    if (cw <= 0.0) continue;
    const double g = lg.g[i], J = op.depth()[i];
    const double a1 = op.slope1()[i], a2 = op.slope2()[i];
    const double sT = r / J;
    if (sT > 1.0 + 1e-12)
      throw Error(ErrorKind::OutOfDomain, "box of half-width " + fmt17(r) + " reaches above the channel");
    const int col = (i1 % ch.m1) + ch.m1 * (i2 % ch.m2);
    for (int k = 0; k < Z; ++k) {
      if (s[k] >= sT) break;
      const double ds = s[k + 1] - s[k];
      const double sb = std::min(s[k + 1], sT);
      for (size_t q = 0; q < g2r.t.size(); ++q) {
        const double sv = s[k] + g2r.t[q] * (sb - s[k]);
        const double xi = (sv - s[k]) / ds, os = 1.0 - sv;
        BoxSample b;
        b.weight = cw * J * (sb - s[k]) * g2r.w[q];
        b.x3 = g * os + lg.z_top * sv;
        double gg = 0.0;
        for (int c = 0; c < 3; ++c) {
          const size_t lo = op.vidx(c, k, i), hi = op.vidx(c, k + 1, i);
          b.u[c] = (1 - xi) * sol_->u[lo] + xi * sol_->u[hi];
          const double dv = (sol_->u[hi] - sol_->u[lo]) / ds;
          const double G0 = (1 - xi) * ch.d1[lo] + xi * ch.d1[hi] - a1 * os * dv / J;
          const double G1 = (1 - xi) * ch.d2[lo] + xi * ch.d2[hi] - a2 * os * dv / J;
          const double G2 = dv / J;
          b.d3u[c] = G2;
          gg += G0 * G0 + G1 * G1 + G2 * G2;
        }
        b.grad2 = gg;
        for (int o = 0; o < 2; ++o)
          if (ch.samplers[o]) b.v[o] = ch.samplers[o]->value(col, b.x3 / eps);
        f(b);
      }
    }
  }
}

// ---------------------------------------------------------------------------------------------
// AnalyticField

AnalyticField::AnalyticField(BoundaryFunction gamma, double epsilon, Value u, Gradient grad, int ncell, int nvert)
    : gamma_(std::move(gamma)), eps_(epsilon), u_(std::move(u)), grad_(std::move(grad)), ncell_(ncell),
      nvert_(nvert) {
  if (ncell < 1 || nvert < 1 || nvert > 8) throw Error(ErrorKind::ConfigError, "analytic field quadrature sizes");
}

void AnalyticField::visit(double r, const std::function<void(const BoxSample&)>& f) const {
  if (!(r > 0.0)) throw Error(ErrorKind::DegenerateBox, "box half-width must be positive");
  const double h = 2.0 * r / ncell_;
  Rule rule;
  switch (nvert_) {
    case 1: rule = gauss_rule<1>(); break;
    case 2: rule = gauss_rule<2>(); break;
    case 3: rule = gauss_rule<3>(); break;
    case 4: rule = gauss_rule<4>(); break;
    case 5: rule = gauss_rule<5>(); break;
    case 6: rule = gauss_rule<6>(); break;
    case 7: rule = gauss_rule<7>(); break;
    default: rule = gauss_rule<8>(); break;
  }
  for (int b2 = 0; b2 < ncell_; ++b2)
    for (int b1 = 0; b1 < ncell_; ++b1) {
      const double x1 = -r + (b1 + 0.5) * h, x2 = -r + (b2 + 0.5) * h;
      const double g = eps_ * gamma_.eval(x1 / eps_, x2 / eps_);
      for (size_t q = 0; q < rule.t.size(); ++q) {
        const Vec3 x{x1, x2, g + rule.t[q] * r};
        BoxSample b;
        b.weight = h * h * r * rule.w[q];
        b.x3 = x[2];
        b.u = u_(x);
        if (grad_) {
          const Mat3 G = grad_(x);
          for (int c = 0; c < 3; ++c) {
            b.d3u[c] = G[c][2];
            for (int d = 0; d < 3; ++d) b.grad2 += G[c][d] * G[c][d];
          }
        }
        f(b);
      }
    }
}

// ---------------------------------------------------------------------------------------------
// Box statistics

double box_average_l2(const BoxField& field, double r) {
  double vol = 0.0, uu = 0.0;
  field.visit(r, [&](const BoxSample& b) {
    vol += b.weight;
    uu += b.weight * sq(b.u);
  });
  if (!(vol > 0.0)) throw Error(ErrorKind::DegenerateBox, "box has no quadrature volume");
  return std::sqrt(uu / vol);
}

namespace {

struct FirstPass {
  double vol = 0.0, uu = 0.0;
  std::array<double, 2> d3{};
  SlipFit fit;
};

Vec3 span_member(int span, int j, const BoxSample& b, double eps, const std::array<Vec3, 2>& alpha) {
  Vec3 p = axis(j);
  for (int c = 0; c < 3; ++c) p[c] *= b.x3;
  if (span == 1)
    for (int c = 0; c < 3; ++c) p[c] += eps * b.v[j][c];
  if (span == 2)
    for (int c = 0; c < 3; ++c) p[c] += eps * alpha[j][c];
  return p;
}

FirstPass first_pass(const BoxField& field, double r) {
  FirstPass fp;
  const bool corr = field.has_correctors();
  const double eps = field.epsilon();
  const auto alpha = field.alphas();
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  field.visit(r, [&](const BoxSample& b) {
    fp.vol += b.weight;
    fp.uu += b.weight * sq(b.u);
    fp.d3[0] += b.weight * b.d3u[0];
    fp.d3[1] += b.weight * b.d3u[1];
    const Vec3 p0 = span_member(corr ? 1 : 0, 0, b, eps, alpha);
    const Vec3 p1 = span_member(corr ? 1 : 0, 1, b, eps, alpha);
    G(0, 0) += b.weight * dot(p0, p0);
    G(0, 1) += b.weight * dot(p0, p1);
    G(1, 1) += b.weight * dot(p1, p1);
    rhs(0) += b.weight * dot(b.u, p0);
    rhs(1) += b.weight * dot(b.u, p1);
  });
  if (!(fp.vol > 0.0)) throw Error(ErrorKind::DegenerateBox, "box has no quadrature volume");
  G(1, 0) = G(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
  const double lmax = es.eigenvalues().maxCoeff(), lmin = es.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax)
    throw Error(ErrorKind::SingularFit, "Gram matrix of the fit span is numerically singular at r = " + fmt17(r));
  const Eigen::Vector2d c = G.ldlt().solve(rhs);
  fp.fit.c_lsq = {c(0), c(1)};
  fp.fit.c_grad = {fp.d3[0] / fp.vol, fp.d3[1] / fp.vol};
  return fp;
}

}  // namespace

SlipFit fit_slip_coefficients(const BoxField& field, double r) { return first_pass(field, r).fit; }

ScaleReport scale_scan(const BoxField& field, const std::vector<double>& r_values) {
  if (r_values.empty()) throw Error(ErrorKind::ConfigError, "scale scan needs at least one r");
  for (size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0 && r_values[i] <= 1.0)) throw Error(ErrorKind::ConfigError, "r values must lie in (0, 1]");
    if (i > 0 && !(r_values[i] < r_values[i - 1])) throw Error(ErrorKind::ConfigError, "r values must decrease");
  }
  ScaleReport rep;
  rep.epsilon = field.epsilon();
  const bool corr = field.has_correctors();
  const auto alpha = field.alphas();
  const double eps = field.epsilon();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double r : r_values) {
    const FirstPass fp = first_pass(field, r);
    ScaleRow row;
    row.r = r;
    row.small_scale = r < eps;
    row.volume = fp.vol;
    row.avg_l2 = std::sqrt(fp.uu / fp.vol);
    row.lipschitz_ratio = row.avg_l2 / r;
    row.c_grad = fp.fit.c_grad;
    row.c_lsq = fp.fit.c_lsq;
    // res[set][span], set 0 = c_lsq, 1 = c_grad; span 0 plain, 1 corrector, 2 navier.
    double acc[2][3] = {{0, 0, 0}, {0, 0, 0}};
    const std::array<double, 2> cs[2] = {row.c_lsq, row.c_grad};
    field.visit(r, [&](const BoxSample& b) {
      for (int span = 0; span < 3; ++span) {
        if (span > 0 && !corr) continue;
        const Vec3 p0 = span_member(span, 0, b, eps, alpha);
        const Vec3 p1 = span_member(span, 1, b, eps, alpha);
        for (int set = 0; set < 2; ++set) {
          Vec3 d;
          for (int c = 0; c < 3; ++c) d[c] = b.u[c] - cs[set][0] * p0[c] - cs[set][1] * p1[c];
          acc[set][span] += b.weight * sq(d);
        }
      }
    });
    auto res = [&](int set, int span) { return (span > 0 && !corr) ? nan : std::sqrt(acc[set][span] / fp.vol); };
    row.res_plain = res(0, 0);
    row.res_corrector = res(0, 1);
    row.res_navier = res(0, 2);
    row.res_plain_grad = res(1, 0);
    row.res_corrector_grad = res(1, 1);
    row.res_navier_grad = res(1, 2);
    rep.rows.push_back(row);
  }
  if (rep.rows.size() >= 3) {
    for (const char* col : {"avg_l2", "lipschitz_ratio", "res_plain", "res_corrector", "res_navier", "res_plain_grad",
                            "res_corrector_grad", "res_navier_grad", "improvement"}) {
      bool ok = true;
      for (const auto& row : rep.rows) {
        const double v = column_value(row, col);
        if (!(v > 0.0) || !std::isfinite(v)) ok = false;
      }
      if (ok) rep.slopes[col] = rate_fit(rep, col);
    }
  }
  return rep;
}

double column_value(const ScaleRow& row, const std::string& column) {
  if (column == "avg_l2") return row.avg_l2;
  if (column == "lipschitz_ratio") return row.lipschitz_ratio;
  if (column == "res_plain") return row.res_plain;
  if (column == "res_corrector") return row.res_corrector;
  if (column == "res_navier") return row.res_navier;
  if (column == "res_plain_grad") return row.res_plain_grad;
  if (column == "res_corrector_grad") return row.res_corrector_grad;
  if (column == "res_navier_grad") return row.res_navier_grad;
  if (column == "improvement") return row.res_navier / row.res_plain;
  throw Error(ErrorKind::ConfigError, "unknown report column '" + column + "'");
}

RateFit rate_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::ConfigError, "rate fit needs paired data");
  if (x.size() < 3) throw Error(ErrorKind::ConfigError, "rate fit needs at least three points");
  for (size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::NonPositiveData, "log-log fit needs positive data");
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::SingularFit, "rate fit abscissae are all equal");
  RateFit f;
  f.points = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
    ssr += e * e;
  }
  const double dof = static_cast<double>(n) - 2.0;
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(dist, 0.975);
  f.half_width = t * std::sqrt(ssr / dof / sxx);
  return f;
}

RateFit rate_fit(const ScaleReport& report, const std::string& column) {
  std::vector<double> x, y;
  for (const auto& row : report.rows) {
    x.push_back(row.r);
    y.push_back(column_value(row, column));
  }
  return rate_fit(x, y);
}

RateFit rate_fit_epsilon(const std::vector<ScaleReport>& reports, const std::string& column, double r) {
  std::vector<double> x, y;
  for (const auto& rep : reports) {
    bool found = false;
    for (const auto& row : rep.rows)
      if (std::abs(row.r - r) <= 1e-12 * r) {
        x.push_back(rep.epsilon);
        y.push_back(column_value(row, column));
        found = true;
        break;
      }
    if (!found) throw Error(ErrorKind::ConfigError, "report at epsilon " + fmt17(rep.epsilon) + " lacks r = " + fmt17(r));
  }
  return rate_fit(x, y);
}

// ---------------------------------------------------------------------------------------------
// Corrector scalings

ScalingCheck corrector_scaling_check(std::shared_ptr<const CorrectorSolution> c, const std::vector<double>& epsilons,
                                     double r, const std::vector<int>& moments) {
  if (!c) throw Error(ErrorKind::ConfigError, "scaling check needs a corrector");
  for (double e : epsilons)
    if (!(e > 0.0 && e <= r)) throw Error(ErrorKind::ConfigError, "epsilon values must lie in (0, r]");
  ScalingCheck sc;
  sc.r = r;
  sc.epsilons = epsilons;
  sc.moments = moments;
  sc.moment_integral.assign(moments.size(), std::vector<double>(epsilons.size(), 0.0));
  const int pj = c->j - 1;
  std::shared_ptr<const CorrectorSolution> c1 = pj == 0 ? c : nullptr, c2 = pj == 1 ? c : nullptr;
  for (size_t e = 0; e < epsilons.size(); ++e) {
    ManufacturedField mf(c1, c2, epsilons[e], c->j);
    double gi = 0.0;
    std::vector<double> mi(moments.size(), 0.0);
    mf.visit(r, [&](const BoxSample& b) {
      gi += b.weight * b.vgrad2[pj];
      const double a = std::sqrt(sq(b.v[pj]));
      for (size_t m = 0; m < moments.size(); ++m) mi[m] += b.weight * std::pow(a, 2 + moments[m]);
    });
    sc.grad_integral.push_back(gi);
    for (size_t m = 0; m < moments.size(); ++m) sc.moment_integral[m][e] = mi[m];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto exponent = [&](const std::vector<double>& y) {
    for (double v : y)
      if (!(v > 0.0)) return nan;
    return rate_fit(epsilons, y).slope;
  };
  sc.grad_exponent = epsilons.size() >= 3 ? exponent(sc.grad_integral) : nan;
  for (size_t m = 0; m < moments.size(); ++m)
    sc.moment_exponents.push_back(epsilons.size() >= 3 ? exponent(sc.moment_integral[m]) : nan);
  return sc;
}

// ---------------------------------------------------------------------------------------------
// Navier polynomials

Vec3 NavierPolynomial::operator()(const Vec3& x) const {
  Vec3 p{0, 0, 0};
  for (int c = 0; c < 3; ++c) p[c] = epsilon * alpha[c];
  p[j - 1] += x[2];
  return p;
}

Mat3 NavierPolynomial::gradient() const {
  Mat3 g{};
  g[j - 1][2] = 1.0;
  return g;
}

Vec3 NavierPolynomial::momentum_residual(const Vec3& x) const {
  // Laplacian vanishes; advection is P3 d3 P.
  const Vec3 p = (*this)(x);
  Vec3 r{0, 0, 0};
  r[j - 1] = p[2];
  return r;
}

double NavierPolynomial::divergence(const Vec3&) const { return 0.0; }

std::array<double, 2> NavierPolynomial::navier_slip_residual(const std::array<std::array<double, 2>, 2>& m) const {
  const Vec3 p0 = (*this)(Vec3{0, 0, 0});
  std::array<double, 2> r{};
  for (int i = 0; i < 2; ++i) r[i] = p0[i] - epsilon * m[i][j - 1];
  return r;
}

NavierPolynomial navier_polynomial_field(int j, double epsilon, const Vec3& alpha) {
  if (j != 1 && j != 2) throw Error(ErrorKind::ConfigError, "Navier polynomial index j must be 1 or 2");
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be nonnegative");
  NavierPolynomial p;
  p.j = j;
  p.epsilon = epsilon;
  p.alpha = alpha;
  return p;
}

// ---------------------------------------------------------------------------------------------
// Caccioppoli

CaccioppoliResult caccioppoli_ratio(const BoxField& field, double rho, double r) {
  if (!(rho > 0.0 && rho < r && r <= 1.0)) throw Error(ErrorKind::ConfigError, "need 0 < rho < r <= 1");
  if (r - rho < 2.0 * field.spacing())
    throw Error(ErrorKind::DegenerateBox, "r - rho is below two grid cells");
  CaccioppoliResult out;
  field.visit(rho, [&](const BoxSample& b) { out.lhs += b.weight * b.grad2; });
  double uu = 0.0;
  field.visit(r, [&](const BoxSample& b) { uu += b.weight * sq(b.u); });
  const double d = r - rho;
  out.rhs_terms = {uu / (d * d), uu * uu * uu / (d * d * d * d)};
  const double sum = out.rhs_terms[0] + out.rhs_terms[1];
  out.implied_K = sum > 0.0 ? out.lhs / sum : 0.0;
  return out;
}

}  // namespace roughwall
