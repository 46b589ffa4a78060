#include "roughwall/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "roughwall/error.hpp"
#include "roughwall/fft.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(int n) {
  if (n < 8 || !power_of_two(n))
    throw Error(ErrorKind::ConfigError, "grid size must be a power of two >= 8, got " + std::to_string(n));
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

BoundaryFunction BoundaryFunction::from_modes(const std::vector<FourierMode>& modes, int n) {
  check_grid(n);
  if (modes.empty()) throw Error(ErrorKind::ConfigError, "boundary has no Fourier modes");
  std::map<std::pair<int, int>, cplx> acc;
  for (const auto& m : modes) acc[{m.k2, m.k1}] += m.c;

  double scale = 0.0;
  for (const auto& [k, c] : acc) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * std::max(1.0, scale);
  int kmax = 0;
  for (const auto& [k, c] : acc) {
    auto it = acc.find({-k.first, -k.second});
    const cplx partner = it == acc.end() ? cplx(0.0) : it->second;
    if (std::abs(partner - std::conj(c)) > tol)
      throw Error(ErrorKind::ConjugacyViolation,
                  "coefficient at k=(" + std::to_string(k.second) + "," + std::to_string(k.first) +
                      ") is not the conjugate of its partner at -k");
    if (c != cplx(0.0)) kmax = std::max({kmax, std::abs(k.first), std::abs(k.second)});
  }
  if (n <= 2 * kmax)
    throw Error(ErrorKind::ConfigError, "grid " + std::to_string(n) + " cannot resolve |k| = " +
                                            std::to_string(kmax));

  BoundaryFunction b;
  b.n_ = n;
  b.kmax_ = kmax;
  for (const auto& [k, c] : acc)
    if (c != cplx(0.0)) {
      cplx cc = c;
      if (k.first == 0 && k.second == 0) cc = cplx(c.real(), 0.0);
      b.modes_.push_back({k.second, k.first, cc});
    }
  if (b.modes_.empty()) b.modes_.push_back({0, 0, cplx(0.0)});
  b.sample(n, n, &b.samples_);
  b.finish();
  return b;
}

BoundaryFunction BoundaryFunction::from_grid(const std::vector<double>& samples, int n) {
  check_grid(n);
  if (samples.size() != static_cast<size_t>(n) * n)
    throw Error(ErrorKind::ConfigError, "grid sample count does not match N*N");
  Fft2 fft(n, n);
  std::vector<cplx> spec(fft.spec_size());
  fft.forward(samples.data(), spec.data());
  const double inv = 1.0 / (static_cast<double>(n) * n);
  const int h = n / 2;

  // Expand the half spectrum to the full symmetric set, splitting Nyquist coefficients evenly
  // between +n/2 and -n/2 so that the mode list stays Hermitian.
  std::map<std::pair<int, int>, cplx> acc;
  for (int m2 = 0; m2 < n; ++m2)
    for (int m1 = 0; m1 <= h; ++m1) {
      cplx c = spec[m2 * fft.h1() + m1] * inv;
      int k1 = m1, k2 = m2 <= h ? m2 : m2 - n;
      std::vector<std::pair<int, int>> targets;
      std::vector<int> k1s = {k1};
      if (m1 == h) k1s = {h, -h};
      std::vector<int> k2s = {k2};
      if (m2 == h) k2s = {h, -h};
      const double share = 1.0 / (k1s.size() * k2s.size());
      for (int a : k1s)
        for (int b2 : k2s) {
          acc[{b2, a}] = c * share;
          if (m1 != 0 && m1 != h) acc[{-b2, -a}] = std::conj(c) * share;
        }
    }
  BoundaryFunction b;
  b.n_ = n;
  int kmax = 0;
  for (const auto& [k, c] : acc)
    if (c != cplx(0.0)) {
      b.modes_.push_back({k.second, k.first, k.first == 0 && k.second == 0 ? cplx(c.real(), 0.0) : c});
      kmax = std::max({kmax, std::abs(k.first), std::abs(k.second)});
    }
  if (b.modes_.empty()) b.modes_.push_back({0, 0, cplx(0.0)});
  b.kmax_ = kmax;
  b.samples_ = samples;
  b.finish();
  return b;
}

void BoundaryFunction::finish() {
  std::sort(modes_.begin(), modes_.end(), [](const FourierMode& a, const FourierMode& b) {
    return a.k2 != b.k2 ? a.k2 < b.k2 : a.k1 < b.k1;
  });
  auto [lo, hi] = std::minmax_element(samples_.begin(), samples_.end());
  min_ = *lo;
  max_ = *hi;
  if (min_ <= -1.0 + kRangeMargin || max_ >= -kRangeMargin)
    throw Error(ErrorKind::RangeViolation, "profile samples span [" + fmt17(min_) + ", " + fmt17(max_) +
                                               "], outside (-1, 0) with margin 1e-6");
  std::vector<double> g, g1, g2;
  sample(n_, n_, &g, &g1, &g2);
  lipschitz_ = 0.0;
  for (size_t i = 0; i < g1.size(); ++i) lipschitz_ = std::max(lipschitz_, std::hypot(g1[i], g2[i]));
}

cplx BoundaryFunction::coeff(int k1, int k2) const {
  for (const auto& m : modes_)
    if (m.k1 == k1 && m.k2 == k2) return m.c;
  return cplx(0.0);
}

bool BoundaryFunction::is_groove() const {
  for (const auto& m : modes_)
    if (m.k2 != 0) return false;
  return true;
}

double BoundaryFunction::eval(double y1, double y2) const {
  double s = 0.0;
  for (const auto& m : modes_) s += (m.c * std::polar(1.0, m.k1 * y1 + m.k2 * y2)).real();
  return s;
}

std::array<double, 2> BoundaryFunction::gradient(double y1, double y2) const {
  std::array<double, 2> d{0.0, 0.0};
  const cplx I(0.0, 1.0);
  for (const auto& m : modes_) {
    const cplx e = m.c * std::polar(1.0, m.k1 * y1 + m.k2 * y2);
    d[0] += (I * double(m.k1) * e).real();
    d[1] += (I * double(m.k2) * e).real();
  }
  return d;
}

void BoundaryFunction::sample(int n1, int n2, std::vector<double>* g, std::vector<double>* g1,
                              std::vector<double>* g2) const {
  Fft2 fft(n1, n2);
  const int hs = fft.h1();
  std::vector<cplx> s0(fft.spec_size()), s1(fft.spec_size()), s2(fft.spec_size());
  const double scale = static_cast<double>(n1) * n2;
  const cplx I(0.0, 1.0);
  for (const auto& m : modes_) {
    if (2 * std::abs(m.k1) > n1 || 2 * std::abs(m.k2) > n2) continue;
    if (n2 == 1 && m.k2 != 0) continue;
    const int m1 = wrap(m.k1, n1);
    if (m1 >= hs) continue;  // the conjugate partner fills this slot
    const int m2 = wrap(m.k2, n2);
    const int idx = m2 * hs + m1;
    // A split Nyquist pair lands on one slot and sums back to the grid coefficient.
    s0[idx] += scale * m.c;
    s1[idx] += scale * I * double(m.k1) * m.c;
    s2[idx] += scale * I * double(m.k2) * m.c;
  }
  const int n = n1 * n2;
  if (g) {
    g->assign(n, 0.0);
    fft.inverse_destroy(s0.data(), g->data());
  }
  if (g1) {
    g1->assign(n, 0.0);
    fft.inverse_destroy(s1.data(), g1->data());
  }
  if (g2) {
    g2->assign(n, 0.0);
    fft.inverse_destroy(s2.data(), g2->data());
  }
}

std::string BoundaryFunction::hash() const {
  std::string s;
  for (const auto& m : modes_)
    s += std::to_string(m.k1) + "," + std::to_string(m.k2) + "," + fmt17(m.c.real()) + "," +
         fmt17(m.c.imag()) + ";";
  s += "grid=" + std::to_string(n_);
  return hex64(fnv1a(s));
}

bool BumpyBox::contains(const BoundaryFunction& g, double x1, double x2, double x3) const {
  if (std::abs(x1) >= r || std::abs(x2) >= r) return false;
  const double b = epsilon * g.eval(x1 / epsilon, x2 / epsilon);
  return x3 > b && x3 < b + r;
}

TerrainMap terrain_map(const BoundaryFunction& gamma, MapKind kind, std::optional<double> epsilon) {
  TerrainMap t;
  t.kind = kind;
  t.gamma = gamma;
  t.n = gamma.grid();
  std::vector<double> g, g1, g2;
  gamma.sample(t.n, t.n, &g, &g1, &g2);
  if (kind == MapKind::ChannelShear) {
    if (!epsilon || !(*epsilon > 0.0 && *epsilon <= 1.0))
      throw Error(ErrorKind::DomainError, "channel_shear requires epsilon in (0, 1]");
    t.epsilon = *epsilon;
    t.bottom.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) t.bottom[i] = t.epsilon * g[i];
    t.slope1 = g1;  // d/dx_i [eps gamma(x'/eps)] = (d_i gamma)(x'/eps)
    t.slope2 = g2;
    t.depth.assign(g.size(), 1.0);
  } else {
    t.epsilon = 1.0;
    t.bottom = g;
    t.slope1 = g1;
    t.slope2 = g2;
    t.depth.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) t.depth[i] = -g[i];
  }
  t.min_depth = *std::min_element(t.depth.begin(), t.depth.end());
  if (t.min_depth < 1e-6)
    throw Error(ErrorKind::DegenerateMap, "layer depth " + fmt17(t.min_depth) + " below 1e-6");
  return t;
}

double TerrainMap::bottom_at(double x1, double x2) const {
  return epsilon * gamma.eval(x1 / epsilon, x2 / epsilon);
}

double TerrainMap::to_mapped(double x1, double x2, double x3) const {
  const double b = bottom_at(x1, x2);
  if (kind == MapKind::ChannelShear) return x3 - b;
  return (x3 - b) / (-b);
}

double TerrainMap::from_mapped(double x1, double x2, double s) const {
  const double b = bottom_at(x1, x2);
  if (kind == MapKind::ChannelShear) return s + b;
  return b + s * (-b);
}

double TerrainMap::jacobian(double x1, double x2) const {
  if (kind == MapKind::ChannelShear) return 1.0;
  return -bottom_at(x1, x2);
}

}  // namespace roughwall
