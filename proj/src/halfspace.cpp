#include "roughwall/halfspace.hpp"

#include <algorithm>
#include <cmath>

#include "roughwall/error.hpp"
#include "roughwall/fft.hpp"
#include "roughwall/util.hpp"

namespace roughwall {

namespace {

int wrap(int k, int n) { return ((k % n) + n) % n; }

// Slot of wavevector k in an r2c half spectrum, or -1 if the conjugate partner owns it.
int half_slot(int k1, int k2, int n1, int n2, int h1) {
  if (2 * std::abs(k1) > n1 || 2 * std::abs(k2) > n2) return -1;
  if (n2 == 1 && k2 != 0) return -1;
  const int m1 = wrap(k1, n1);
  if (m1 >= h1) return -1;
  return wrap(k2, n2) * h1 + m1;
}

}  // namespace

SpectralTrace::SpectralTrace(int k1max, int k2max, double len)
    : kmax1(k1max), kmax2(k2max), period(len),
      coeffs(static_cast<size_t>(2 * k1max + 1) * (2 * k2max + 1), CVec3{}) {}

bool SpectralTrace::hermitian(double tol) const {
  for (int k2 = -kmax2; k2 <= kmax2; ++k2)
    for (int k1 = -kmax1; k1 <= kmax1; ++k1)
      for (int c = 0; c < 3; ++c)
        if (std::abs(at(k1, k2)[c] - std::conj(at(-k1, -k2)[c])) > tol) return false;
  return true;
}

double SpectralTrace::l2_coeff_norm() const {
  double s = 0.0;
  for (const auto& v : coeffs)
    for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

SpectralTrace SpectralTrace::from_grid(const std::vector<double>& field, int n1, int n2, double len) {
  const int n = n1 * n2;
  if (field.size() != static_cast<size_t>(3 * n))
    throw Error(ErrorKind::ConfigError, "trace field size mismatch");
  Fft2 fft(n1, n2, len, len);
  SpectralTrace t(n1 > 1 ? n1 / 2 : 0, n2 > 1 ? n2 / 2 : 0, len);
  std::vector<cplx> spec(fft.spec_size());
  const double inv = 1.0 / n;
  for (int c = 0; c < 3; ++c) {
    fft.forward(field.data() + c * n, spec.data());
    for (int m2 = 0; m2 < n2; ++m2)
      for (int m1 = 0; m1 < fft.h1(); ++m1) {
        const cplx v = spec[m2 * fft.h1() + m1] * inv;
        const int k2 = fft.k2(m2);
        const bool ny1 = fft.nyquist1(m1), ny2 = fft.nyquist2(m2);
        const int k1s[2] = {m1, -m1};
        const int k2s[2] = {k2, -k2};
        const int c1 = ny1 ? 2 : 1, c2 = ny2 ? 2 : 1;
        const double share = 1.0 / (c1 * c2);
        for (int a = 0; a < c1; ++a)
          for (int b = 0; b < c2; ++b) {
            t.at(k1s[a], k2s[b])[c] = v * share;
            if (m1 != 0 && !ny1) t.at(-k1s[a], -k2s[b])[c] = std::conj(v) * share;
          }
      }
  }
  return t;
}

std::vector<double> SpectralTrace::to_grid(int n1, int n2) const {
  Fft2 fft(n1, n2, period, period);
  const int n = n1 * n2;
  std::vector<double> out(3 * n);
  for (int c = 0; c < 3; ++c) {
    std::vector<cplx> spec(fft.spec_size());
    for (int k2 = -kmax2; k2 <= kmax2; ++k2)
      for (int k1 = -kmax1; k1 <= kmax1; ++k1) {
        const int s = half_slot(k1, k2, n1, n2, fft.h1());
        if (s >= 0) spec[s] += at(k1, k2)[c] * static_cast<double>(n);
      }
    fft.inverse_destroy(spec.data(), out.data() + c * n);
  }
  return out;
}

KernelValue poisson_kernel_eval(const Vec3& y) {
  if (!(y[2] > 0.0)) throw Error(ErrorKind::DomainError, "kernel requires y3 > 0");
  const double rho2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  const double rho = std::sqrt(rho2);
  const double pre = 3.0 * y[2] / (2.0 * kPi * rho2 * rho2 * rho);
  KernelValue k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k.U[i][j] = pre * y[i] * y[j];
  k.P = -y[2] / (kPi * rho2 * rho);
  return k;
}

PoissonResult poisson_solve(const PlanarDatum& u0, const std::vector<Vec3>& points) {
  const int n1 = u0.n1, n2 = u0.n2;
  if (u0.values.size() != static_cast<size_t>(n1) * n2 || n1 < 3 || n2 < 3)
    throw Error(ErrorKind::ConfigError, "planar datum has inconsistent size");
  double vmax = 0.0, ring = 0.0;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const Vec3& v = u0.values[i + n1 * j];
      const double a = std::sqrt(norm2(v));
      vmax = std::max(vmax, a);
      if (i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1) ring = std::max(ring, a);
    }
  if (ring > 1e-12 * vmax)
    throw Error(ErrorKind::SupportError, "datum does not vanish on the grid boundary");
  for (const auto& p : points)
    if (p[2] < 2.0 * u0.h)
      throw Error(ErrorKind::QuadratureGuard,
                  "evaluation height " + fmt17(p[2]) + " below twice the grid spacing");

  PoissonResult res;
  res.u.assign(points.size(), Vec3{0, 0, 0});
  const double w = u0.h * u0.h;
  for (size_t q = 0; q < points.size(); ++q) {
    const Vec3& y = points[q];
    Vec3 acc{0, 0, 0};
    for (int j = 0; j < n2; ++j) {
      const double d2 = y[1] - (u0.y0 + j * u0.h);
      for (int i = 0; i < n1; ++i) {
        const Vec3& v = u0.values[i + n1 * j];
        if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) continue;
        const double d1 = y[0] - (u0.x0 + i * u0.h);
        const double rho2 = d1 * d1 + d2 * d2 + y[2] * y[2];
        const double pre = 3.0 * y[2] / (2.0 * kPi * rho2 * rho2 * std::sqrt(rho2));
        const double z[3] = {d1, d2, y[2]};
        const double zv = z[0] * v[0] + z[1] * v[1] + z[2] * v[2];
        for (int c = 0; c < 3; ++c) acc[c] += pre * z[c] * zv;
      }
    }
    for (int c = 0; c < 3; ++c) res.u[q][c] = w * acc[c];
  }
  res.error_estimate = u0.h * u0.h;
  return res;
}

DnSymbol dn_symbol(double xi1, double xi2) {
  const double a = std::hypot(xi1, xi2);
  if (a == 0.0) throw Error(ErrorKind::DomainError, "DN symbol is singular at xi = 0");
  const cplx I(0.0, 1.0);
  DnSymbol s;
  s.xi1 = xi1;
  s.xi2 = xi2;
  s.matrix = {{{a + xi1 * xi1 / a, xi1 * xi2 / a, I * xi1},
               {xi1 * xi2 / a, a + xi2 * xi2 / a, I * xi2},
               {-I * xi1, -I * xi2, 2.0 * a}}};
  s.singular_part = {{{0.0, 0.0, I * xi1}, {0.0, 0.0, I * xi2}, {-I * xi1, -I * xi2, 0.0}}};
  return s;
}

SpectralTrace dn_apply_periodic(const SpectralTrace& trace) {
  SpectralTrace out(trace.kmax1, trace.kmax2, trace.period);
  const double f = kTwoPi / trace.period;
  for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
    for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1) {
      if (k1 == 0 && k2 == 0) continue;
      const CMat3 M = dn_symbol(f * k1, f * k2).matrix;
      const CVec3& b = trace.at(k1, k2);
      CVec3& o = out.at(k1, k2);
      for (int i = 0; i < 3; ++i) o[i] = M[i][0] * b[0] + M[i][1] * b[1] + M[i][2] * b[2];
    }
  return out;
}

double dn_pairing(const SpectralTrace& trace) {
  const SpectralTrace d = dn_apply_periodic(trace);
  double s = 0.0;
  for (size_t i = 0; i < d.coeffs.size(); ++i)
    for (int c = 0; c < 3; ++c) s += (d.coeffs[i][c] * std::conj(trace.coeffs[i][c])).real();
  return s * trace.period * trace.period;
}

ModeValue halfspace_mode(double xi1, double xi2, const CVec3& b, double y3) {
  ModeValue m;
  const double a = std::hypot(xi1, xi2);
  if (a == 0.0) {
    m.v = b;
    m.dv3 = CVec3{};
    m.q = 0.0;
    m.dq3 = 0.0;
    return m;
  }
  const cplx I(0.0, 1.0);
  const cplx beta = b[2] - I * (xi1 * b[0] + xi2 * b[1]) / a;
  const double e = std::exp(-a * y3);
  const CVec3 dir{-I * xi1, -I * xi2, cplx(a)};
  for (int c = 0; c < 3; ++c) {
    m.v[c] = b[c] * e + dir[c] * beta * y3 * e;
    m.dv3[c] = -a * b[c] * e + dir[c] * beta * (1.0 - a * y3) * e;
  }
  m.q = 2.0 * a * beta * e;
  m.dq3 = -a * m.q;
  return m;
}

PointValue halfspace_point(const SpectralTrace& trace, double y1, double y2, double y3, double cutoff) {
  PointValue pv;
  const double f = kTwoPi / trace.period;
  double scale = 0.0;
  if (cutoff > 0.0)
    for (const auto& v : trace.coeffs)
      scale = std::max(scale, std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])));
  const cplx I(0.0, 1.0);
  for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
    for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1) {
      const CVec3& b = trace.at(k1, k2);
      const double xi1 = f * k1, xi2 = f * k2;
      if (cutoff > 0.0) {
        const double a = std::hypot(xi1, xi2);
        if (std::exp(-a * y3) * (1.0 + 2.0 * a * y3) * (1.0 + a) < cutoff * scale) continue;
      }
      if (b[0] == 0.0 && b[1] == 0.0 && b[2] == 0.0) continue;
      const ModeValue m = halfspace_mode(xi1, xi2, b, y3);
      const cplx e = std::polar(1.0, xi1 * y1 + xi2 * y2);
      for (int c = 0; c < 3; ++c) {
        const cplx ve = m.v[c] * e;
        pv.u[c] += ve.real();
        pv.grad[c][0] += (I * xi1 * ve).real();
        pv.grad[c][1] += (I * xi2 * ve).real();
        pv.grad[c][2] += (m.dv3[c] * e).real();
      }
      pv.p += (m.q * e).real();
    }
  return pv;
}

HalfspaceEval halfspace_fourier_eval(const SpectralTrace& trace, const std::vector<double>& heights, int n1,
                                     int n2, bool with_gradient) {
  HalfspaceEval out;
  out.heights = heights;
  const double f = kTwoPi / trace.period;
  for (double y : heights)
    if (y < 0.0) throw Error(ErrorKind::DomainError, "heights must be nonnegative");
  out.modes.resize(heights.size());
  for (size_t h = 0; h < heights.size(); ++h) {
    auto& row = out.modes[h];
    row.resize(trace.coeffs.size());
    for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
      for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1)
        row[(k2 + trace.kmax2) * trace.width() + (k1 + trace.kmax1)] =
            halfspace_mode(f * k1, f * k2, trace.at(k1, k2), heights[h]);
  }
  if (n1 <= 0 || n2 <= 0) return out;

  Fft2 fft(n1, n2, trace.period, trace.period);
  const int n = n1 * n2;
  const cplx I(0.0, 1.0);
  out.slices.resize(heights.size());
  const int nfields = with_gradient ? 13 : 4;
  for (size_t h = 0; h < heights.size(); ++h) {
    std::vector<std::vector<cplx>> spec(nfields, std::vector<cplx>(fft.spec_size()));
    for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
      for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1) {
        const int s = half_slot(k1, k2, n1, n2, fft.h1());
        if (s < 0) continue;
        const ModeValue& m = out.modes[h][(k2 + trace.kmax2) * trace.width() + (k1 + trace.kmax1)];
        const double sc = n;
        for (int c = 0; c < 3; ++c) spec[c][s] += sc * m.v[c];
        spec[3][s] += sc * m.q;
        if (with_gradient) {
          for (int c = 0; c < 3; ++c) {
            spec[4 + 3 * c][s] += sc * I * (f * k1) * m.v[c];
            spec[5 + 3 * c][s] += sc * I * (f * k2) * m.v[c];
            spec[6 + 3 * c][s] += sc * m.dv3[c];
          }
        }
      }
    std::vector<std::vector<double>> real(nfields, std::vector<double>(n));
    for (int q = 0; q < nfields; ++q) fft.inverse_destroy(spec[q].data(), real[q].data());
    HalfspaceSlice& sl = out.slices[h];
    sl.y3 = heights[h];
    sl.u1 = std::move(real[0]);
    sl.u2 = std::move(real[1]);
    sl.u3 = std::move(real[2]);
    sl.p = std::move(real[3]);
    if (with_gradient) {
      sl.grad2.assign(n, 0.0);
      for (int q = 4; q < 13; ++q)
        for (int i = 0; i < n; ++i) sl.grad2[i] += real[q][i] * real[q][i];
      sl.d3u1 = std::move(real[6]);
      sl.d3u2 = std::move(real[9]);
      sl.d3u3 = std::move(real[12]);
    }
  }
  return out;
}

double halfspace_deviation(const SpectralTrace& trace, double y3) {
  const double f = kTwoPi / trace.period;
  double s = 0.0;
  for (int k2 = -trace.kmax2; k2 <= trace.kmax2; ++k2)
    for (int k1 = -trace.kmax1; k1 <= trace.kmax1; ++k1) {
      if (k1 == 0 && k2 == 0) continue;
      const ModeValue m = halfspace_mode(f * k1, f * k2, trace.at(k1, k2), y3);
      for (int c = 0; c < 3; ++c) s += std::norm(m.v[c]);
    }
  return trace.period * std::sqrt(s);
}

}  // namespace roughwall
