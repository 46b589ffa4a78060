#include "roughwall/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

namespace roughwall {

namespace {

struct PlanPair {
  fftw_plan fwd;
  fftw_plan bwd;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the process lifetime; FFTW execution with new arrays is thread safe.
PlanPair plans_for(int n1, int n2) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_pair(n1, n2);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int h1 = n1 / 2 + 1;
  double* r = fftw_alloc_real(static_cast<size_t>(n1) * n2);
  fftw_complex* c = fftw_alloc_complex(static_cast<size_t>(h1) * n2);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_r2c_2d(n2, n1, r, c, flags), fftw_plan_dft_c2r_2d(n2, n1, c, r, flags)};
  fftw_free(r);
  fftw_free(c);
  cache.emplace(key, p);
  return p;
}

}  // namespace

Fft2::Fft2(int n1, int n2, double len1, double len2)
    : n1_(n1), n2_(n2), h1_(n1 / 2 + 1), len1_(len1), len2_(len2) {
  PlanPair p = plans_for(n1, n2);
  plan_fwd_ = p.fwd;
  plan_bwd_ = p.bwd;
}

void Fft2::forward(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Fft2::inverse_destroy(cplx* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(in), out);
  const double s = 1.0 / (static_cast<double>(n1_) * n2_);
  for (int i = 0; i < n1_ * n2_; ++i) out[i] *= s;
}

void Fft2::inverse(const cplx* in, double* out) const {
  std::vector<cplx> tmp(in, in + spec_size());
  inverse_destroy(tmp.data(), out);
}

void Fft2::gradient(const double* in, double* d1, double* d2) const {
  std::vector<cplx> s(spec_size()), t(spec_size());
  forward(in, s.data());
  const cplx I(0.0, 1.0);
  for (int m2 = 0; m2 < n2_; ++m2)
    for (int m1 = 0; m1 < h1_; ++m1) {
      const int idx = m2 * h1_ + m1;
      t[idx] = I * deriv1(m1) * s[idx];
      s[idx] = I * deriv2(m2) * s[idx];
    }
  inverse_destroy(t.data(), d1);
  inverse_destroy(s.data(), d2);
}

}  // namespace roughwall
