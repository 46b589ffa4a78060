#pragma once

#include <vector>

#include "roughwall/types.hpp"

namespace roughwall {

// Real 2D transform on an n1 x n2 periodic grid, y1 index fastest.
// Spectrum layout is [m2][m1] with m1 in [0, n1/2] (half spectrum along y1).
class Fft2 {
 public:
  Fft2(int n1, int n2, double len1 = kTwoPi, double len2 = kTwoPi);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int h1() const { return h1_; }
  int real_size() const { return n1_ * n2_; }
  int spec_size() const { return h1_ * n2_; }

  // Unnormalized: out_m = sum_x in(x) exp(-i k.x).
  void forward(const double* in, cplx* out) const;
  // Normalized inverse. `in` is preserved.
  void inverse(const cplx* in, double* out) const;
  // Normalized inverse that may overwrite `in`.
  void inverse_destroy(cplx* in, double* out) const;

  // Signed integer wavenumbers. The Nyquist index maps to +n/2.
  int k1(int m1) const { return m1; }
  int k2(int m2) const { return m2 <= n2_ / 2 ? m2 : m2 - n2_; }
  bool nyquist1(int m1) const { return n1_ % 2 == 0 && n1_ > 1 && m1 == n1_ / 2; }
  bool nyquist2(int m2) const { return n2_ % 2 == 0 && n2_ > 1 && m2 == n2_ / 2; }
  // Physical wavenumbers 2 pi k / len.
  double wave1(int m1) const { return kTwoPi * k1(m1) / len1_; }
  double wave2(int m2) const { return kTwoPi * k2(m2) / len2_; }
  // Derivative symbols (zero at Nyquist so the derivative stays real).
  double deriv1(int m1) const { return nyquist1(m1) ? 0.0 : wave1(m1); }
  double deriv2(int m2) const { return nyquist2(m2) ? 0.0 : wave2(m2); }

  // d/dy1 and d/dy2 of a real field.
  void gradient(const double* in, double* d1, double* d2) const;

 private:
  int n1_, n2_, h1_;
  double len1_, len2_;
  void* plan_fwd_;
  void* plan_bwd_;
};

}  // namespace roughwall
