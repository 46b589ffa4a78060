#include <catch_amalgamated.hpp>

#include <cmath>

#include "roughwall/cell.hpp"
#include "roughwall/error.hpp"
#include "test_support.hpp"

using namespace roughwall;
using Catch::Approx;

namespace {

// Richardson extrapolation of the groove solves at 256x96 and 512x512, frozen.
constexpr double kSinusoidAlpha11 = 0.490074186;
constexpr double kSinusoidAlpha22 = 0.495012443;

const CellResolution kGroove{256, 1, 96};
const CellResolution kSmall{32, 32, 32};

BoundaryFunction cosine(double amp) {
  return BoundaryFunction::from_modes(
      {{0, 0, cplx(-0.5, 0.0)}, {1, 0, cplx(0.5 * amp, 0.0)}, {-1, 0, cplx(0.5 * amp, 0.0)}}, 64);
}

}  // namespace

TEST_CASE("flat wall gives the constant corrector", "[cell]") {
  for (int j : {1, 2}) {
    auto c = solve_corrector(rwtest::flat(0.5), j, {16, 16, 16});
    CHECK(c.alpha[j - 1] == Approx(0.5).margin(1e-10));
    CHECK(std::abs(c.alpha[2 - j]) < 1e-12);
    CHECK(std::abs(c.alpha[2]) < 1e-12);
    for (double x : c.q) CHECK(std::abs(x) < 1e-9);
    const int n = c.op->ncol();
    for (int k = 0; k <= c.op->nz(); ++k)
      for (int i = 0; i < n; ++i) CHECK(c.v[c.op->vidx(j - 1, k, i)] == Approx(0.5).margin(1e-9));
    auto e = energy_slip_identity(c);
    CHECK(e.alpha_from_energy == Approx(0.5).margin(1e-10));
    CHECK(e.mismatch < 1e-9);
    CHECK(decay_fit(c).degenerate);
  }
  auto m = slip_matrix(rwtest::flat(0.5), {16, 16, 16});
  CHECK(m.m[0][0] == Approx(0.5).margin(1e-10));
  CHECK(m.m[1][1] == Approx(0.5).margin(1e-10));
  CHECK(std::abs(m.m[0][1]) < 1e-12);
}

TEST_CASE("sinusoid corrector matches the frozen slip values", "[cell]") {
  auto g = rwtest::sinusoid();
  auto c1 = solve_corrector(g, 1, kGroove);
  auto c2 = solve_corrector(g, 2, kGroove);
  CHECK(c1.alpha[0] == Approx(kSinusoidAlpha11).margin(1e-7));
  CHECK(c2.alpha[1] == Approx(kSinusoidAlpha22).margin(1e-7));
  CHECK(std::abs(c1.alpha[1]) < 1e-10);
  CHECK(std::abs(c1.alpha[2]) < 1e-6);
  CHECK(c1.diagnostics.divergence_residual <= 1e-8);
  CHECK(c1.diagnostics.momentum_residual <= 1e-8);
  CHECK(c1.diagnostics.noslip_residual < 1e-14);
  auto m = slip_matrix(c1, c2);
  CHECK(std::abs(m.m[0][1]) < 1e-10);
  CHECK(m.eigenvalues[0] > 0.0);
}

TEST_CASE("groove fast path agrees with the full 3D solve", "[cell]") {
  auto g = rwtest::sinusoid();
  auto a = solve_corrector(g, 1, {32, 1, 32});
  auto b = solve_corrector(g, 1, kSmall);
  CHECK(a.alpha[0] == Approx(b.alpha[0]).margin(1e-10));
  CHECK_THROWS_AS(solve_corrector(rwtest::random_profile(1), 1, {32, 1, 32}), Error);
}

TEST_CASE("bottom data and top trace are consistent", "[cell]") {
  auto g = rwtest::random_profile(3);
  auto c = solve_corrector(g, 1, kSmall);
  const int n = c.op->ncol();
  const auto& lg = c.op->grid();
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    err = std::max(err, std::abs(c.v[c.op->vidx(0, 0, i)] + lg.g[i]));
    err = std::max(err, std::abs(c.v[c.op->vidx(1, 0, i)]));
    err = std::max(err, std::abs(c.v[c.op->vidx(2, 0, i)]));
  }
  CHECK(err < 1e-12);
  auto ext = extend_to_halfspace(c, {0.0});
  double terr = 0.0;
  for (int i = 0; i < n; ++i) {
    terr = std::max(terr, std::abs(ext.slices[0].u1[i] - c.v[c.op->vidx(0, c.op->nz(), i)]));
    terr = std::max(terr, std::abs(ext.slices[0].u3[i] - c.v[c.op->vidx(2, c.op->nz(), i)]));
  }
  CHECK(terr < 1e-10);
  CHECK(c.diagnostics.divergence_residual <= 1e-8);
}

TEST_CASE("energy identity holds on rough profiles", "[cell]") {
  auto e1 = energy_slip_identity(solve_corrector(rwtest::sinusoid(), 1, kGroove));
  CHECK(e1.mismatch < 1e-3);
  CHECK(e1.alpha_from_energy > 0.0);
  auto e2 = energy_slip_identity(solve_corrector(rwtest::random_profile(4), 2, kSmall));
  CHECK(e2.mismatch < 1e-3);
  CHECK(e2.alpha_from_energy > 0.0);
}

TEST_CASE("random profile slip matrix is symmetric positive definite", "[cell]") {
  auto m = slip_matrix(rwtest::random_profile(1), kSmall);
  const double norm = std::hypot(std::hypot(m.m[0][0], m.m[0][1]), std::hypot(m.m[1][0], m.m[1][1]));
  CHECK(m.asymmetry <= 1e-4 * norm);
  CHECK(m.eigenvalues[0] > 0.0);
  CHECK(m.eigenvalues[1] >= m.eigenvalues[0]);
  CHECK(std::abs(m.alpha1[2]) < 1e-6);
  CHECK(std::abs(m.alpha2[2]) < 1e-6);
}

TEST_CASE("slip vector is invariant under lattice shifts", "[cell]") {
  auto g = rwtest::random_profile(5, 32);
  // Shift by a quarter period in y1 and an eighth in y2: multiply modes by exp(-i k.s).
  std::vector<FourierMode> shifted;
  const double s1 = kTwoPi / 4.0, s2 = kTwoPi / 8.0;
  for (const auto& md : g.modes())
    shifted.push_back({md.k1, md.k2, md.c * std::exp(cplx(0.0, -(md.k1 * s1 + md.k2 * s2)))});
  auto h = BoundaryFunction::from_modes(shifted, 32);
  for (int j : {1, 2}) {
    auto a = solve_corrector(g, j, kSmall, 1e-10);
    auto b = solve_corrector(h, j, kSmall, 1e-10);
    for (int c = 0; c < 3; ++c) CHECK(a.alpha[c] == Approx(b.alpha[c]).margin(1e-8));
  }
}

TEST_CASE("slip values converge under refinement", "[cell]") {
  auto g = rwtest::sinusoid();
  const double a1 = solve_corrector(g, 1, {32, 1, 32}, 1e-11).alpha[0];
  const double a2 = solve_corrector(g, 1, {64, 1, 64}, 1e-11).alpha[0];
  const double a3 = solve_corrector(g, 1, {128, 1, 128}, 1e-11).alpha[0];
  const double d1 = std::abs(a2 - a1), d2 = std::abs(a3 - a2);
  CHECK(d2 * 2.0 <= d1);
  CHECK(std::abs(a3 - kSinusoidAlpha11) < 1e-7);
}

TEST_CASE("slip tends to the flat value as the amplitude vanishes", "[cell]") {
  double prev = 1.0;
  for (double amp : {0.2, 0.1, 0.05, 0.025}) {
    auto c = solve_corrector(cosine(amp), 1, {64, 1, 64});
    const double gap = std::abs(c.alpha[0] - 0.5);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("extension decays toward the slip vector", "[cell]") {
  auto c = solve_corrector(rwtest::sinusoid(), 1, kGroove);
  double prev = 1e300;
  for (double y : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double d = halfspace_deviation(c.trace, y);
    CHECK(d < prev);
    prev = d;
  }
  auto ext = extend_to_halfspace(c, {3.0});
  double mean = 0.0;
  for (double x : ext.slices[0].u1) mean += x;
  mean /= static_cast<double>(ext.slices[0].u1.size());
  CHECK(mean == Approx(c.alpha[0]).margin(1e-12));

  auto fit = decay_fit(c);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.fitted_rate >= 0.5);
  CHECK(fit.fitted_rate >= 0.8);
  CHECK(fit.fitted_rate <= 1.2);
  CHECK(fit.prefactor > 0.0);
  CHECK_THROWS_AS(decay_fit(c, 2.0), Error);
}

TEST_CASE("corrector rejects bad input", "[cell]") {
  auto g = rwtest::sinusoid();
  CHECK_THROWS_AS(solve_corrector(g, 3, kSmall), Error);
  CHECK_THROWS_AS(solve_corrector(g, 1, {8, 8, 8}), Error);
}
