#include <catch_amalgamated.hpp>

#include <cmath>

#include "roughwall/channel.hpp"
#include "roughwall/error.hpp"
#include "test_support.hpp"

using namespace roughwall;
using Catch::Approx;

namespace {

const ChannelResolution kGroove{96, 1, 64, 1.5};
const ChannelResolution kSmall3d{32, 32, 32, 1.5};

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, n = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += b[i] * b[i];
  }
  return std::sqrt(d / n);
}

}  // namespace

TEST_CASE("flat channel reproduces Couette flow", "[channel]") {
  const double eps = 0.125, g0 = -0.5;
  const std::array<double, 2> U{1.0, 0.5};
  auto sol = solve_channel(rwtest::flat(-g0), eps, 2, U, true, {16, 16, 16, 1.5});
  const auto& op = *sol.op;
  const auto& lg = op.grid();
  double err = 0.0;
  for (int k = 0; k <= op.nz(); ++k)
    for (int i = 0; i < op.ncol(); ++i) {
      const double x3 = lg.g[i] * (1.0 - lg.s[k]) + lg.s[k];
      const Vec3 ex = couette_velocity(eps, g0, U, x3);
      for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(sol.u[op.vidx(c, k, i)] - ex[c]));
    }
  CHECK(err < 1e-10);
  double pmax = 0.0;
  for (double p : sol.p) pmax = std::max(pmax, std::abs(p));
  CHECK(pmax < 1e-10);
  CHECK(sol.residuals.weak_residual < 1e-10);
  CHECK(weak_residual(sol, 4) < 1e-10);

  auto mid = evaluate(sol, {{0.3, 0.7, 0.5 * (eps * g0 + 1.0)}});
  CHECK(mid[0].u[0] == Approx(0.5 * U[0]).margin(1e-10));
  CHECK(mid[0].u[1] == Approx(0.5 * U[1]).margin(1e-10));
}

TEST_CASE("bumpy Stokes channel meets the residual contract", "[channel]") {
  const double tol = 1e-8;
  auto sol = solve_channel(rwtest::sinusoid(), 1.0 / 16, 2, {1.0, 0.0}, false, kGroove, {tol});
  CHECK(sol.residuals.weak_residual <= tol);
  CHECK(sol.residuals.divergence_residual <= tol);
  CHECK(sol.residuals.energy_mismatch <= tol);
  CHECK(sol.residuals.picard_iterations == 0);
  const auto& op = *sol.op;
  double slip = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < op.ncol(); ++i) slip = std::max(slip, std::abs(sol.u[op.vidx(c, 0, i)]));
  CHECK(slip == 0.0);
  for (int i = 0; i < op.ncol(); ++i) CHECK(sol.u[op.vidx(0, op.nz(), i)] == 1.0);
}

TEST_CASE("Navier-Stokes channel converges and stays close to Stokes", "[channel]") {
  const double tol = 1e-8;
  auto g = rwtest::sinusoid();
  auto st = solve_channel(g, 1.0 / 16, 2, {1.0, 0.0}, false, kGroove, {tol});
  auto ns = solve_channel(g, 1.0 / 16, 2, {1.0, 0.0}, true, kGroove, {tol});
  CHECK(ns.residuals.picard_iterations > 0);
  CHECK(ns.residuals.picard_iterations < 200);
  CHECK(ns.residuals.picard_history.size() == static_cast<size_t>(ns.residuals.picard_iterations));
  CHECK(ns.residuals.picard_history.back() <= tol);
  CHECK(ns.residuals.weak_residual <= tol);
  CHECK(ns.residuals.energy_mismatch <= tol);
  CHECK(rel_diff(ns.u, st.u) <= 0.2);

  // A doubled field is not a solution of the nonlinear problem.
  std::vector<double> twice = ns.u;
  for (double& x : twice) x *= 2.0;
  CHECK(weak_residual(ns, twice, ns.p) > 10.0 * tol);
  CHECK(weak_residual(ns, twice, ns.p, 6) > 10.0 * tol);
  CHECK(weak_residual(ns, twice, ns.p, 6) <= weak_residual(ns, twice, ns.p) * (1.0 + 1e-6));
}

TEST_CASE("nonlinear correction scales quadratically with the driving", "[channel]") {
  auto g = rwtest::sinusoid();
  const ChannelResolution res{64, 1, 48, 1.5};
  ChannelOptions opt;
  opt.tol = 1e-13;
  double d[3];
  const double drive[3] = {2.0, 1.0, 0.5};
  for (int t = 0; t < 3; ++t) {
    auto st = solve_channel(g, 0.25, 2, {drive[t], 0.0}, false, res, opt);
    auto ns = solve_channel(g, 0.25, 2, {drive[t], 0.0}, true, res, opt);
    double s = 0.0;
    for (size_t i = 0; i < st.u.size(); ++i) s += (ns.u[i] - st.u[i]) * (ns.u[i] - st.u[i]);
    d[t] = std::sqrt(s);
  }
  CHECK(d[0] / d[1] == Approx(4.0).epsilon(0.1));
  CHECK(d[1] / d[2] == Approx(4.0).epsilon(0.1));
}

TEST_CASE("evaluation interpolates nodes and respects symmetry", "[channel]") {
  auto sol = solve_channel(rwtest::sinusoid(), 1.0 / 8, 2, {1.0, 0.0}, true, kSmall3d);
  const auto& op = *sol.op;
  const auto& lg = op.grid();
  const double h1 = lg.len1 / lg.n1, h2 = lg.len2 / lg.n2;
  std::vector<Vec3> pts;
  std::vector<int> ks, is;
  for (int k : {0, 3, 17, op.nz()})
    for (int i : {0, 5, 77, op.ncol() - 1}) {
      const double x3 = lg.g[i] * (1.0 - lg.s[k]) + lg.s[k];
      pts.push_back({(i % lg.n1) * h1, (i / lg.n1) * h2, x3});
      ks.push_back(k);
      is.push_back(i);
    }
  auto smp = evaluate(sol, pts);
  for (size_t t = 0; t < pts.size(); ++t)
    for (int c = 0; c < 3; ++c) CHECK(smp[t].u[c] == Approx(sol.u[op.vidx(c, ks[t], is[t])]).margin(1e-12));

  double u2 = 0.0;
  for (int k = 0; k <= op.nz(); ++k)
    for (int i = 0; i < op.ncol(); ++i) u2 = std::max(u2, std::abs(sol.u[op.vidx(1, k, i)]));
  CHECK(u2 <= 1e-8);

  CHECK_THROWS_AS(evaluate(sol, {{0.1, 0.1, 1.5}}), Error);
  CHECK_THROWS_AS(evaluate(sol, {{0.0, 0.0, -0.2}}), Error);
}

TEST_CASE("channel reports Picard failure with its history", "[channel]") {
  ChannelOptions opt;
  opt.max_picard = 2;
  try {
    solve_channel(rwtest::sinusoid(), 0.25, 2, {4.0, 0.0}, true, {32, 1, 24, 1.5}, opt);
    FAIL("expected PicardDiverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PicardDiverged);
    CHECK(e.history().size() == 2);
  }
}

TEST_CASE("channel rejects invalid configurations", "[channel]") {
  auto g = rwtest::sinusoid();
  CHECK_THROWS_AS(solve_channel(g, 0.5, 2, {1, 0}, false, kGroove), Error);
  CHECK_THROWS_AS(solve_channel(g, 0.1, 1, {1, 0}, false, kGroove), Error);
  CHECK_THROWS_AS(solve_channel(g, 0.1, 2, {5, 0}, false, kGroove), Error);
  CHECK_THROWS_AS(solve_channel(g, 0.1, 2, {1, 0}, false, {91, 1, 32, 1.5}), Error);
  CHECK_THROWS_AS(solve_channel(rwtest::random_profile(1), 0.1, 2, {1, 0}, false, kGroove), Error);
}
