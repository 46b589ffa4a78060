#include <catch_amalgamated.hpp>

#include <cmath>

#include "roughwall/analysis.hpp"
#include "roughwall/error.hpp"
#include "test_support.hpp"

using namespace roughwall;
using Catch::Approx;

namespace {

const CellResolution kGroove{256, 1, 96};

struct GroovePair {
  std::shared_ptr<const CorrectorSolution> c1, c2;
};

const GroovePair& sinusoid_pair() {
  static const GroovePair p{
      std::make_shared<const CorrectorSolution>(solve_corrector(rwtest::sinusoid(), 1, kGroove)),
      std::make_shared<const CorrectorSolution>(solve_corrector(rwtest::sinusoid(), 2, kGroove))};
  return p;
}

GroovePair flat_pair(double c) {
  return {std::make_shared<const CorrectorSolution>(solve_corrector(rwtest::flat(c), 1, {16, 1, 16})),
          std::make_shared<const CorrectorSolution>(solve_corrector(rwtest::flat(c), 2, {16, 1, 16}))};
}

double volume(const BoxField& f, double r) {
  double v = 0.0;
  f.visit(r, [&](const BoxSample& b) { v += b.weight; });
  return v;
}

}  // namespace

TEST_CASE("box quadrature has the exact graph-shifted volume", "[analysis]") {
  const auto& p = sinusoid_pair();
  ManufacturedField mf(p.c1, p.c2, 1.0 / 32);
  for (double r : {0.5, 0.3, 0.1, 0.02}) CHECK(volume(mf, r) == Approx(4.0 * r * r * r).epsilon(1e-12));
  auto ch = std::make_shared<const ChannelSolution>(
      solve_channel(rwtest::sinusoid(), 1.0 / 8, 2, {1.0, 0.0}, false, {32, 32, 24, 1.5}));
  ChannelBoxField cf(ch);
  for (double r : {0.5, 0.37, 0.1}) CHECK(volume(cf, r) == Approx(4.0 * r * r * r).epsilon(1e-12));
}

TEST_CASE("box averages of closed-form fields", "[analysis]") {
  const double eps = 1.0 / 16;
  AnalyticField cst(rwtest::flat(0.5), eps, [](const Vec3&) { return Vec3{1.0, -2.0, 2.0}; }, nullptr, 4, 2);
  CHECK(box_average_l2(cst, 0.25) == Approx(3.0).epsilon(1e-14));

  // Shear measured from a flat wall at -eps/2: mean of z^2 over (0, r) is r^2 / 3.
  const double b = -0.5 * eps;
  AnalyticField shear(rwtest::flat(0.5), eps, [b](const Vec3& x) { return Vec3{x[2] - b, 0.0, 0.0}; }, nullptr, 4, 2);
  for (double r : {0.5, 0.25, 0.1}) CHECK(box_average_l2(shear, r) == Approx(r / std::sqrt(3.0)).epsilon(1e-13));

  auto x3 = [](const Vec3& x) { return Vec3{x[2], 0.0, 0.0}; };
  AnalyticField coarse(rwtest::sinusoid(), eps, x3, nullptr, 256, 2);
  AnalyticField fine(rwtest::sinusoid(), eps, x3, nullptr, 1024, 2);
  CHECK(std::abs(box_average_l2(coarse, 0.25) - box_average_l2(fine, 0.25)) < 1e-6);
}

TEST_CASE("slip coefficients of a manufactured field", "[analysis]") {
  const auto& p = sinusoid_pair();
  ManufacturedField mf(p.c1, p.c2, 1.0 / 32, 1, 1.7);
  auto fit = fit_slip_coefficients(mf, 0.25);
  CHECK(fit.c_lsq[0] == Approx(1.7).epsilon(1e-10));
  CHECK(std::abs(fit.c_lsq[1]) < 1e-10);
  ManufacturedField small(p.c1, p.c2, 1.0 / 128, 1, 1.7);
  auto fs = fit_slip_coefficients(small, 0.5);
  CHECK(fs.c_grad[0] == Approx(1.7).epsilon(5e-3));
  CHECK(std::abs(fs.c_grad[1]) < 1e-12);

  ManufacturedField m2(p.c1, p.c2, 1.0 / 32, 2, 0.8);
  auto f2 = fit_slip_coefficients(m2, 0.25);
  CHECK(f2.c_lsq[1] == Approx(0.8).epsilon(1e-10));
  CHECK(std::abs(f2.c_lsq[0]) < 1e-10);
}

TEST_CASE("manufactured scan separates the three spans", "[analysis]") {
  const auto& p = sinusoid_pair();
  const double eps = 1.0 / 32;
  ManufacturedField mf(p.c1, p.c2, eps);
  auto rep = scale_scan(mf, {0.5, 0.25, 0.125, 0.0625});
  const double a = p.c1->alpha[0];
  for (const auto& row : rep.rows) {
    CHECK(row.res_corrector <= 1e-12 * row.avg_l2);
    CHECK(row.res_corrector <= row.res_plain + 1e-12);
    CHECK(row.res_corrector <= row.res_navier + 1e-12);
    if (row.r >= 4 * eps) CHECK(row.res_navier <= row.res_plain);
    // With c_lsq = e1 the plain residual is eps times the rms of v, close to eps |alpha|.
    CHECK(row.res_plain == Approx(eps * a).epsilon(0.05));
    CHECK(row.lipschitz_ratio > 0.0);
    CHECK_FALSE(row.small_scale);
  }
  CHECK(rep.slopes.at("res_navier").slope == Approx(-0.5).margin(0.15));
  CHECK(std::abs(rep.slopes.at("res_plain").slope) < 0.05);
  CHECK(rep.slopes.count("res_corrector") == 0);

  // Doubling the field doubles every column.
  ManufacturedField twice(p.c1, p.c2, eps, 1, 2.0);
  auto r2 = scale_scan(twice, {0.5, 0.25, 0.125, 0.0625});
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(r2.rows[i].avg_l2 == Approx(2.0 * rep.rows[i].avg_l2).epsilon(1e-12));
    CHECK(r2.rows[i].res_plain == Approx(2.0 * rep.rows[i].res_plain).epsilon(1e-12));
    CHECK(r2.rows[i].res_navier == Approx(2.0 * rep.rows[i].res_navier).epsilon(1e-12));
    CHECK(r2.rows[i].res_plain_grad == Approx(2.0 * rep.rows[i].res_plain_grad).epsilon(1e-12));
  }
}

TEST_CASE("least-squares coefficients minimise the corrector residual", "[analysis]") {
  const auto& p = sinusoid_pair();
  auto ch = std::make_shared<const ChannelSolution>(
      solve_channel(rwtest::sinusoid(), 1.0 / 16, 2, {1.0, 0.0}, true, {96, 1, 64, 1.5}));
  ChannelBoxField bf(ch, p.c1, p.c2);
  const double r = 0.25;
  auto fit = fit_slip_coefficients(bf, r);
  auto residual = [&](double c1, double c2) {
    double s = 0.0, v = 0.0;
    bf.visit(r, [&](const BoxSample& b) {
      Vec3 d;
      for (int c = 0; c < 3; ++c)
        d[c] = b.u[c] - c1 * ((c == 0 ? b.x3 : 0.0) + ch->epsilon * b.v[0][c]) -
               c2 * ((c == 1 ? b.x3 : 0.0) + ch->epsilon * b.v[1][c]);
      s += b.weight * dot(d, d);
      v += b.weight;
    });
    return std::sqrt(s / v);
  };
  const double best = residual(fit.c_lsq[0], fit.c_lsq[1]);
  for (double d : {1e-3, -1e-3})
    for (int which = 0; which < 2; ++which) {
      const double c1 = fit.c_lsq[0] + (which == 0 ? d : 0.0), c2 = fit.c_lsq[1] + (which == 1 ? d : 0.0);
      CHECK(residual(c1, c2) >= best);
    }
  CHECK(std::abs(fit.c_grad[0] - fit.c_lsq[0]) / std::abs(fit.c_lsq[0]) <= 0.1);

  auto rep = scale_scan(bf, {0.5, 0.375, 0.25});
  double lo = 1e300, hi = 0.0;
  for (const auto& row : rep.rows) {
    lo = std::min(lo, row.lipschitz_ratio);
    hi = std::max(hi, row.lipschitz_ratio);
    CHECK(row.res_corrector < row.res_navier);
    CHECK(row.res_navier < row.res_plain);
  }
  CHECK(hi / lo <= 10.0);
}

TEST_CASE("flat-wall Couette is reproduced by the Navier span", "[analysis]") {
  const double eps = 0.125, c = 0.5, b = -eps * c;
  auto fp = flat_pair(c);
  auto ch = std::make_shared<const ChannelSolution>(
      solve_channel(rwtest::flat(c), eps, 2, {1.0, 0.0}, false, {16, 1, 32, 1.5}));
  ChannelBoxField bf(ch, fp.c1, fp.c2);
  auto rep = scale_scan(bf, {0.5, 0.25, 0.125});
  for (const auto& row : rep.rows) {
    CHECK(row.c_grad[0] == Approx(1.0 / (1.0 - b)).epsilon(1e-10));
    CHECK(std::abs(row.c_grad[1]) < 1e-12);
    CHECK(row.c_lsq[0] == Approx(1.0 / (1.0 - b)).epsilon(1e-10));
    CHECK(row.res_navier < 1e-10);
    CHECK(row.res_corrector < 1e-10);
  }

  // Closed-form Caccioppoli integrals for the linear profile.
  const double rho = 0.25, r = 0.5, s2 = 1.0 / ((1.0 - b) * (1.0 - b));
  auto cc = caccioppoli_ratio(bf, rho, r);
  CHECK(cc.lhs == Approx(4.0 * rho * rho * rho * s2).epsilon(1e-10));
  const double uu = 4.0 * r * r * r * r * r / 3.0 * s2;
  CHECK(cc.rhs_terms[0] == Approx(uu / ((r - rho) * (r - rho))).epsilon(1e-10));
  CHECK(cc.rhs_terms[1] == Approx(uu * uu * uu / std::pow(r - rho, 4)).epsilon(1e-10));
  CHECK(std::isfinite(cc.implied_K));
  CHECK(cc.implied_K > 0.0);
  CHECK_THROWS_AS(caccioppoli_ratio(bf, 0.49, 0.5), Error);
}

TEST_CASE("Caccioppoli ratio of the zero field vanishes", "[analysis]") {
  AnalyticField zero(rwtest::sinusoid(), 1.0 / 16, [](const Vec3&) { return Vec3{0, 0, 0}; },
                     [](const Vec3&) { return Mat3{}; }, 16, 3);
  auto cc = caccioppoli_ratio(zero, 0.2, 0.4);
  CHECK(cc.lhs == 0.0);
  CHECK(cc.implied_K == 0.0);
}

TEST_CASE("log-log rate fits", "[analysis]") {
  std::vector<double> r{0.5, 0.25, 0.125, 0.0625}, y;
  for (double x : r) y.push_back(x * x);
  auto f = rate_fit(r, y);
  CHECK(f.slope == Approx(2.0).margin(1e-10));
  CHECK(f.half_width < 1e-10);
  y[2] *= 1.1;
  auto g = rate_fit(r, y);
  CHECK(g.half_width > 0.0);
  CHECK(std::abs(g.slope - 2.0) < g.half_width);
  y[1] = 0.0;
  CHECK_THROWS_AS(rate_fit(r, y), Error);
  CHECK_THROWS_AS(rate_fit({1.0, 2.0}, {1.0, 2.0}), Error);

  // Navier residual against epsilon at fixed r on manufactured fields.
  const auto& p = sinusoid_pair();
  std::vector<ScaleReport> reps;
  for (double e : {1.0 / 16, 1.0 / 32, 1.0 / 64}) reps.push_back(scale_scan(ManufacturedField(p.c1, p.c2, e), {0.25}));
  auto fe = rate_fit_epsilon(reps, "res_navier", 0.25);
  CHECK(fe.slope == Approx(1.5).margin(0.3));
}

TEST_CASE("corrector scaling integrals", "[analysis]") {
  const auto& p = sinusoid_pair();
  auto sc = corrector_scaling_check(p.c1, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 0.5, {0, 2});
  CHECK(sc.grad_exponent == Approx(1.0).margin(0.2));
  // v tends to alpha away from the wall, so the moments approach 4 r^3 |alpha|^(2+m).
  const double a = p.c1->alpha[0];
  CHECK(sc.moment_integral[0].back() == Approx(0.5 * a * a).epsilon(0.02));
  CHECK(std::abs(sc.moment_exponents[0]) < 0.05);

  auto fp = flat_pair(0.5);
  auto flat = corrector_scaling_check(fp.c1, {0.25, 0.125, 0.0625}, 0.5);
  for (double gi : flat.grad_integral) CHECK(gi < 1e-24);
  CHECK(std::isnan(flat.grad_exponent));
}

TEST_CASE("Navier polynomials are exact shear flows", "[analysis]") {
  const auto& p = sinusoid_pair();
  auto m = slip_matrix(*p.c1, *p.c2);
  for (int j : {1, 2}) {
    const Vec3 alpha = j == 1 ? p.c1->alpha : p.c2->alpha;
    auto P0 = navier_polynomial_field(j, 0.0, alpha);
    const Vec3 x{0.3, -0.2, 0.7};
    CHECK(P0(x)[j - 1] == 0.7);
    CHECK(P0(x)[2 - j] == 0.0);
    auto P = navier_polynomial_field(j, 1.0 / 16, alpha);
    const Vec3 res = P.momentum_residual(x);
    for (double v : res) CHECK(std::abs(v) < 1e-12);
    CHECK(P.divergence(x) == 0.0);
    CHECK(P.gradient()[j - 1][2] == 1.0);
    auto slip = P.navier_slip_residual(m.m);
    CHECK(std::abs(slip[0]) < 1e-15);
    CHECK(std::abs(slip[1]) < 1e-15);
  }
}

TEST_CASE("analysis rejects bad input", "[analysis]") {
  const auto& p = sinusoid_pair();
  ManufacturedField mf(p.c1, p.c2, 1.0 / 32);
  CHECK_THROWS_AS(scale_scan(mf, {0.25, 0.5}), Error);
  CHECK_THROWS_AS(scale_scan(mf, {1.5}), Error);
  CHECK_THROWS_AS(ManufacturedField(nullptr, p.c2, 0.1), Error);
  CHECK_THROWS_AS(ManufacturedField(p.c2, p.c1, 0.1), Error);
  CHECK_THROWS_AS(corrector_scaling_check(p.c1, {0.6}, 0.5), Error);
  auto ch = std::make_shared<const ChannelSolution>(
      solve_channel(rwtest::sinusoid(), 0.25, 2, {1.0, 0.0}, false, {16, 1, 16, 1.5}));
  ChannelBoxField cf(ch);
  CHECK_THROWS_AS(box_average_l2(cf, 1.5), Error);
  auto rep = scale_scan(cf, {0.5, 0.25, 0.125});
  CHECK(std::isnan(rep.rows[0].res_corrector));
  CHECK(rep.rows.back().small_scale);
}
