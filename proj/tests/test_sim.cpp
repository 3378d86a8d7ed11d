#include <cmath>

#include "doctest.h"
#include "tcf/causal.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"
#include "tcf/sim.hpp"

using namespace tcf;

TEST_CASE("generators are pure functions of the seed") {
  for (Scenario sc : {Scenario::S1, Scenario::S2, Scenario::S3})
    for (Missingness mech : {Missingness::MCAR, Missingness::MCAR_within_season, Missingness::propensity}) {
      SimScenario s;
      s.which = sc;
      s.mechanism = mech;
      s.seed = 17;
      const SimData a = generate(s), b = generate(s);
      CHECK(a.y0 == b.y0);
      CHECK(a.data.y_obs == b.data.y_obs);
      CHECK(a.data.w == b.data.w);
      CHECK(a.data.controls[0].values == b.data.controls[0].values);
      CHECK(a.data.w.count() == 100);
      s.seed = 18;
      CHECK(generate(s).y0 != a.y0);
    }
}

TEST_CASE("panel layout: two outcomes, Y1 = 0.9 Y0 on treated cells") {
  SimScenario s;
  s.seed = 3;
  const SimData g = generate(s);
  CHECK(g.data.N() == 50);
  CHECK(g.data.T() == 8);
  CHECK(g.data.K() == 2);
  CHECK(g.data.covariates.empty());
  CHECK_FALSE(g.data.offsets);
  for (Eigen::Index t = 0; t < 8; ++t)
    for (Eigen::Index i = 0; i < 50; ++i)
      CHECK(g.data.y_obs(i, t) == (g.data.w(i, t) ? 0.9 * g.y0(i, t) : g.y0(i, t)));
}

TEST_CASE("the oracle effect is exactly 1/0.9 - 1") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimScenario s;
    s.which = static_cast<Scenario>(seed % 3);
    s.seed = seed;
    const SimData g = generate(s);
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index t = 0; t < 8; ++t)
      for (Eigen::Index i = 0; i < 50; ++i)
        if (g.data.w(i, t) && g.y1(i, t) > 0.0) sum += (g.y0(i, t) - g.y1(i, t)) / g.y1(i, t), ++n;
    CHECK(std::abs(sum / n - (1.0 / 0.9 - 1.0)) < 1e-12);
    CHECK(std::abs(estimate_delta(g.y1, g.y0, g.data.w).delta_hat - (1.0 / 0.9 - 1.0)) < 1e-12);
  }
}

TEST_CASE("near-Poisson counts with zero log mean average to one") {
  SimScenario s;
  s.N = 1000;
  s.T = 100;
  s.theta_mean = s.eta_mean = 0.0;
  s.theta_sd = s.eta_sd = 0.0;
  s.phi = 1e-6;
  s.n_missing = 0;
  s.seed = 5;
  const SimData g = generate(s);
  // Poisson(1): standard error of the mean is 1 / sqrt(1e5).
  CHECK(std::abs(g.y0.mean() - 1.0) < 4.0 / std::sqrt(1e5));
  CHECK(std::abs(g.data.controls[0].values.mean() - std::exp(-1.0)) < 4.0 * std::sqrt(std::exp(-1.0) / 1e5));
}

TEST_CASE("S3 adds Poisson(5000) noise in odd seasons only") {
  SimScenario s;
  s.seed = 6;
  s.which = Scenario::S2;
  const SimData s2 = generate(s);
  s.which = Scenario::S3;
  const SimData s3 = generate(s);
  // Same draws up to the extra component, which is drawn last.
  CHECK(s3.data.controls[0].values == s2.data.controls[0].values);
  CHECK(s3.data.w == s2.data.w);
  const Matrix v = s3.y0 - s2.y0;
  double odd = 0.0, even = 0.0;
  for (Eigen::Index t = 0; t < 8; ++t) (t % 2 == 0 ? odd : even) += v.col(t).mean() / 4.0;
  CHECK(even == 0.0);
  // Mean of 200 Poisson(5000) draws: standard error 5.
  CHECK(std::abs(odd - 5000.0) < 25.0);
}

TEST_CASE("MCAR masks") {
  CHECK(mcar_mask(10, 4, 13, 1).count() == 13);
  CHECK(mcar_mask(10, 4, 40, 1).count() == 40);
  CHECK(mcar_mask(10, 4, 13, 1) == mcar_mask(10, 4, 13, 1));
  CHECK_THROWS_AS(mcar_mask(10, 4, 41, 1), InputError);

  const Mask even = mcar_within_season_mask(50, 8, 100, 2);
  for (Eigen::Index t = 0; t < 8; ++t) CHECK(even.col(t).count() == 12 + (t < 4 ? 1 : 0));
  const Mask exact = mcar_within_season_mask(50, 8, 96, 2);
  for (Eigen::Index t = 0; t < 8; ++t) CHECK(exact.col(t).count() == 12);
  CHECK(mcar_within_season_mask(5, 3, 15, 2).count() == 15);
}

TEST_CASE("propensity mask") {
  SUBCASE("count and all-masked case") {
    Rng rng(7);
    Matrix y(10, 4);
    for (Eigen::Index t = 0; t < 4; ++t)
      for (Eigen::Index i = 0; i < 10; ++i) y(i, t) = draw_poisson(rng, 50.0);
    CHECK(propensity_mask(y, 17, 3).mask.count() == 17);
    CHECK(propensity_mask(y, 40, 3).mask.count() == 40);
    CHECK(propensity_mask(y, 0, 3).mask.count() == 0);
  }
  SUBCASE("constant column falls back to uniform weights, flagged") {
    Matrix y = Matrix::Constant(6, 3, 4.0);
    y(0, 1) = 9.0;
    const PropensityMask p = propensity_mask(y, 5, 4);
    CHECK(p.mask.count() == 5);
    CHECK(p.flagged_columns == std::vector<int>{0, 2});
    // Uniform within a constant column: every cell gets picked sometimes.
    Mask hits = Mask::Constant(6, 3, false);
    for (std::uint64_t seed = 0; seed < 200; ++seed) hits = hits.array() || propensity_mask(y, 5, seed).mask.array();
    CHECK(hits.col(0).all());
    CHECK(hits.col(2).all());
  }
  SUBCASE("a cell with a very large standardized outcome is almost never selected") {
    Matrix y = Matrix::Zero(10, 1);
    y(9, 0) = 1000.0;  // Y* = 900 / (sqrt(9e5) / 9), about 8.5
    int picked = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) picked += propensity_mask(y, 1, seed).mask(9, 0) ? 1 : 0;
    CHECK(picked < 100);
  }
  SUBCASE("lower outcomes are favoured") {
    Matrix y(2, 1);
    y << 1.0, 3.0;  // Y* = -/+ 1 / sqrt(2)
    int low = 0;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) low += propensity_mask(y, 1, seed).mask(0, 0) ? 1 : 0;
    const double w_lo = 1.0 / (std::exp(-std::sqrt(0.5)) + 1.0), w_hi = 1.0 / (std::exp(std::sqrt(0.5)) + 1.0);
    const double p = w_lo / (w_lo + w_hi);
    CHECK(std::abs(low / 4000.0 - p) < 4.0 * std::sqrt(p * (1 - p) / 4000.0));
  }
}

TEST_CASE("scenario validation") {
  SimScenario s;
  s.n_missing = 401;
  CHECK_THROWS_AS(generate(s), InputError);
  s = {};
  s.phi = -1;
  CHECK_THROWS_AS(generate(s), InputError);
  CHECK(parse_scenario("S2") == Scenario::S2);
  CHECK(parse_missingness("MCAR_within_season") == Missingness::MCAR_within_season);
  CHECK_THROWS_AS(parse_scenario("S4"), InputError);
}

TEST_CASE("comparison bookkeeping") {
  SimScenario s;
  s.N = 20;
  s.T = 6;
  s.n_missing = 15;
  MethodOptions o = simulation_method_options();
  o.impute.cv_folds = 3;
  o.impute.grid_points = 5;
  const SimResult a = run_comparison(s, {Method::LL1, Method::TC}, 2, 9, o);
  const SimResult b = run_comparison(s, {Method::LL1, Method::TC}, 2, 9, o);
  CHECK(a.truth_delta == doctest::Approx(1.0 / 0.9 - 1.0).epsilon(1e-12));
  REQUIRE(a.per_method.size() == 2);
  for (std::size_t m = 0; m < 2; ++m) {
    const MethodSummary& ms = a.per_method[m];
    CHECK(ms.failures == 0);
    REQUIRE(ms.mape_per_cell.size() == 2);
    for (const auto& cells : ms.mape_per_cell) CHECK(cells.size() == 15);
    CHECK(ms.delta_hat == b.per_method[m].delta_hat);
    CHECK(ms.mse == b.per_method[m].mse);
    CHECK(ms.mean_delta_hat == doctest::Approx((ms.delta_hat[0] + ms.delta_hat[1]) / 2));
  }
  CHECK_THROWS_AS(run_comparison(s, {}, 2, 9, o), InputError);
  CHECK_THROWS_AS(run_comparison(s, {Method::TC}, 0, 9, o), InputError);
}
