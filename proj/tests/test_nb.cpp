#include <cmath>

#include "doctest.h"
#include "tcf/baselines.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"
#include "tcf/sim.hpp"
#include "test_util.hpp"

using namespace tcf;

namespace {

// Counts from a two-way NB model, log mean theta_i + eta_t.
struct TwoWay {
  PanelDataset d;
  Vector theta, eta;
};

TwoWay two_way_panel(std::uint64_t seed, Eigen::Index n, Eigen::Index t, double phi, int treated = 8) {
  Rng rng(seed);
  TwoWay out;
  out.theta = testing::random_vector(rng, n, 0.5).array() + 2.0;
  out.eta = testing::random_vector(rng, t, 0.5).array() + 1.0;
  Matrix y(n, t);
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index i = 0; i < n; ++i) y(i, j) = draw_negative_binomial(rng, std::exp(out.theta(i) + out.eta(j)), phi);
  out.d.y_obs = y;
  out.d.w = Mask::Constant(n, t, false);
  for (std::size_t c : sample_without_replacement(rng, static_cast<std::size_t>(n * t), static_cast<std::size_t>(treated)))
    out.d.w(static_cast<Eigen::Index>(c) % n, static_cast<Eigen::Index>(c) / n) = true;
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (out.d.w(i, j)) out.d.y_obs(i, j) = std::max(1.0, std::round(0.9 * y(i, j)));
  return out;
}

PanelDataset with_control(PanelDataset d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix z(d.N(), d.T());
  for (Eigen::Index j = 0; j < d.T(); ++j)
    for (Eigen::Index i = 0; i < d.N(); ++i) z(i, j) = draw_poisson(rng, 10.0 + static_cast<double>(i + j));
  d.controls.push_back({"z", z, {}});
  return d;
}

}  // namespace

TEST_CASE("intercept-only fit reproduces the sample mean") {
  Rng rng(1);
  Vector y(200);
  for (Eigen::Index c = 0; c < y.size(); ++c) y(c) = draw_negative_binomial(rng, 30.0, 0.3);
  const GlmFit fit = fit_nb_glm(Matrix::Ones(200, 1), y, Vector::Zero(200));
  CHECK(fit.converged);
  CHECK(std::exp(fit.coefficients(0)) == doctest::Approx(y.mean()).epsilon(1e-8));
  CHECK(fit.phi > 0.0);
  CHECK(fit.phi == doctest::Approx(0.3).epsilon(0.5));

  // With exposures n_i the fitted mean is n_i exp(b0), exp(b0) = sum y / sum n.
  Vector expo(200);
  for (Eigen::Index c = 0; c < 200; ++c) expo(c) = 1.0 + static_cast<double>(c % 7);
  const GlmFit off = fit_nb_glm(Matrix::Ones(200, 1), y, expo.array().log().matrix(), GlmOptions{.fixed_phi = 0.0});
  CHECK(std::exp(off.coefficients(0)) == doctest::Approx(y.sum() / expo.sum()).epsilon(1e-8));
}

TEST_CASE("vanishing dispersion agrees with the Poisson fit") {
  const TwoWay p = two_way_panel(2, 12, 5, 0.05);
  NBModelSpec nb;
  nb.glm.fixed_phi = 1e-10;
  NBModelSpec pois;
  pois.glm.fixed_phi = 0.0;
  const NBFit a = fit_nb(p.d, nb);
  const NBFit b = fit_nb(p.d, pois);
  CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("underdispersed counts fall back to the Poisson limit") {
  Matrix y(6, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < 6; ++i) y(i, j) = std::round(std::exp(2.0 + 0.2 * static_cast<double>(i) + 0.1 * static_cast<double>(j)));
  PanelDataset d;
  d.y_obs = y;
  d.w = Mask::Constant(6, 4, false);
  const NBFit fit = fit_nb(d, {});
  CHECK(fit.poisson_limit);
  CHECK(fit.phi <= 1e-8 * (1.0 + 1e-6));
  CHECK(fit.coefficients.allFinite());
}

TEST_CASE("converged fits sit at a stationary point with a monotone likelihood") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    SimScenario s;
    s.seed = seed;
    s.theta_mean = 2.0;
    s.eta_mean = 1.0;
    const SimData g = generate(s);
    for (LogLinearVariant v : {LogLinearVariant::LL1, LogLinearVariant::LL2, LogLinearVariant::LL3, LogLinearVariant::LL3S}) {
      CAPTURE(variant_name(v));
      NBModelSpec spec;
      spec.variant = v;
      const NBFit fit = fit_nb(g.data, spec);
      REQUIRE(fit.converged);
      CHECK(fit.score.cwiseAbs().maxCoeff() < 1e-6);
      for (std::size_t k = 1; k < fit.log_lik_trace.size(); ++k)
        CHECK(fit.log_lik_trace[k] >= fit.log_lik_trace[k - 1] - 1e-10 * (1.0 + std::abs(fit.log_lik_trace[k - 1])));
      CHECK(fit.phi > 0.0);
      // Symmetric positive semidefinite covariance.
      CHECK((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(fit.covariance).eigenvalues().minCoeff() >
            -1e-12 * fit.covariance.norm());
    }
  }
}

TEST_CASE("LL3 with no controls is LL1") {
  const TwoWay p = two_way_panel(6, 15, 6, 0.1);
  const NBFit a = fit_nb(p.d, {LogLinearVariant::LL1, {}});
  const NBFit b = fit_nb(p.d, {LogLinearVariant::LL3, {}});
  const NBFit c = fit_nb(p.d, {LogLinearVariant::LL3S, {}});
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((a.coefficients - c.coefficients).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(a.phi == doctest::Approx(b.phi).epsilon(1e-8));
}

TEST_CASE("design layout: reference coding and variant extras") {
  const PanelDataset d = with_control(two_way_panel(7, 5, 4, 0.1).d, 70);
  const NBFit ll1 = fit_nb(d, {LogLinearVariant::LL1, {}});
  CHECK(ll1.coefficients.size() == 1 + 4 + 3);
  CHECK(fit_nb(d, {LogLinearVariant::LL2, {}}).coefficients.size() == 1 + 4 + 3 + 1);
  CHECK(fit_nb(d, {LogLinearVariant::LL3, {}}).coefficients.size() == 1 + 4 + 3 + 4);
  CHECK(fit_nb(d, {LogLinearVariant::LL3S, {}}).coefficients.size() == 1 + 4 + 3 + 1);
  CHECK(ll1.rows == 20 - d.w.count());
  CHECK(ll1.names.size() == static_cast<std::size_t>(ll1.coefficients.size()));
}

TEST_CASE("LL2 imputations follow the control outcome") {
  PanelDataset d = with_control(two_way_panel(8, 12, 5, 0.1).d, 80);
  const NBFit fit = fit_nb(d, {LogLinearVariant::LL2, {}});
  Eigen::Index ti = 0, tt = 0;
  for (Eigen::Index j = 0; j < d.T(); ++j)
    for (Eigen::Index i = 0; i < d.N(); ++i)
      if (d.w(i, j)) ti = i, tt = j;
  const double before = impute_nb(fit, d, {{ti, tt}})(0);
  d.controls[0].values(ti, tt) *= 4.0;
  const double after = impute_nb(fit, d, {{ti, tt}})(0);
  CHECK(after != before);
  CHECK(after / before == doctest::Approx(std::pow(4.0, fit.coefficients(fit.coefficients.size() - 1))).epsilon(1e-10));

  Eigen::Index ui = 0;
  while (d.w(ui, 0)) ++ui;
  d.controls[0].values(ui, 0) = 0.0;
  CHECK(fit_nb(d, {LogLinearVariant::LL2, {}}).zero_controls_shifted == 1);
}

TEST_CASE("imputation is exp of the linear predictor plus the log offset") {
  TwoWay p = two_way_panel(9, 8, 4, 0.1);
  Vector n(8);
  for (Eigen::Index i = 0; i < 8; ++i) n(i) = 100.0 * static_cast<double>(i + 1);
  p.d.offsets = n;
  const NBFit fit = fit_nb(p.d, {});
  const Matrix all = impute_nb(fit, p.d);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < 8; ++i)
      CHECK(all(i, j) == doctest::Approx(n(i) * std::exp(nb_design_row(fit, p.d, i, j).dot(fit.coefficients))).epsilon(1e-12));
}

TEST_CASE("delta gradient matches central differences") {
  for (LogLinearVariant v : {LogLinearVariant::LL1, LogLinearVariant::LL2, LogLinearVariant::LL3}) {
    CAPTURE(variant_name(v));
    const PanelDataset d = with_control(two_way_panel(10, 10, 5, 0.1).d, 100);
    const NBFit fit = fit_nb(d, {v, {}});
    const Vector g = nb_delta_gradient(fit, d, fit.coefficients);
    for (Eigen::Index c = 0; c < g.size(); ++c) {
      Vector up = fit.coefficients, dn = fit.coefficients;
      up(c) += 1e-5;
      dn(c) -= 1e-5;
      const double fd = (nb_delta(fit, d, up) - nb_delta(fit, d, dn)) / 2e-5;
      CHECK(std::abs(fd - g(c)) <= 1e-4 * std::max(std::abs(g(c)), 1e-3));
    }
  }
}

TEST_CASE("zero covariance gives a degenerate delta-method interval") {
  const TwoWay p = two_way_panel(11, 10, 5, 0.1);
  NBFit fit = fit_nb(p.d, {});
  fit.covariance.setZero();
  const DeltaInterval di = delta_method_interval(fit, p.d);
  CHECK(di.sd == 0.0);
  CHECK(di.lo == di.point);
  CHECK(di.hi == di.point);
  CHECK(di.point == doctest::Approx(nb_delta(fit, p.d, fit.coefficients)));
}

TEST_CASE("coefficient recovery on data from the model itself") {
  int within = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const TwoWay p = two_way_panel(derive_seed(12, seed), 20, 6, 0.05, 0);
    const NBFit fit = fit_nb(p.d, {});
    REQUIRE(fit.converged);
    Vector truth(fit.coefficients.size());
    truth(0) = p.theta(0) + p.eta(0);
    for (Eigen::Index i = 1; i < 20; ++i) truth(i) = p.theta(i) - p.theta(0);
    for (Eigen::Index j = 1; j < 6; ++j) truth(19 + j) = p.eta(j) - p.eta(0);
    for (Eigen::Index c = 0; c < truth.size(); ++c) {
      ++total;
      within += std::abs(fit.coefficients(c) - truth(c)) <= 3.0 * std::sqrt(fit.covariance(c, c)) ? 1 : 0;
    }
  }
  MESSAGE("coefficients within 3 standard errors: " << within << " / " << total);
  CHECK(within >= 0.95 * total);
}

// The interval reflects coefficient uncertainty only, while the estimand
// uses the realized Y0 at the treated cells: NB noise there (and the
// Jensen gap of E[m / Y0]) is not covered. Reported, not enforced.
TEST_CASE("delta-method intervals cover the true effect in simulation 1" * doctest::may_fail()) {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimScenario s;
    s.seed = derive_seed(13, seed);
    const SimData g = generate(s);
    const NBFit fit = fit_nb(g.data, {});
    const DeltaInterval di = delta_method_interval(fit, g.data);
    covered += (di.lo <= 1.0 / 0.9 - 1.0 && 1.0 / 0.9 - 1.0 <= di.hi) ? 1 : 0;
  }
  MESSAGE("delta-method coverage: " << covered << " / 100");
  CHECK(covered >= 88);
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(fit_nb_glm(Matrix::Ones(3, 1), Vector::Constant(3, -1.0), Vector::Zero(3)), InputError);
  CHECK_THROWS_AS(fit_nb_glm(Matrix::Ones(3, 1), Vector::Ones(2), Vector::Zero(3)), ShapeError);
  CHECK_THROWS_AS(fit_nb_glm(Matrix::Ones(3, 1), Vector::Ones(3), Vector::Zero(3), GlmOptions{.fixed_phi = -1.0}),
                  InputError);
}

TEST_CASE("log-likelihood is smooth in phi down to the Poisson limit") {
  Rng rng(14);
  const Matrix x = testing::random_matrix(rng, 40, 2, 0.3);
  Vector y(40);
  for (Eigen::Index c = 0; c < 40; ++c) y(c) = draw_poisson(rng, 500.0);
  const Vector off = Vector::Constant(40, std::log(500.0));
  const Vector beta = Vector::Constant(2, 0.1);
  const double pois = nb_log_likelihood(x, y, off, beta, 0.0);
  CHECK(nb_log_likelihood(x, y, off, beta, 1e-14) == doctest::Approx(pois).epsilon(1e-10));
  // Both sides of the switch to the large-size form.
  const double lo = nb_log_likelihood(x, y, off, beta, 1.0 / 1.0000001e5);
  const double hi = nb_log_likelihood(x, y, off, beta, 1.0 / 0.9999999e5);
  CHECK(lo == doctest::Approx(hi).epsilon(1e-9));
}
