#include <doctest.h>

#include <cmath>
#include <limits>

#include "tcf/completion.hpp"
#include "tcf/error.hpp"
#include "test_util.hpp"

using namespace tcf;
using tcf::testing::random_low_rank;
using tcf::testing::random_matrix;

namespace {

Mask mask_out(Eigen::Index rows, Eigen::Index cols, const std::vector<std::size_t>& cells) {
  Mask m = Mask::Constant(rows, cols, true);
  for (std::size_t c : cells) m(static_cast<Eigen::Index>(c) % rows, static_cast<Eigen::Index>(c) / rows) = false;
  return m;
}

double op_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool monotone(const std::vector<double>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k] > trace[k - 1] + 1e-10 * std::max(1.0, std::abs(trace[k - 1]))) return false;
  return true;
}

double masked_rel_error(const Matrix& est, const Matrix& truth, const Mask& observed) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j)
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
      if (!observed(i, j)) {
        num += std::pow(est(i, j) - truth(i, j), 2);
        den += truth(i, j) * truth(i, j);
      }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("masked matrix validation") {
  CHECK_THROWS_AS(MaskedMatrix::from_indices(Matrix::Zero(2, 2), {{0, 0}, {0, 0}}), InputError);
  CHECK_THROWS_AS(MaskedMatrix::from_indices(Matrix::Zero(2, 2), {{2, 0}}), InputError);
  CHECK_THROWS_AS(MaskedMatrix(Matrix::Zero(2, 2), Mask::Constant(2, 3, true)), ShapeError);
  const MaskedMatrix ok = MaskedMatrix::from_indices(Matrix::Ones(2, 2), {{0, 1}, {1, 0}});
  CHECK(ok.count() == 2);
  CHECK(ok.zero_filled()(0, 0) == 0.0);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("fully observed matrix with lambda zero is reproduced exactly") {
  Rng rng(1);
  const Matrix y = random_matrix(rng, 6, 4);
  const CompletionFit fit = complete(MaskedMatrix(y, Mask::Constant(6, 4, true)), SolverConfig{});
  CHECK(fit.theta_hat == y);
  CHECK(fit.converged);
  CHECK(fit.iterations == 1);
}

TEST_CASE("input errors") {
  SolverConfig cfg;
  CHECK_THROWS_AS(complete(MaskedMatrix(Matrix::Ones(2, 2), Mask::Constant(2, 2, false)), cfg), InputError);
  Matrix y = Matrix::Ones(2, 2);
  y(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(complete(MaskedMatrix(y, Mask::Constant(2, 2, true)), cfg), InputError);
  // The same NaN at an unobserved position is ignored.
  Mask m = Mask::Constant(2, 2, true);
  m(1, 1) = false;
  cfg.lambda = 0.1;
  CHECK(complete(MaskedMatrix(y, m), cfg).theta_hat.allFinite());
}

TEST_CASE("rank-1 matrix with one masked entry is recovered") {
  Rng rng(7);
  const Matrix u = tcf::testing::random_vector(rng, 8).cwiseAbs().array() + 0.5;
  const Matrix v = tcf::testing::random_vector(rng, 5).cwiseAbs().array() + 0.5;
  const Matrix y = u * v.transpose();
  Mask m = Mask::Constant(8, 5, true);
  m(3, 2) = false;
  SolverConfig cfg;
  cfg.lambda = 0.0;
  cfg.continuation = true;
  cfg.tol = 1e-12;
  cfg.max_iters = 5000;
  const CompletionFit fit = complete(MaskedMatrix(y, m), cfg);
  CHECK(std::abs(fit.theta_hat(3, 2) - y(3, 2)) / std::abs(y(3, 2)) < 1e-6);
}

TEST_CASE("noiseless rank-2 matrix with 100 masked entries is recovered") {
  Rng rng(2);
  const Matrix truth = random_low_rank(rng, 50, 40, 2);
  const Mask m = mask_out(50, 40, sample_without_replacement(rng, 2000, 100));
  SolverConfig cfg;
  cfg.continuation = true;
  cfg.tol = 1e-10;
  cfg.max_iters = 2000;
  const CompletionFit fit = complete(MaskedMatrix(truth, m), cfg);
  CHECK(masked_rel_error(fit.theta_hat, truth, m) < 1e-3);
  CHECK(monotone(fit.objective_trace));
}

TEST_CASE("objective trace is monotone and rank shrinks with lambda") {
  Rng rng(3);
  const Matrix y = random_low_rank(rng, 30, 12, 3) + random_matrix(rng, 30, 12, 0.3);
  const Mask m = mask_out(30, 12, sample_without_replacement(rng, 360, 90));
  const MaskedMatrix masked(y, m);
  const std::vector<double> grid = default_lambda_grid(masked, {}, 12, 1e-3, 1.0);
  int previous_rank = 0;
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    SolverConfig cfg;
    cfg.lambda = *it;
    const CompletionFit fit = complete(masked, cfg);
    CHECK(monotone(fit.objective_trace));
    if (it != grid.rbegin()) CHECK(fit.rank_hat <= previous_rank);
    previous_rank = fit.rank_hat;
  }
}

TEST_CASE("lambda above the observed operator norm gives zero") {
  Rng rng(4);
  const Matrix y = random_matrix(rng, 10, 7);
  const Mask m = mask_out(10, 7, sample_without_replacement(rng, 70, 20));
  const MaskedMatrix masked(y, m);
  SolverConfig cfg;
  cfg.lambda = op_norm(masked.zero_filled());
  CHECK(lambda_max(masked) == doctest::Approx(cfg.lambda).epsilon(1e-12));
  const CompletionFit fit = complete(masked, cfg);
  CHECK(fit.theta_hat.isZero(0.0));
  CHECK(fit.rank_hat == 0);
}

TEST_CASE("rank-capped SVD gives the same fit") {
  Rng rng(5);
  const Matrix y = random_low_rank(rng, 40, 30, 2) + random_matrix(rng, 40, 30, 0.1);
  const Mask m = mask_out(40, 30, sample_without_replacement(rng, 1200, 200));
  SolverConfig cfg;
  cfg.lambda = 2.0;
  cfg.max_iters = 300;
  const CompletionFit full = complete(MaskedMatrix(y, m), cfg);
  cfg.svd_rank_cap = 2;
  const CompletionFit capped = complete(MaskedMatrix(y, m), cfg);
  CHECK((full.theta_hat - capped.theta_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("an entirely unobserved row is imputed by extrapolation") {
  Rng rng(6);
  const Matrix truth = random_low_rank(rng, 12, 8, 1);
  Mask m = Mask::Constant(12, 8, true);
  m.row(4).setConstant(false);
  SolverConfig cfg;
  cfg.lambda = 0.01;
  const CompletionFit fit = complete(MaskedMatrix(truth, m), cfg);
  CHECK(fit.theta_hat.allFinite());
}

// --- covariates ---

TEST_CASE("empty covariate model reduces to plain completion bit for bit") {
  Rng rng(10);
  const Matrix y = random_low_rank(rng, 15, 9, 2) + random_matrix(rng, 15, 9, 0.2);
  const Mask m = mask_out(15, 9, sample_without_replacement(rng, 135, 30));
  SolverConfig cfg;
  cfg.lambda = 0.5;
  const CompletionFit a = complete(MaskedMatrix(y, m), cfg);
  const CompletionFit b = complete_with_covariates(MaskedMatrix(y, m), CovariateModel{}, cfg);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("exact covariate signal is recovered by the coefficient block") {
  Rng rng(11);
  const Matrix xn = random_matrix(rng, 20, 2);
  const Matrix xt = random_matrix(rng, 3, 6);
  const Matrix b = random_matrix(rng, 2, 3);
  const Matrix y = xn * b * xt;
  const Mask m = mask_out(20, 6, sample_without_replacement(rng, 120, 25));
  CovariateModel cov;
  cov.unit_covariates = xn;
  cov.time_covariates = xt;
  SolverConfig cfg;
  cfg.lambda = 100.0;
  const CompletionFit fit = complete_with_covariates(MaskedMatrix(y, m), cov, cfg);
  CHECK((fit.covariates.b_hat - b).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.low_rank.cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fit.theta_hat - y).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(fit.covariates.rank_deficient);
}

TEST_CASE("all-ones unit-time covariate recovers a mean shift") {
  const double c = 3.25;
  const Matrix y = Matrix::Constant(7, 5, c);
  Mask m = Mask::Constant(7, 5, true);
  m(2, 2) = false;
  CovariateModel cov;
  cov.unit_time_covariates.push_back(Matrix::Ones(7, 5));
  SolverConfig cfg;
  cfg.lambda = 1.0;
  const CompletionFit fit = complete_with_covariates(MaskedMatrix(y, m), cov, cfg);
  REQUIRE(fit.covariates.unit_time_coefficients.size() == 1);
  CHECK(fit.covariates.unit_time_coefficients(0) == doctest::Approx(c).epsilon(1e-12));
  CHECK(fit.theta_hat(2, 2) == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("unit and column intercepts absorb additive effects") {
  Rng rng(12);
  const Vector a = tcf::testing::random_vector(rng, 9);
  const Vector b = tcf::testing::random_vector(rng, 6);
  const Matrix y = a * Vector::Ones(6).transpose() + Vector::Ones(9) * b.transpose();
  const Mask m = mask_out(9, 6, sample_without_replacement(rng, 54, 10));
  CovariateModel cov;
  cov.unit_intercepts = true;
  cov.column_intercepts = true;
  SolverConfig cfg;
  cfg.lambda = 0.5;
  const CompletionFit fit = complete_with_covariates(MaskedMatrix(y, m), cov, cfg);
  CHECK((fit.theta_hat - y).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.covariates.column_effects(0) == 0.0);
  CHECK(fit.low_rank.isZero(1e-10));
  CHECK_FALSE(fit.covariates.rank_deficient);
}

TEST_CASE("rank-deficient covariate design is flagged") {
  Rng rng(13);
  Matrix xn(10, 2);
  xn.col(0) = tcf::testing::random_vector(rng, 10);
  xn.col(1) = xn.col(0);
  CovariateModel cov;
  cov.unit_covariates = xn;
  cov.time_covariates = Matrix::Ones(1, 4);
  SolverConfig cfg;
  cfg.lambda = 1.0;
  const CompletionFit fit =
      complete_with_covariates(MaskedMatrix(random_matrix(rng, 10, 4), Mask::Constant(10, 4, true)), cov, cfg);
  CHECK(fit.covariates.rank_deficient);
  CHECK(fit.theta_hat.allFinite());
}

TEST_CASE("joint objective with covariates is monotone") {
  Rng rng(14);
  const Matrix xn = random_matrix(rng, 25, 2);
  const Matrix y = random_low_rank(rng, 25, 10, 2) + xn * random_matrix(rng, 2, 10) + random_matrix(rng, 25, 10, 0.3);
  const Mask m = mask_out(25, 10, sample_without_replacement(rng, 250, 60));
  CovariateModel cov;
  cov.unit_covariates = xn;
  cov.unit_intercepts = true;
  cov.column_intercepts = true;
  cov.unit_time_covariates.push_back(random_matrix(rng, 25, 10));
  SolverConfig cfg;
  cfg.lambda = 1.5;
  const CompletionFit fit = complete_with_covariates(MaskedMatrix(y, m), cov, cfg);
  CHECK(fit.objective_trace.size() > 2);
  CHECK(monotone(fit.objective_trace));
}

TEST_CASE("covariate shape errors") {
  CovariateModel cov;
  cov.unit_time_covariates.push_back(Matrix::Ones(3, 3));
  CHECK_THROWS_AS(complete_with_covariates(MaskedMatrix(Matrix::Ones(4, 3), Mask::Constant(4, 3, true)), cov, {}),
                  ShapeError);
}

// --- cross-validation ---

TEST_CASE("cross-validation with a single lambda returns it") {
  Rng rng(20);
  const Matrix y = random_low_rank(rng, 10, 6, 1);
  const CvResult cv = cross_validate_lambda(MaskedMatrix(y, Mask::Constant(10, 6, true)), {0.3}, 5, 1);
  CHECK(cv.lambda_star == 0.3);
  CHECK(cv.table.size() == 1);
}

TEST_CASE("cross-validation prefers a small lambda on noiseless rank-1 data") {
  Rng rng(21);
  const Matrix y = random_low_rank(rng, 20, 10, 1);
  const MaskedMatrix masked(y, Mask::Constant(20, 10, true));
  const double big = 10.0 * op_norm(y);
  SolverConfig cfg;
  cfg.max_iters = 2000;
  cfg.tol = 1e-10;
  const CvResult cv = cross_validate_lambda(masked, {0.01, big}, 5, 3, cfg);
  CHECK(cv.lambda_star == 0.01);
  CHECK(cv.table[0].lambda == big);
  CHECK(cv.table[1].mean_mse < cv.table[0].mean_mse);
}

TEST_CASE("cross-validation is deterministic under a fixed seed") {
  Rng rng(22);
  const Matrix y = random_low_rank(rng, 15, 8, 2) + random_matrix(rng, 15, 8, 0.2);
  const MaskedMatrix masked(y, Mask::Constant(15, 8, true));
  const auto grid = default_lambda_grid(masked, {}, 6);
  const CvResult a = cross_validate_lambda(masked, grid, 4, 99);
  const CvResult b = cross_validate_lambda(masked, grid, 4, 99);
  REQUIRE(a.table.size() == b.table.size());
  for (std::size_t g = 0; g < a.table.size(); ++g) CHECK(a.table[g].mean_mse == b.table[g].mean_mse);
}

TEST_CASE("cross-validation ties go to the larger lambda") {
  Rng rng(23);
  const Matrix y = random_matrix(rng, 6, 5);
  const MaskedMatrix masked(y, Mask::Constant(6, 5, true));
  const double top = 2.0 * op_norm(y);
  const CvResult cv = cross_validate_lambda(masked, {top, 2.0 * top}, 3, 1);
  CHECK(cv.table[0].mean_mse == cv.table[1].mean_mse);
  CHECK(cv.lambda_star == 2.0 * top);
}

TEST_CASE("cross-validation argument errors") {
  const MaskedMatrix masked(Matrix::Ones(4, 4), Mask::Constant(4, 4, true));
  CHECK_THROWS_AS(cross_validate_lambda(masked, {}, 2, 1), InputError);
  CHECK_THROWS_AS(cross_validate_lambda(masked, {-0.1, 1.0}, 2, 1), InputError);
  CHECK_THROWS_AS(cross_validate_lambda(masked, {1.0}, 1, 1), InputError);
  CHECK_THROWS_AS(cross_validate_lambda(masked, {1.0}, 17, 1), InputError);
}

TEST_CASE("leave-one-out cross-validation over a holdout subset") {
  Rng rng(24);
  const Matrix y = random_low_rank(rng, 8, 6, 1) + random_matrix(rng, 8, 6, 0.1);
  Mask holdout = Mask::Constant(8, 6, false);
  holdout.leftCols(3).setConstant(true);
  SolverConfig cfg;
  const CvResult cv = cross_validate_lambda(MaskedMatrix(y, Mask::Constant(8, 6, true)), {0.05, 0.5, 5.0}, 24, 4,
                                            cfg, {}, holdout);
  CHECK(cv.table.size() == 3);
  for (const CvRow& row : cv.table) CHECK(std::isfinite(row.mean_mse));
}
