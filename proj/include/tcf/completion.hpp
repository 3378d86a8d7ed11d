#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tcf/tensor.hpp"

namespace tcf {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Matrix plus its observed-entry set. Values at unobserved positions are
/// carried along but never read by the solver.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(Matrix values, Mask observed);
  /// Throws InputError on out-of-bounds or duplicate indices.
  static MaskedMatrix from_indices(Matrix values, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& observed);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const Mask& observed() const { return observed_; }
  bool is_observed(Eigen::Index i, Eigen::Index j) const { return observed_(i, j); }
  Eigen::Index count() const { return observed_.count(); }

  /// Observed entries kept, everything else set to zero.
  Matrix zero_filled() const;
  /// Same values with a different observed set.
  MaskedMatrix with_mask(Mask observed) const { return {values_, std::move(observed)}; }

 private:
  Matrix values_;
  Mask observed_;
};

struct SolverConfig {
  double lambda = 0.0;
  int max_iters = 500;
  double tol = 1e-7;  // relative objective change
  std::optional<int> svd_rank_cap;
  bool continuation = false;
  int continuation_stages = 20;
  /// With continuation and lambda == 0 the path stops at
  /// continuation_floor * lambda_max before the final lambda = 0 stage.
  double continuation_floor = 1e-9;

  void validate() const;
};

/*
 * Covariate part of the outcome model, Y = L + X_N B X_T + sum_p c_p X_p
 * + offset, where L is the penalized low-rank part.
 *
 * The X_N B X_T block and the unit-time covariates act on the column block
 * [first_col, first_col + block_cols) (the outcome-of-interest layer of a
 * mode-1 unfolding). When only one of X_N / X_T is given the other is the
 * identity; with neither there is no B term.
 *
 * The intercept flags add unpenalized row and column effects over the whole
 * matrix: unit_intercepts is X_N = I with X_T = 1', column_intercepts is
 * X_N = 1 with X_T = I. When both are set the first column effect is fixed
 * at zero.
 */
struct CovariateModel {
  std::optional<Matrix> unit_covariates;  // X_N, N x d_N
  std::optional<Matrix> time_covariates;  // X_T, d_T x T
  std::vector<Matrix> unit_time_covariates;
  std::optional<Matrix> offset;  // fixed, coefficient 1
  bool unit_intercepts = false;
  bool column_intercepts = false;
  Eigen::Index first_col = 0;
  Eigen::Index block_cols = -1;  // -1: through the last column

  bool empty() const;
};

struct CovariateFit {
  Matrix b_hat;                  // d_N x d_T (or N x d_T / d_N x T)
  Vector unit_time_coefficients;
  Vector unit_effects;
  Vector column_effects;
  Matrix fitted;                 // covariate contribution incl. offset, rows x cols
  bool rank_deficient = false;   // minimum-norm coefficients were used
};

struct CompletionFit {
  Matrix theta_hat;  // low_rank + covariates.fitted
  Matrix low_rank;
  CovariateFit covariates;
  std::vector<double> objective_trace;  // final lambda stage
  int rank_hat = 0;
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
};

/// Proximal operator of lambda * nuclear norm: U max(S - lambda, 0) V'.
Matrix svt(const Matrix& m, double lambda);

/// svt with the SVD restricted to the leading singular triplets; the rank
/// is grown until the smallest computed singular value is below lambda,
/// so the result matches svt().
Matrix svt_truncated(const Matrix& m, double lambda, int rank_cap);

/*
 * Soft-impute for
 *
 *   min_L 1/2 ||P_O(y - L)||_F^2 + lambda ||L||_*
 *
 * Each iteration fills the unobserved entries with the current estimate
 * and applies svt. Throws InputError on an empty observed set or
 * non-finite observed values.
 */
CompletionFit complete(const MaskedMatrix& y, const SolverConfig& cfg);

/// complete() with an unpenalized covariate term, fitted by alternating an
/// exact least-squares step for the coefficients with one soft-impute step.
CompletionFit complete_with_covariates(const MaskedMatrix& y, const CovariateModel& cov, const SolverConfig& cfg);

/// Warm-started variant used along lambda paths.
CompletionFit complete_with_covariates(const MaskedMatrix& y, const CovariateModel& cov, const SolverConfig& cfg,
                                       const Matrix& warm_low_rank);

/// Smallest lambda at which the solution is L = 0: the operator norm of
/// the observed residual after fitting the covariates alone.
double lambda_max(const MaskedMatrix& y, const CovariateModel& cov = {});

/// `points` log-spaced values from lo*lambda_max to hi*lambda_max,
/// largest first.
std::vector<double> default_lambda_grid(const MaskedMatrix& y, const CovariateModel& cov = {}, int points = 20,
                                        double lo = 1e-3, double hi = 1.0);

struct CvRow {
  double lambda = 0.0;
  double mean_mse = 0.0;
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<CvRow> table;  // grid order, largest lambda first
  double best_mse = 0.0;
};

/*
 * K-fold cross-validation over the observed entries (folds equal to the
 * number of candidates gives leave-one-out). Candidates are shuffled with
 * `seed` and dealt round-robin into folds; each fold refits along the
 * grid from the largest lambda down with warm starts. mean_mse is the
 * held-out SSE divided by the number of candidates. Ties go to the larger
 * lambda.
 *
 * `holdout` restricts which observed entries may be held out (all others
 * always stay in training); by default every observed entry is a
 * candidate.
 */
CvResult cross_validate_lambda(const MaskedMatrix& y, std::vector<double> grid, int folds, std::uint64_t seed,
                               const SolverConfig& cfg = {}, const CovariateModel& cov = {},
                               const std::optional<Mask>& holdout = std::nullopt);

}  // namespace tcf
