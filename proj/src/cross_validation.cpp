#include <algorithm>
#include <cmath>
#include <functional>

#include "tcf/completion.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"

namespace tcf {

CvResult cross_validate_lambda(const MaskedMatrix& y, std::vector<double> grid, int folds, std::uint64_t seed,
                               const SolverConfig& cfg, const CovariateModel& cov, const std::optional<Mask>& holdout) {
  if (grid.empty()) throw InputError("cross-validation: lambda grid is empty");
  for (double l : grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("cross-validation: lambda grid values must be nonnegative");
  }
  if (holdout && (holdout->rows() != y.rows() || holdout->cols() != y.cols())) {
    throw ShapeError("cross-validation: holdout mask has the wrong shape");
  }
  std::sort(grid.begin(), grid.end(), std::greater<>());

  std::vector<std::pair<Eigen::Index, Eigen::Index>> candidates;
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      if (y.is_observed(i, j) && (!holdout || (*holdout)(i, j))) candidates.emplace_back(i, j);
  const auto n = static_cast<int>(candidates.size());
  if (n == 0) throw InputError("cross-validation: no observed entries to hold out");
  if (folds < 2 || folds > n) {
    throw InputError("cross-validation: folds must be between 2 and the number of held-out candidates (" +
                     std::to_string(n) + ")");
  }

  CvResult result;
  result.table.reserve(grid.size());
  for (double l : grid) result.table.push_back({l, 0.0});

  Rng rng(seed);
  shuffle(candidates, rng);
  SolverConfig path_cfg = cfg;
  path_cfg.continuation = false;
  std::vector<double> sse(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    Mask train = y.observed();
    std::vector<std::pair<Eigen::Index, Eigen::Index>> held;
    for (int c = f; c < n; c += folds) {
      held.push_back(candidates[static_cast<std::size_t>(c)]);
      train(candidates[static_cast<std::size_t>(c)].first, candidates[static_cast<std::size_t>(c)].second) = false;
    }
    if (train.count() == 0) throw InputError("cross-validation: a fold leaves no training entries");
    MaskedMatrix reduced = y.with_mask(train);
    Matrix warm = Matrix::Zero(y.rows(), y.cols());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      path_cfg.lambda = grid[g];
      CompletionFit fit = complete_with_covariates(reduced, cov, path_cfg, warm);
      for (const auto& [i, j] : held) {
        const double e = fit.theta_hat(i, j) - y.values()(i, j);
        sse[g] += e * e;
      }
      warm = std::move(fit.low_rank);
    }
  }
  for (std::size_t g = 0; g < grid.size(); ++g) result.table[g].mean_mse = sse[g] / n;

  // Descending grid: a later (smaller) lambda only wins on a strict improvement.
  std::size_t best = 0;
  for (std::size_t g = 1; g < result.table.size(); ++g)
    if (result.table[g].mean_mse < result.table[best].mean_mse) best = g;
  result.lambda_star = result.table[best].lambda;
  result.best_mse = result.table[best].mean_mse;
  return result;
}

}  // namespace tcf
