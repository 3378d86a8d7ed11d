#include "tcf/rate.hpp"

#include <algorithm>
#include <cmath>

#include "tcf/error.hpp"
#include "tcf/random.hpp"
#include "tcf/tensor.hpp"

namespace tcf {

std::vector<RateRow> rate_experiment(int r, int N, int T, const std::vector<int>& K_grid, double noise_sd,
                                     std::uint64_t seed, const RateOptions& opts) {
  if (K_grid.empty()) throw InputError("rate experiment: empty K grid");
  if (r < 1 || N < 1 || T < 1) throw InputError("rate experiment: r, N and T must be positive");
  for (int k : K_grid)
    if (k < 1) throw InputError("rate experiment: K values must be positive");
  const int k_min = *std::min_element(K_grid.begin(), K_grid.end());
  const int k_max = *std::max_element(K_grid.begin(), K_grid.end());
  if (r > std::min(N, T * k_min)) throw InputError("rate experiment: r exceeds min(N, T * min K)");
  if (!(noise_sd >= 0.0)) throw InputError("rate experiment: noise_sd must be nonnegative");
  if (!(opts.observed_fraction > 0.0 && opts.observed_fraction <= 1.0)) {
    throw InputError("rate experiment: observed fraction must lie in (0, 1]");
  }

  Rng rng(seed);
  auto normal_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = draw_normal(rng, 0.0, 1.0);
    return m;
  };
  const auto ur = static_cast<std::size_t>(r);
  const Matrix a = normal_matrix(N, r);
  const Matrix b = normal_matrix(T, r);
  Tensor3 core({ur, ur, static_cast<std::size_t>(k_max)});
  core.set_slice(0, Matrix::Identity(r, r));
  for (int k = 1; k < k_max; ++k) core.set_slice(static_cast<std::size_t>(k), normal_matrix(r, r));
  const Matrix truth = unfold(tucker_compose(core, a, b, Matrix::Identity(k_max, k_max)), 1).values;

  Mask first = Mask::Constant(N, T, false);
  for (Eigen::Index j = 0; j < T; ++j)
    for (Eigen::Index i = 0; i < N; ++i) first(i, j) = draw_uniform01(rng) < opts.observed_fraction;
  const Matrix noise = noise_sd * normal_matrix(N, static_cast<Eigen::Index>(T) * k_max);
  const auto unobserved = (first.array() == false).count();
  if (unobserved == 0) throw InputError("rate experiment: no unobserved first-layer cells to score");

  std::vector<RateRow> rows;
  for (int k : K_grid) {
    const Eigen::Index cols = static_cast<Eigen::Index>(T) * k;
    Mask obs = Mask::Constant(N, cols, true);
    obs.leftCols(T) = first;
    const Matrix y = truth.leftCols(cols) + noise.leftCols(cols);

    SolverConfig cfg;
    cfg.max_iters = opts.max_iters;
    cfg.tol = opts.tol;
    if (noise_sd > 0.0) {
      cfg.lambda = opts.lambda_scale * noise_sd * (std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(cols)));
    } else {
      cfg.lambda = 0.0;
      cfg.continuation = true;
      cfg.continuation_stages = 30;
    }
    const CompletionFit fit = complete(MaskedMatrix(y, obs), cfg);

    double sse = 0.0;
    for (Eigen::Index j = 0; j < T; ++j)
      for (Eigen::Index i = 0; i < N; ++i)
        if (!first(i, j)) sse += std::pow(fit.theta_hat(i, j) - truth(i, j), 2);
    rows.push_back({k, std::sqrt(sse / static_cast<double>(unobserved)), cfg.lambda, fit.iterations});
  }
  return rows;
}

}  // namespace tcf
