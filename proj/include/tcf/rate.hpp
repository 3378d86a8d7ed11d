#pragma once

#include <cstdint>
#include <vector>

#include "tcf/completion.hpp"

namespace tcf {

struct RateOptions {
  /// Share of outcome-layer cells observed (Bernoulli per cell).
  double observed_fraction = 0.5;
  /// lambda = lambda_scale * noise_sd * (sqrt(N) + sqrt(T K)); with zero
  /// noise the solver instead follows a continuation path down to 0.
  double lambda_scale = 1.0;
  int max_iters = 2000;
  double tol = 1e-9;
};

struct RateRow {
  int K = 1;
  double masked_rmse = 0.0;
  double lambda = 0.0;
  int iterations = 0;
};

/*
 * Rank-r tensors with layers A G_k B' (A: N x r, B: T x r, G_1 = I and
 * G_k standard normal), Gaussian noise, a partially observed first layer
 * and fully observed layers 2..K. Factors, mask and noise are drawn once
 * for the largest K, so smaller K use nested subsets. Reports the RMSE on
 * the unobserved first-layer cells for every K in the grid.
 */
std::vector<RateRow> rate_experiment(int r, int N, int T, const std::vector<int>& K_grid, double noise_sd,
                                     std::uint64_t seed, const RateOptions& opts = {});

}  // namespace tcf
