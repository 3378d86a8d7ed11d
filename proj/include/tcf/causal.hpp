#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "tcf/completion.hpp"
#include "tcf/panel.hpp"
#include "tcf/tensor.hpp"

namespace tcf {

struct AssembledTensor {
  Tensor3 tensor;  // N x T x K on the transform scale, zero where missing
  Mask observed;   // N x TK, laid out like the mode-1 unfolding
  std::vector<std::array<std::size_t, 3>> missing;  // (i, t, k), storage order
};

/// Layer 1 is the transformed outcome with treated (and unrecorded) cells
/// missing; layers 2..K are the transformed controls under their masks.
AssembledTensor assemble_tensor(const PanelDataset& d);

struct Diagnostics {
  double in_sample_mse = std::numeric_limits<double>::quiet_NaN();
  double out_of_sample_mse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> mape_per_cell;
};

/// How the control outcomes enter a completion fit: as extra tensor layers
/// (tensor completion), as unit-time covariates of the outcome layer, or
/// not at all.
enum class ControlUse { layers, covariates, ignored };

struct ImputeOptions {
  ControlUse controls = ControlUse::layers;
  /// Unpenalized unit and period effects (two-way fixed effects) next to
  /// the low-rank term.
  bool intercepts = true;
  /// Choose lambda by cross-validation; cfg.lambda is then ignored.
  bool select_lambda = false;
  /// Cross-validated MSE at the fitted lambda even when not selecting.
  bool out_of_sample = false;
  std::vector<double> lambda_grid;  // empty: default_lambda_grid
  int grid_points = 20;
  double grid_lo = 1e-3;
  double grid_hi = 1.0;
  int cv_folds = 10;  // 0: leave-one-out
  std::uint64_t seed = 0;
};

struct Imputation {
  Matrix y0_hat;  // N x T, original scale, clamped at zero
  Matrix fitted;  // N x T, outcome layer on the transform scale
  Diagnostics diagnostics;
  double lambda = 0.0;
  int rank_hat = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<CvRow> cv_table;
};

/*
 * Imputes Y^0 for every cell by completing the mode-1 unfolding
 * [Y^0 | Z^(2) | ... | Z^(K)] on the transform scale. Covariates act on
 * the outcome block; offsets (log n_i) on every layer. In-sample MSE is
 * taken over observed Y^0 cells on the transform scale; cross-validation
 * only ever holds out outcome-layer cells.
 */
Imputation impute_counterfactuals(const PanelDataset& d, const SolverConfig& cfg, const ImputeOptions& opts = {});

struct CellEffect {
  Eigen::Index unit = 0;
  Eigen::Index period = 0;
  double y1_obs = 0.0;
  double y0_imputed = 0.0;
  double relative_effect = 0.0;
};

struct EffectEstimate {
  double delta_hat = std::numeric_limits<double>::quiet_NaN();
  int n_treated = 0;
  int n_excluded = 0;  // treated cells with Y^1 = 0 or no recorded outcome
  std::vector<CellEffect> per_cell;
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> bootstrap_draws;
};

/// Mean of (Y0_hat - Y1) / Y1 over treated cells. Cells with Y1 = 0, or
/// not set in `recorded`, are left out of the mean and counted in
/// n_excluded.
EffectEstimate estimate_delta(const Matrix& y1_obs, const Matrix& y0_hat, const Mask& w,
                              const std::optional<Mask>& recorded = std::nullopt);

struct BootstrapResult {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> draws;
  double lambda = 0.0;
};

/*
 * Residual bootstrap: outcome-layer residuals (transform scale) are
 * permuted within each period among the observed Y^0 cells and added to
 * the fitted values; controls are left alone. Each replicate is refitted
 * at the lambda of the original fit (chosen once by cross-validation when
 * opts.select_lambda is set). The interval is the 2.5% / 97.5% empirical
 * quantile of the draws.
 */
BootstrapResult bootstrap_interval(const PanelDataset& d, const SolverConfig& cfg, int reps, std::uint64_t seed,
                                   const ImputeOptions& opts = {});

/// Type-7 (linear interpolation) sample quantile; `v` need not be sorted.
double quantile(std::vector<double> v, double p);

}  // namespace tcf
