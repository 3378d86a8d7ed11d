#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcf/causal.hpp"
#include "tcf/nb_glm.hpp"
#include "tcf/panel.hpp"

namespace tcf {

/*
 * Negative binomial log-linear models for Y^0 with log mean
 *
 *   LL1:  theta_i + eta_t + sum_p gamma_p X^p_it + log n_i
 *   LL2:  LL1 + sum_k beta_k log Z^(k)_it
 *   LL3:  LL1 for Y^0, and theta_i + tau^k_t + sum_p gamma_p X^p_it + log n_i
 *         for every observed Z^(k)_it, one joint likelihood with shared
 *         theta, gamma and phi
 *   LL3S: like LL3 but the controls share eta_t and get a scalar shift
 *         tau_k (the form used in the simulation study)
 *
 * Factors are reference coded: an intercept, units 2..N, periods 2..T.
 */
enum class LogLinearVariant { LL1, LL2, LL3, LL3S };

std::string variant_name(LogLinearVariant v);

struct NBModelSpec {
  LogLinearVariant variant = LogLinearVariant::LL1;
  GlmOptions glm;
};

struct NBFit : GlmFit {
  LogLinearVariant variant = LogLinearVariant::LL1;
  std::vector<std::string> names;  // one per coefficient
  int zero_controls_shifted = 0;   // LL2: zero control counts moved to 1
  int rows = 0;                    // likelihood terms
};

using CellIndex = std::pair<Eigen::Index, Eigen::Index>;

/// Fits on the observed Y^0 cells (untreated, recorded, and not in
/// `exclude`) plus, for LL3/LL3S, the observed control cells.
NBFit fit_nb(const PanelDataset& d, const NBModelSpec& spec, const std::optional<Mask>& exclude = std::nullopt);

/// Design row of outcome cell (i, t) without the offset.
Vector nb_design_row(const NBFit& fit, const PanelDataset& d, Eigen::Index i, Eigen::Index t);

/// exp(mu_it) for the given cells, offsets included.
Vector impute_nb(const NBFit& fit, const PanelDataset& d, const std::vector<CellIndex>& cells);
/// exp(mu_it) for every cell.
Matrix impute_nb(const NBFit& fit, const PanelDataset& d);

/// Plug-in Delta as a function of the coefficients, and its gradient.
double nb_delta(const NBFit& fit, const PanelDataset& d, const Vector& beta);
Vector nb_delta_gradient(const NBFit& fit, const PanelDataset& d, const Vector& beta);

struct DeltaInterval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double sd = 0.0;
  bool unreliable = false;  // covariance was singular
};

/// point -/+ 1.96 sqrt(g' Sigma g).
DeltaInterval delta_method_interval(const NBFit& fit, const PanelDataset& d);

enum class CompletionVariant { MC1, MC2 };

/// MC1 completes the outcome matrix alone; MC2 adds the transformed
/// controls as unit-time covariates. Otherwise as impute_counterfactuals.
Imputation matrix_completion_baseline(const PanelDataset& d, CompletionVariant v, const SolverConfig& cfg,
                                      ImputeOptions opts = {});

}  // namespace tcf
