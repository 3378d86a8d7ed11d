#pragma once

#include <optional>

#include "tcf/causal.hpp"

namespace tcf::detail {

/// The masked matrix and covariate model handed to the completion solver
/// for one dataset and one way of using the controls.
struct CompletionProblem {
  MaskedMatrix y;        // N x T*layers, transform scale
  CovariateModel cov;
  Eigen::Index T = 0;    // outcome block is columns [0, T)
  Mask holdout;          // same shape as y; observed outcome-block cells
};

CompletionProblem build_problem(const PanelDataset& d, const ImputeOptions& opts);

struct SolvedProblem {
  CompletionFit fit;
  std::vector<CvRow> cv_table;
  double cv_mse = std::numeric_limits<double>::quiet_NaN();
};

/// With `select` the lambda comes from cross-validation on the outcome
/// block; otherwise cfg.lambda is used as is.
SolvedProblem solve_problem(const CompletionProblem& p, const SolverConfig& cfg, const ImputeOptions& opts,
                            bool select);

}  // namespace tcf::detail
