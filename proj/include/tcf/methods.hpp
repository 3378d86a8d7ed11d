#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcf/baselines.hpp"
#include "tcf/causal.hpp"

namespace tcf {

enum class Method { LL1, LL2, LL3, LL3S, MC1, MC2, TC };

/// Throws InputError for an unknown name.
Method parse_method(const std::string& name);
std::string method_name(Method m);
bool is_completion_method(Method m);

enum class IntervalKind { none, delta_method, bootstrap };

struct MethodOptions {
  SolverConfig solver;
  ImputeOptions impute;  // completion methods; `controls` is set per method
  NBModelSpec nb;        // log-linear methods; `variant` is set per method
  /// Out-of-sample MSE by K-fold refits over observed Y^0 cells
  /// (0 folds: leave-one-out).
  bool out_of_sample = false;
  int oos_folds = 10;
  IntervalKind interval = IntervalKind::none;
  int bootstrap_reps = 100;
  std::uint64_t seed = 0;
};

struct MethodResult {
  Method method = Method::TC;
  Matrix y0_hat;
  Diagnostics diagnostics;
  EffectEstimate effect;
  double lambda = 0.0;  // completion methods
  double phi = 0.0;     // log-linear methods
  bool converged = true;
  bool flagged = false;  // Poisson limit, singular covariance, ...
};

/// Fits one method, imputes Y^0 everywhere and estimates Delta over the
/// treated cells, with the requested interval.
MethodResult run_method(const PanelDataset& d, Method m, const MethodOptions& opts);

}  // namespace tcf
