#include "tcf/methods.hpp"

#include <algorithm>
#include <cmath>

#include "tcf/error.hpp"
#include "tcf/random.hpp"

namespace tcf {

Method parse_method(const std::string& name) {
  static const std::vector<std::pair<std::string, Method>> table{
      {"LL1", Method::LL1}, {"LL2", Method::LL2}, {"LL3", Method::LL3}, {"LL3S", Method::LL3S},
      {"MC1", Method::MC1}, {"MC2", Method::MC2}, {"TC", Method::TC}};
  for (const auto& [n, m] : table)
    if (n == name) return m;
  throw InputError("unknown method '" + name + "' (expected LL1, LL2, LL3, LL3S, MC1, MC2 or TC)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::LL1: return "LL1";
    case Method::LL2: return "LL2";
    case Method::LL3: return "LL3";
    case Method::LL3S: return "LL3S";
    case Method::MC1: return "MC1";
    case Method::MC2: return "MC2";
    case Method::TC: return "TC";
  }
  return "?";
}

bool is_completion_method(Method m) { return m == Method::MC1 || m == Method::MC2 || m == Method::TC; }

namespace {

LogLinearVariant variant_of(Method m) {
  switch (m) {
    case Method::LL2: return LogLinearVariant::LL2;
    case Method::LL3: return LogLinearVariant::LL3;
    case Method::LL3S: return LogLinearVariant::LL3S;
    default: return LogLinearVariant::LL1;
  }
}

ControlUse controls_of(Method m) {
  if (m == Method::MC1) return ControlUse::ignored;
  if (m == Method::MC2) return ControlUse::covariates;
  return ControlUse::layers;
}

// Observed Y^0 cells, the ones every MSE is computed over.
std::vector<CellIndex> untreated_cells(const PanelDataset& d) {
  std::vector<CellIndex> cells;
  for (Eigen::Index t = 0; t < d.T(); ++t)
    for (Eigen::Index i = 0; i < d.N(); ++i)
      if (!d.w(i, t) && d.y_is_observed(i, t)) cells.emplace_back(i, t);
  return cells;
}

double transformed_sse(const PanelDataset& d, const Matrix& y0_hat, const std::vector<CellIndex>& cells) {
  auto tr = [&](double x) { return d.transform == Transform::log1p ? std::log1p(x) : x; };
  double sse = 0.0;
  for (const auto& [i, t] : cells) sse += std::pow(tr(y0_hat(i, t)) - tr(d.y_obs(i, t)), 2);
  return sse;
}

MethodResult run_log_linear(const PanelDataset& d, Method m, const MethodOptions& opts) {
  NBModelSpec spec = opts.nb;
  spec.variant = variant_of(m);
  const NBFit fit = fit_nb(d, spec);

  MethodResult r;
  r.method = m;
  r.y0_hat = impute_nb(fit, d);
  r.phi = fit.phi;
  r.converged = fit.converged;
  r.flagged = fit.poisson_limit || fit.covariance_singular;

  const std::vector<CellIndex> cells = untreated_cells(d);
  if (!cells.empty()) r.diagnostics.in_sample_mse = transformed_sse(d, r.y0_hat, cells) / cells.size();

  if (opts.out_of_sample && cells.size() >= 2) {
    std::vector<CellIndex> order = cells;
    Rng rng(opts.seed);
    shuffle(order, rng);
    const auto n = static_cast<int>(order.size());
    const int folds = opts.oos_folds <= 0 ? n : std::min(opts.oos_folds, n);
    double sse = 0.0;
    for (int f = 0; f < folds; ++f) {
      Mask exclude = Mask::Constant(d.N(), d.T(), false);
      std::vector<CellIndex> held;
      for (int c = f; c < n; c += folds) {
        held.push_back(order[static_cast<std::size_t>(c)]);
        exclude(held.back().first, held.back().second) = true;
      }
      const NBFit refit = fit_nb(d, spec, exclude);
      const Vector pred = impute_nb(refit, d, held);
      Matrix y0 = r.y0_hat;
      for (std::size_t c = 0; c < held.size(); ++c) y0(held[c].first, held[c].second) = pred(static_cast<Eigen::Index>(c));
      sse += transformed_sse(d, y0, held);
    }
    r.diagnostics.out_of_sample_mse = sse / n;
  }

  r.effect = estimate_delta(d.y_obs, r.y0_hat, d.w, d.y_observed);
  if (opts.interval != IntervalKind::none && !std::isnan(r.effect.delta_hat)) {
    const DeltaInterval di = delta_method_interval(fit, d);
    r.effect.lo = di.lo;
    r.effect.hi = di.hi;
    r.flagged = r.flagged || di.unreliable;
  }
  return r;
}

MethodResult run_completion(const PanelDataset& d, Method m, const MethodOptions& opts) {
  ImputeOptions io = opts.impute;
  io.controls = controls_of(m);
  io.out_of_sample = opts.out_of_sample;
  if (opts.out_of_sample) io.cv_folds = opts.oos_folds;
  const Imputation imp = impute_counterfactuals(d, opts.solver, io);

  MethodResult r;
  r.method = m;
  r.y0_hat = imp.y0_hat;
  r.diagnostics = imp.diagnostics;
  r.lambda = imp.lambda;
  r.converged = imp.converged;
  r.effect = estimate_delta(d.y_obs, r.y0_hat, d.w, d.y_observed);
  if (opts.interval != IntervalKind::none && !std::isnan(r.effect.delta_hat)) {
    const BootstrapResult b = bootstrap_interval(d, opts.solver, opts.bootstrap_reps, opts.seed, io);
    r.effect.lo = b.lo;
    r.effect.hi = b.hi;
    r.effect.bootstrap_draws = b.draws;
  }
  return r;
}

}  // namespace

MethodResult run_method(const PanelDataset& d, Method m, const MethodOptions& opts) {
  return is_completion_method(m) ? run_completion(d, m, opts) : run_log_linear(d, m, opts);
}

}  // namespace tcf
