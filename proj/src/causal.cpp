#include <algorithm>
#include <cmath>

#include "causal_detail.hpp"
#include "tcf/causal.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"

namespace tcf {

AssembledTensor assemble_tensor(const PanelDataset& d) {
  d.validate();
  const auto n = static_cast<std::size_t>(d.N()), t = static_cast<std::size_t>(d.T()),
             k = static_cast<std::size_t>(d.K());
  AssembledTensor out;
  out.tensor = Tensor3({n, t, k});
  out.observed = Mask::Constant(d.N(), d.T() * d.K(), false);

  auto place = [&](const Matrix& raw, const Mask& obs, std::size_t layer) {
    const Matrix tr = forward_transform(obs.select(raw, Matrix::Zero(raw.rows(), raw.cols())), d.transform);
    for (std::size_t j = 0; j < t; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        if (obs(ii, jj)) {
          out.tensor(i, j, layer) = tr(ii, jj);
          out.observed(ii, static_cast<Eigen::Index>(j + t * layer)) = true;
        }
      }
  };

  Mask y0_obs = d.w.unaryExpr([](bool treated) { return !treated; });
  if (d.y_observed) y0_obs = y0_obs.array() && d.y_observed->array();
  place(d.y_obs, y0_obs, 0);
  for (std::size_t c = 0; c < d.controls.size(); ++c) place(d.controls[c].values, d.control_mask(c), c + 1);

  for (std::size_t layer = 0; layer < k; ++layer)
    for (std::size_t j = 0; j < t; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (!out.observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + t * layer)))
          out.missing.push_back({i, j, layer});
  return out;
}

namespace detail {

CompletionProblem build_problem(const PanelDataset& d, const ImputeOptions& opts) {
  const AssembledTensor a = assemble_tensor(d);
  const Eigen::Index n = d.N(), t = d.T();
  const Eigen::Index layers = opts.controls == ControlUse::layers ? d.K() : 1;
  const Matrix unfolded = unfold(a.tensor, 1).values;

  CompletionProblem p;
  p.T = t;
  p.y = MaskedMatrix(unfolded.leftCols(t * layers), a.observed.leftCols(t * layers));
  p.holdout = Mask::Constant(n, t * layers, false);
  p.holdout.leftCols(t) = a.observed.leftCols(t);

  p.cov.unit_intercepts = opts.intercepts;
  p.cov.column_intercepts = opts.intercepts;
  p.cov.first_col = 0;
  p.cov.block_cols = t;
  p.cov.unit_time_covariates = d.covariates;
  if (opts.controls == ControlUse::covariates) {
    for (std::size_t c = 0; c < d.controls.size(); ++c) {
      if (d.control_mask(c).count() != n * t) {
        throw InputError("control '" + d.controls[c].name + "' has missing cells and cannot be used as a covariate");
      }
      p.cov.unit_time_covariates.push_back(forward_transform(d.controls[c].values, d.transform));
    }
  }
  if (d.offsets) {
    const Vector log_n = d.offsets->array().log();
    p.cov.offset = log_n * Vector::Ones(t * layers).transpose();
  }
  return p;
}

SolvedProblem solve_problem(const CompletionProblem& p, const SolverConfig& cfg, const ImputeOptions& opts,
                            bool select) {
  SolvedProblem out;
  SolverConfig c = cfg;
  const auto candidates = static_cast<int>(p.holdout.count());
  if ((select || opts.out_of_sample) && candidates >= 2) {
    const int folds = opts.cv_folds <= 0 ? candidates : std::min(opts.cv_folds, candidates);
    std::vector<double> grid;
    if (!select) {
      grid = {cfg.lambda};
    } else if (!opts.lambda_grid.empty()) {
      grid = opts.lambda_grid;
    } else {
      grid = default_lambda_grid(p.y, p.cov, opts.grid_points, opts.grid_lo, opts.grid_hi);
    }
    const CvResult cv = cross_validate_lambda(p.y, grid, folds, opts.seed, cfg, p.cov, p.holdout);
    if (select) c.lambda = cv.lambda_star;
    out.cv_table = cv.table;
    out.cv_mse = cv.best_mse;
  }
  out.fit = complete_with_covariates(p.y, p.cov, c);
  return out;
}

}  // namespace detail

Imputation impute_counterfactuals(const PanelDataset& d, const SolverConfig& cfg, const ImputeOptions& opts) {
  const detail::CompletionProblem p = detail::build_problem(d, opts);
  detail::SolvedProblem s = detail::solve_problem(p, cfg, opts, opts.select_lambda);

  Imputation out;
  out.fitted = s.fit.theta_hat.leftCols(p.T);
  out.y0_hat = back_transform(out.fitted, d.transform);
  out.lambda = s.fit.lambda;
  out.rank_hat = s.fit.rank_hat;
  out.iterations = s.fit.iterations;
  out.converged = s.fit.converged;
  out.cv_table = std::move(s.cv_table);
  out.diagnostics.out_of_sample_mse = s.cv_mse;

  const auto used = p.holdout.count();
  if (used > 0) {
    const Matrix diff = out.fitted - p.y.values().leftCols(p.T);
    out.diagnostics.in_sample_mse = p.holdout.leftCols(p.T).select(diff.cwiseAbs2(), Matrix::Zero(d.N(), d.T())).sum() / used;
  }
  return out;
}

EffectEstimate estimate_delta(const Matrix& y1_obs, const Matrix& y0_hat, const Mask& w,
                              const std::optional<Mask>& recorded) {
  if (y1_obs.rows() != y0_hat.rows() || y1_obs.cols() != y0_hat.cols() || w.rows() != y1_obs.rows() ||
      w.cols() != y1_obs.cols()) {
    throw ShapeError("estimate_delta: outcome, imputation and treatment mask shapes differ");
  }
  if (recorded && (recorded->rows() != w.rows() || recorded->cols() != w.cols())) {
    throw ShapeError("estimate_delta: recorded mask has the wrong shape");
  }
  EffectEstimate e;
  double sum = 0.0;
  for (Eigen::Index t = 0; t < w.cols(); ++t) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (!w(i, t)) continue;
      ++e.n_treated;
      const double y1 = y1_obs(i, t);
      if ((recorded && !(*recorded)(i, t)) || y1 == 0.0) {
        ++e.n_excluded;
        continue;
      }
      if (!std::isfinite(y1) || !std::isfinite(y0_hat(i, t))) {
        throw InputError("estimate_delta: non-finite value at a treated cell");
      }
      const double rel = (y0_hat(i, t) - y1) / y1;
      e.per_cell.push_back({i, t, y1, y0_hat(i, t), rel});
      sum += rel;
    }
  }
  if (!e.per_cell.empty()) e.delta_hat = sum / static_cast<double>(e.per_cell.size());
  return e;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw InputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

BootstrapResult bootstrap_interval(const PanelDataset& d, const SolverConfig& cfg, int reps, std::uint64_t seed,
                                   const ImputeOptions& opts) {
  if (reps < 2) throw InputError("bootstrap: reps must be at least 2");
  const detail::CompletionProblem p = detail::build_problem(d, opts);
  const detail::SolvedProblem base = detail::solve_problem(p, cfg, opts, opts.select_lambda);
  SolverConfig fixed = cfg;
  fixed.lambda = base.fit.lambda;

  auto delta_of = [&](const CompletionFit& fit) {
    const Matrix y0 = back_transform(fit.theta_hat.leftCols(p.T), d.transform);
    return estimate_delta(d.y_obs, y0, d.w, d.y_observed).delta_hat;
  };

  BootstrapResult out;
  out.lambda = fixed.lambda;
  out.point = delta_of(base.fit);
  if (std::isnan(out.point)) throw InputError("bootstrap: no treated cell with a positive outcome");

  // Residuals below round-off of the data are treated as exact zeros so a
  // perfectly fitted panel is reproduced bit for bit.
  const Matrix& y = p.y.values();
  Matrix resid = Matrix::Zero(d.N(), p.T);
  for (Eigen::Index t = 0; t < p.T; ++t)
    for (Eigen::Index i = 0; i < d.N(); ++i)
      if (p.holdout(i, t)) {
        const double r = y(i, t) - base.fit.theta_hat(i, t);
        resid(i, t) = std::abs(r) <= 1e-10 * (1.0 + std::abs(y(i, t))) ? 0.0 : r;
      }

  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(p.T));
  for (Eigen::Index t = 0; t < p.T; ++t)
    for (Eigen::Index i = 0; i < d.N(); ++i)
      if (p.holdout(i, t)) rows[static_cast<std::size_t>(t)].push_back(i);

  out.draws.reserve(static_cast<std::size_t>(reps));
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    Matrix tilde = y;
    for (Eigen::Index t = 0; t < p.T; ++t) {
      const auto& col = rows[static_cast<std::size_t>(t)];
      if (col.size() < 2) continue;
      std::vector<Eigen::Index> perm = col;
      shuffle(perm, rng);
      for (std::size_t c = 0; c < col.size(); ++c) tilde(col[c], t) = y(col[c], t) + (resid(perm[c], t) - resid(col[c], t));
    }
    const CompletionFit fit = complete_with_covariates(MaskedMatrix(std::move(tilde), p.y.observed()), p.cov, fixed);
    out.draws.push_back(delta_of(fit));
  }
  out.lo = quantile(out.draws, 0.025);
  out.hi = quantile(out.draws, 0.975);
  return out;
}

}  // namespace tcf
