#include "tcf/sim.hpp"

#include <cmath>
#include <numeric>

#include "tcf/error.hpp"
#include "tcf/random.hpp"

namespace tcf {

Scenario parse_scenario(const std::string& name) {
  if (name == "S1") return Scenario::S1;
  if (name == "S2") return Scenario::S2;
  if (name == "S3") return Scenario::S3;
  throw InputError("unknown scenario '" + name + "' (expected S1, S2 or S3)");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
  }
  return "?";
}

Missingness parse_missingness(const std::string& name) {
  if (name == "MCAR") return Missingness::MCAR;
  if (name == "MCAR_within_season") return Missingness::MCAR_within_season;
  if (name == "propensity") return Missingness::propensity;
  throw InputError("unknown missingness mechanism '" + name + "' (expected MCAR, MCAR_within_season or propensity)");
}

std::string missingness_name(Missingness m) {
  switch (m) {
    case Missingness::MCAR: return "MCAR";
    case Missingness::MCAR_within_season: return "MCAR_within_season";
    case Missingness::propensity: return "propensity";
  }
  return "?";
}

void SimScenario::validate() const {
  if (N < 2 || T < 1) throw InputError("scenario: need N >= 2 and T >= 1");
  if (n_missing < 0 || n_missing > N * T) throw InputError("scenario: n_missing must lie in [0, N*T]");
  if (!(phi >= 0.0)) throw InputError("scenario: phi must be nonnegative");
  if (!(theta_sd >= 0.0) || !(eta_sd >= 0.0) || !(gamma_sd >= 0.0)) {
    throw InputError("scenario: standard deviations must be nonnegative");
  }
  if (!(gamma_divisor > 0.0)) throw InputError("scenario: gamma divisor must be positive");
  if (!(delta_amplitude >= 0.0)) throw InputError("scenario: delta amplitude must be nonnegative");
  if (!(effect > 0.0)) throw InputError("scenario: effect multiplier must be positive");
}

Mask mcar_mask(int N, int T, int n_missing, std::uint64_t seed) {
  if (n_missing < 0 || n_missing > N * T) throw InputError("mask: n_missing must lie in [0, N*T]");
  Rng rng(seed);
  Mask m = Mask::Constant(N, T, false);
  for (std::size_t c : sample_without_replacement(rng, static_cast<std::size_t>(N * T), static_cast<std::size_t>(n_missing)))
    m(static_cast<Eigen::Index>(c) % N, static_cast<Eigen::Index>(c) / N) = true;
  return m;
}

Mask mcar_within_season_mask(int N, int T, int n_missing, std::uint64_t seed) {
  if (n_missing < 0 || n_missing > N * T) throw InputError("mask: n_missing must lie in [0, N*T]");
  Rng rng(seed);
  Mask m = Mask::Constant(N, T, false);
  for (int t = 0; t < T; ++t) {
    // At most N: n_missing <= N*T.
    const int take = n_missing / T + (t < n_missing % T ? 1 : 0);
    for (std::size_t i : sample_without_replacement(rng, static_cast<std::size_t>(N), static_cast<std::size_t>(take)))
      m(static_cast<Eigen::Index>(i), t) = true;
  }
  return m;
}

PropensityMask propensity_mask(const Matrix& y0, int n_missing, std::uint64_t seed) {
  const Eigen::Index n = y0.rows(), t = y0.cols();
  if (n < 2) throw InputError("propensity mask: need at least two units");
  if (n_missing < 0 || n_missing > n * t) throw InputError("propensity mask: n_missing must lie in [0, N*T]");
  PropensityMask out;
  std::vector<double> weights(static_cast<std::size_t>(n * t));
  for (Eigen::Index j = 0; j < t; ++j) {
    const double mean = y0.col(j).mean();
    const double scale = std::sqrt((y0.col(j).array() - mean).square().sum()) / static_cast<double>(n - 1);
    const bool flat = !(scale > 0.0);
    if (flat) out.flagged_columns.push_back(static_cast<int>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = 1.0;
      if (!flat) {
        const double ystar = (y0(i, j) - mean) / scale;
        // 1 / (exp(y*) + 1) without overflow.
        w = ystar > 0.0 ? std::exp(-ystar) / (1.0 + std::exp(-ystar)) : 1.0 / (std::exp(ystar) + 1.0);
      }
      weights[static_cast<std::size_t>(i + n * j)] = w;
    }
  }
  Rng rng(seed);
  out.mask = Mask::Constant(n, t, false);
  for (std::size_t c : weighted_sample_without_replacement(rng, weights, static_cast<std::size_t>(n_missing)))
    out.mask(static_cast<Eigen::Index>(c) % n, static_cast<Eigen::Index>(c) / n) = true;
  return out;
}

SimData generate(const SimScenario& s) {
  s.validate();
  Rng rng(s.seed);
  const int n = s.N, tt = s.T;
  Vector theta(n), eta(tt);
  for (int i = 0; i < n; ++i) theta(i) = draw_normal(rng, s.theta_mean, s.theta_sd);
  for (int t = 0; t < tt; ++t) eta(t) = draw_normal(rng, s.eta_mean, s.eta_sd);
  Matrix gamma = Matrix::Zero(n, tt);
  if (s.which != Scenario::S1) {
    for (int t = 0; t < tt; ++t)
      for (int i = 0; i < n; ++i) gamma(i, t) = draw_normal(rng, -static_cast<double>((i + 1) + (t + 1)) / s.gamma_divisor, s.gamma_sd);
  }

  SimData out;
  out.y0.resize(n, tt);
  Matrix z(n, tt);
  for (int t = 0; t < tt; ++t)
    for (int i = 0; i < n; ++i) {
      const double mu = theta(i) + eta(t) + gamma(i, t);
      out.y0(i, t) = draw_negative_binomial(rng, std::exp(mu), s.phi);
      z(i, t) = draw_negative_binomial(rng, std::exp(mu + s.tau), s.phi);
    }
  if (s.which == Scenario::S3) {
    for (int t = 0; t < tt; ++t) {
      const double delta_t = s.delta_amplitude * static_cast<double>((t + 1) % 2);
      for (int i = 0; i < n; ++i) out.y0(i, t) += draw_poisson(rng, delta_t);
    }
  }
  out.y1 = s.effect * out.y0;

  const std::uint64_t mask_seed = derive_seed(s.seed, 1);
  Mask w;
  switch (s.mechanism) {
    case Missingness::MCAR: w = mcar_mask(n, tt, s.n_missing, mask_seed); break;
    case Missingness::MCAR_within_season: w = mcar_within_season_mask(n, tt, s.n_missing, mask_seed); break;
    case Missingness::propensity: {
      PropensityMask pm = propensity_mask(out.y0, s.n_missing, mask_seed);
      out.mask_flagged = !pm.flagged_columns.empty();
      w = std::move(pm.mask);
      break;
    }
  }

  PanelDataset& d = out.data;
  d.y_obs = w.select(out.y1, out.y0);
  d.w = std::move(w);
  d.controls.push_back({"Z", z, std::nullopt});
  d.transform = Transform::log1p;
  d.outcome_name = "Y";
  for (int t = 0; t < tt; ++t) d.periods.push_back(t + 1);
  return out;
}

MethodOptions simulation_method_options() {
  MethodOptions o;
  o.solver.max_iters = 500;
  o.solver.tol = 1e-7;
  o.solver.continuation = true;
  o.impute.intercepts = true;
  o.impute.select_lambda = true;
  o.impute.grid_points = 20;
  o.impute.grid_lo = 1e-3;
  o.impute.grid_hi = 1.0;
  o.impute.cv_folds = 10;
  return o;
}

SimResult run_comparison(const SimScenario& s, const std::vector<Method>& methods, int reps, std::uint64_t seed,
                         const MethodOptions& opts) {
  if (reps < 1) throw InputError("comparison: reps must be at least 1");
  if (methods.empty()) throw InputError("comparison: no methods requested");
  s.validate();
  SimResult res;
  res.scenario = s;
  res.reps = reps;
  for (Method m : methods) {
    MethodSummary summary;
    summary.method = m;
    res.per_method.push_back(std::move(summary));
  }

  for (int rep = 0; rep < reps; ++rep) {
    SimScenario sr = s;
    sr.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
    const SimData sim = generate(sr);
    res.truth_delta += estimate_delta(sim.y1, sim.y0, sim.data.w).delta_hat / reps;

    for (MethodSummary& summary : res.per_method) {
      MethodOptions mo = opts;
      mo.seed = derive_seed(sr.seed, 2);
      mo.impute.seed = mo.seed;
      MethodResult r;
      try {
        r = run_method(sim.data, summary.method, mo);
      } catch (const std::exception& e) {
        ++summary.failures;
        summary.errors.push_back("rep " + std::to_string(rep) + ": " + e.what());
        continue;
      }
      if (!r.converged) ++summary.not_converged;
      double sse = 0.0;
      std::vector<double> mape;
      for (Eigen::Index t = 0; t < sim.y0.cols(); ++t)
        for (Eigen::Index i = 0; i < sim.y0.rows(); ++i) {
          if (!sim.data.w(i, t)) continue;
          sse += std::pow(std::log1p(r.y0_hat(i, t)) - std::log1p(sim.y0(i, t)), 2);
          mape.push_back(std::abs(r.y0_hat(i, t) - sim.y0(i, t)) / sim.y0(i, t));
        }
      summary.mse.push_back(mape.empty() ? 0.0 : sse / static_cast<double>(mape.size()));
      summary.delta_hat.push_back(r.effect.delta_hat);
      summary.mape_per_cell.push_back(std::move(mape));
    }
  }

  for (MethodSummary& summary : res.per_method) {
    auto mean = [](const std::vector<double>& v) {
      double sum = 0.0;
      int count = 0;
      for (double x : v)
        if (std::isfinite(x)) sum += x, ++count;
      return count ? sum / count : std::nan("");
    };
    summary.mean_mse = mean(summary.mse);
    summary.mean_delta_hat = mean(summary.delta_hat);
    std::vector<double> all;
    for (const auto& rep : summary.mape_per_cell) all.insert(all.end(), rep.begin(), rep.end());
    summary.mean_mape = mean(all);
  }
  return res;
}

}  // namespace tcf
