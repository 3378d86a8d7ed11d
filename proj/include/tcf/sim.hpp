#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcf/methods.hpp"
#include "tcf/panel.hpp"

namespace tcf {

enum class Scenario { S1, S2, S3 };
enum class Missingness { MCAR, MCAR_within_season, propensity };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);
Missingness parse_missingness(const std::string& name);
std::string missingness_name(Missingness m);

/*
 * Count panels with one control outcome:
 *
 *   S1: Y0 ~ NB(exp(theta_i + eta_t)),           Z ~ NB(exp(theta_i + eta_t + tau))
 *   S2: both log means gain gamma_it
 *   S3: as S2, plus Poisson(delta_t) added to Y0 only
 *
 * theta_i, eta_t ~ Normal(4, 1); gamma_it ~ Normal(-(i + t) / 30, 1) with
 * 1-based i, t; delta_t = 5000 (t mod 2), seasons numbered from 1. The
 * treated outcome is Y1 = 0.9 Y0, kept real-valued. phi = 0 draws
 * Poisson counts.
 */
struct SimScenario {
  Scenario which = Scenario::S1;
  int N = 50;
  int T = 8;
  double theta_mean = 4.0;
  double theta_sd = 1.0;
  double eta_mean = 4.0;
  double eta_sd = 1.0;
  double gamma_sd = 1.0;
  double gamma_divisor = 30.0;
  double tau = -1.0;
  double phi = 0.01;
  double delta_amplitude = 5000.0;
  double effect = 0.9;
  int n_missing = 100;
  Missingness mechanism = Missingness::MCAR;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimData {
  PanelDataset data;  // y_obs = Y1 on treated cells, Y0 elsewhere
  Matrix y0;
  Matrix y1;
  bool mask_flagged = false;  // propensity mask fell back to uniform somewhere
};

/// Pure function of the scenario (including its seed).
SimData generate(const SimScenario& s);

struct PropensityMask {
  Mask mask;
  std::vector<int> flagged_columns;  // zero spread: uniform weights used
};

/// n_missing cells drawn without replacement with probability
/// proportional to 1 / (exp(Y*) + 1), Y* centred per season and divided
/// by sqrt(sum of squares) / (N - 1).
PropensityMask propensity_mask(const Matrix& y0, int n_missing, std::uint64_t seed);
Mask mcar_mask(int N, int T, int n_missing, std::uint64_t seed);
/// n_missing / T cells per season; the remainder goes one each to the
/// earliest seasons.
Mask mcar_within_season_mask(int N, int T, int n_missing, std::uint64_t seed);

struct MethodSummary {
  Method method = Method::TC;
  double mean_mse = 0.0;
  double mean_delta_hat = 0.0;
  double mean_mape = 0.0;
  std::vector<double> mse;        // per replication
  std::vector<double> delta_hat;  // per replication
  std::vector<std::vector<double>> mape_per_cell;  // per replication, n_missing each
  int failures = 0;             // replications where the fit threw
  int not_converged = 0;
  std::vector<std::string> errors;
};

struct SimResult {
  SimScenario scenario;
  int reps = 0;
  double truth_delta = 0.0;  // mean over replications of the oracle Delta
  std::vector<MethodSummary> per_method;
};

/// Settings the comparison uses for each method: lambda by 10-fold
/// cross-validation on a 20-point grid, unit and period effects, and a
/// continuation path for the final fit.
MethodOptions simulation_method_options();

/// Replication r uses the scenario with seed derive_seed(seed, r).
SimResult run_comparison(const SimScenario& s, const std::vector<Method>& methods, int reps, std::uint64_t seed,
                         const MethodOptions& opts = simulation_method_options());

}  // namespace tcf
