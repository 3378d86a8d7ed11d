#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcf/completion.hpp"
#include "tcf/methods.hpp"
#include "tcf/panel.hpp"
#include "tcf/rate.hpp"
#include "tcf/sim.hpp"

namespace tcf {

struct SimulateConfig {
  std::vector<Scenario> scenarios{Scenario::S1, Scenario::S2, Scenario::S3};
  std::vector<Method> methods{Method::LL1, Method::LL2, Method::LL3S, Method::MC1, Method::TC};
  int reps = 20;
  SimScenario base;  // `which` and `seed` are set per run
};

struct RateConfig {
  int r = 2;
  int N = 100;
  int T = 8;
  std::vector<int> K_grid{1, 2, 4, 8};
  double noise_sd = 1.0;
  int seeds = 50;
  RateOptions options;
};

/*
 * Everything a command needs. Loaded from YAML; every key is optional
 * except those a command actually uses (data, primary_outcome for the
 * panel commands). Unknown keys are rejected so typos surface.
 */
struct RunConfig {
  std::string data;  // long-format CSV, relative to the config file
  std::string primary_outcome;
  std::vector<std::string> control_outcomes;
  std::vector<std::string> covariates;  // extra CSV columns, per unit-period
  std::optional<std::string> offset;    // per-unit exposure column
  Transform transform = Transform::log1p;

  std::vector<Method> methods{Method::LL1, Method::LL2, Method::LL3, Method::MC1, Method::MC2, Method::TC};
  // Warm-started path down to the final lambda, as in the simulations.
  SolverConfig solver = [] {
    SolverConfig s;
    s.continuation = true;
    return s;
  }();
  bool intercepts = true;
  bool select_lambda = true;
  int grid_points = 20;
  double grid_lo = 1e-3;
  double grid_hi = 1.0;
  std::vector<double> lambda_grid;  // explicit grid overrides the points/lo/hi grid
  int cv_folds = -1;                // -1: leave-one-out for N*T*K <= 5000, else 10
  bool intervals = true;
  int bootstrap_reps = 100;

  std::uint64_t seed = 1;
  std::string output = "tcf_out";

  SimulateConfig simulate;
  RateConfig rate;

  void validate() const;
};

/// Throws InputError on YAML syntax errors, unknown keys and bad values.
RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Canonical YAML rendering of the effective configuration; hashing it
/// identifies a run.
std::string dump_config(const RunConfig& cfg);

}  // namespace tcf
