#include "tcf/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "tcf/csv.hpp"
#include "tcf/error.hpp"

namespace tcf {

void RunConfig::validate() const {
  for (const std::string& c : control_outcomes) {
    if (c == primary_outcome) throw InputError("config: control outcome '" + c + "' is also the primary outcome");
  }
  std::set<std::string> seen;
  for (const std::string& c : control_outcomes)
    if (!seen.insert(c).second) throw InputError("config: control outcome '" + c + "' listed twice");
  if (methods.empty()) throw InputError("config: no methods listed");
  solver.validate();
  if (grid_points < 1) throw InputError("config: cv.points must be at least 1");
  if (!(grid_lo > 0.0) || !(grid_hi >= grid_lo)) throw InputError("config: cv grid needs 0 < lo <= hi");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw InputError("config: cv.grid values must be nonnegative");
  if (cv_folds != -1 && cv_folds != 0 && cv_folds < 2) {
    throw InputError("config: cv.folds must be -1 (auto), 0 (leave-one-out) or at least 2");
  }
  if (bootstrap_reps < 2) throw InputError("config: bootstrap_reps must be at least 2");
  if (simulate.reps < 1) throw InputError("config: simulate.reps must be at least 1");
  if (simulate.scenarios.empty() || simulate.methods.empty()) {
    throw InputError("config: simulate needs at least one scenario and one method");
  }
  simulate.base.validate();
  if (rate.seeds < 1) throw InputError("config: rate.seeds must be at least 1");
}

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw InputError("config: '" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw InputError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError("config: bad value for '" + std::string(key) + "' in " + where);
  }
}

template <class T, class Parse>
void read_list(const YAML::Node& node, const char* key, std::vector<T>& out, Parse parse) {
  const YAML::Node v = node[key];
  if (!v) return;
  if (!v.IsSequence()) throw InputError("config: '" + std::string(key) + "' must be a list");
  out.clear();
  for (const auto& item : v) out.push_back(parse(item.as<std::string>()));
}

std::string identity(const std::string& s) { return s; }

void read_solver(const YAML::Node& n, SolverConfig& s) {
  check_keys(n, "solver", {"lambda", "max_iters", "tol", "rank_cap", "continuation", "continuation_stages"});
  read(n, "lambda", s.lambda, "solver");
  read(n, "max_iters", s.max_iters, "solver");
  read(n, "tol", s.tol, "solver");
  read(n, "continuation", s.continuation, "solver");
  read(n, "continuation_stages", s.continuation_stages, "solver");
  if (n["rank_cap"]) {
    int cap = 0;
    read(n, "rank_cap", cap, "solver");
    if (cap < 0) throw InputError("config: solver.rank_cap must be nonnegative (0: full SVD)");
    if (cap > 0) s.svd_rank_cap = cap;
  }
}

void read_simulate(const YAML::Node& n, SimulateConfig& s) {
  check_keys(n, "simulate", {"scenarios", "methods", "reps", "N", "T", "n_missing", "mechanism", "phi", "tau",
                             "effect", "delta_amplitude"});
  read_list(n, "scenarios", s.scenarios, parse_scenario);
  read_list(n, "methods", s.methods, parse_method);
  read(n, "reps", s.reps, "simulate");
  read(n, "N", s.base.N, "simulate");
  read(n, "T", s.base.T, "simulate");
  read(n, "n_missing", s.base.n_missing, "simulate");
  read(n, "phi", s.base.phi, "simulate");
  read(n, "tau", s.base.tau, "simulate");
  read(n, "effect", s.base.effect, "simulate");
  read(n, "delta_amplitude", s.base.delta_amplitude, "simulate");
  if (n["mechanism"]) s.base.mechanism = parse_missingness(n["mechanism"].as<std::string>());
}

void read_rate(const YAML::Node& n, RateConfig& r) {
  check_keys(n, "rate", {"r", "N", "T", "K_grid", "noise_sd", "seeds", "observed_fraction", "lambda_scale"});
  read(n, "r", r.r, "rate");
  read(n, "N", r.N, "rate");
  read(n, "T", r.T, "rate");
  read(n, "noise_sd", r.noise_sd, "rate");
  read(n, "seeds", r.seeds, "rate");
  read(n, "observed_fraction", r.options.observed_fraction, "rate");
  read(n, "lambda_scale", r.options.lambda_scale, "rate");
  read_list(n, "K_grid", r.K_grid, [](const std::string& s) { return static_cast<int>(parse_integer(s, "rate.K_grid")); });
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  try {
    check_keys(root, "the top level",
               {"data", "primary_outcome", "control_outcomes", "covariates", "offset", "transform", "methods",
                "solver", "intercepts", "cv", "intervals", "bootstrap_reps", "seed", "output", "simulate", "rate"});
    read(root, "data", c.data, "the top level");
    if (!c.data.empty() && std::filesystem::path(c.data).is_relative()) {
      c.data = (std::filesystem::path(base_dir) / c.data).lexically_normal().string();
    }
    read(root, "primary_outcome", c.primary_outcome, "the top level");
    read_list(root, "control_outcomes", c.control_outcomes, identity);
    read_list(root, "covariates", c.covariates, identity);
    if (root["offset"]) c.offset = root["offset"].as<std::string>();
    if (root["transform"]) c.transform = parse_transform(root["transform"].as<std::string>());
    read_list(root, "methods", c.methods, parse_method);
    if (root["solver"]) read_solver(root["solver"], c.solver);
    read(root, "intercepts", c.intercepts, "the top level");
    if (const YAML::Node cv = root["cv"]) {
      check_keys(cv, "cv", {"select_lambda", "points", "lo", "hi", "grid", "folds"});
      read(cv, "select_lambda", c.select_lambda, "cv");
      read(cv, "points", c.grid_points, "cv");
      read(cv, "lo", c.grid_lo, "cv");
      read(cv, "hi", c.grid_hi, "cv");
      read(cv, "folds", c.cv_folds, "cv");
      read_list(cv, "grid", c.lambda_grid, [](const std::string& s) { return parse_double(s, "cv.grid"); });
    }
    read(root, "intervals", c.intervals, "the top level");
    read(root, "bootstrap_reps", c.bootstrap_reps, "the top level");
    read(root, "seed", c.seed, "the top level");
    read(root, "output", c.output, "the top level");
    if (root["simulate"]) read_simulate(root["simulate"], c.simulate);
    if (root["rate"]) read_rate(root["rate"], c.rate);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

std::string dump_config(const RunConfig& c) {
  auto d = [](double x) { return format_double(x); };
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "data" << YAML::Value << c.data;
  e << YAML::Key << "primary_outcome" << YAML::Value << c.primary_outcome;
  e << YAML::Key << "control_outcomes" << YAML::Value << YAML::Flow << c.control_outcomes;
  e << YAML::Key << "covariates" << YAML::Value << YAML::Flow << c.covariates;
  if (c.offset) e << YAML::Key << "offset" << YAML::Value << *c.offset;
  e << YAML::Key << "transform" << YAML::Value << transform_name(c.transform);
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(method_name(m));
  e << YAML::Key << "methods" << YAML::Value << YAML::Flow << methods;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lambda" << YAML::Value << d(c.solver.lambda);
  e << YAML::Key << "max_iters" << YAML::Value << c.solver.max_iters;
  e << YAML::Key << "tol" << YAML::Value << d(c.solver.tol);
  e << YAML::Key << "rank_cap" << YAML::Value << (c.solver.svd_rank_cap ? *c.solver.svd_rank_cap : 0);
  e << YAML::Key << "continuation" << YAML::Value << c.solver.continuation;
  e << YAML::Key << "continuation_stages" << YAML::Value << c.solver.continuation_stages;
  e << YAML::EndMap;
  e << YAML::Key << "intercepts" << YAML::Value << c.intercepts;
  e << YAML::Key << "cv" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "select_lambda" << YAML::Value << c.select_lambda;
  e << YAML::Key << "points" << YAML::Value << c.grid_points;
  e << YAML::Key << "lo" << YAML::Value << d(c.grid_lo);
  e << YAML::Key << "hi" << YAML::Value << d(c.grid_hi);
  std::vector<std::string> grid;
  for (double l : c.lambda_grid) grid.push_back(d(l));
  e << YAML::Key << "grid" << YAML::Value << YAML::Flow << grid;
  e << YAML::Key << "folds" << YAML::Value << c.cv_folds;
  e << YAML::EndMap;
  e << YAML::Key << "intervals" << YAML::Value << c.intervals;
  e << YAML::Key << "bootstrap_reps" << YAML::Value << c.bootstrap_reps;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "output" << YAML::Value << c.output;

  const SimScenario& b = c.simulate.base;
  std::vector<std::string> scen, smethods;
  for (Scenario s : c.simulate.scenarios) scen.push_back(scenario_name(s));
  for (Method m : c.simulate.methods) smethods.push_back(method_name(m));
  e << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "scenarios" << YAML::Value << YAML::Flow << scen;
  e << YAML::Key << "methods" << YAML::Value << YAML::Flow << smethods;
  e << YAML::Key << "reps" << YAML::Value << c.simulate.reps;
  e << YAML::Key << "N" << YAML::Value << b.N;
  e << YAML::Key << "T" << YAML::Value << b.T;
  e << YAML::Key << "n_missing" << YAML::Value << b.n_missing;
  e << YAML::Key << "mechanism" << YAML::Value << missingness_name(b.mechanism);
  e << YAML::Key << "phi" << YAML::Value << d(b.phi);
  e << YAML::Key << "tau" << YAML::Value << d(b.tau);
  e << YAML::Key << "effect" << YAML::Value << d(b.effect);
  e << YAML::Key << "delta_amplitude" << YAML::Value << d(b.delta_amplitude);
  e << YAML::EndMap;

  e << YAML::Key << "rate" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "r" << YAML::Value << c.rate.r;
  e << YAML::Key << "N" << YAML::Value << c.rate.N;
  e << YAML::Key << "T" << YAML::Value << c.rate.T;
  e << YAML::Key << "K_grid" << YAML::Value << YAML::Flow << c.rate.K_grid;
  e << YAML::Key << "noise_sd" << YAML::Value << d(c.rate.noise_sd);
  e << YAML::Key << "seeds" << YAML::Value << c.rate.seeds;
  e << YAML::Key << "observed_fraction" << YAML::Value << d(c.rate.options.observed_fraction);
  e << YAML::Key << "lambda_scale" << YAML::Value << d(c.rate.options.lambda_scale);
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace tcf
