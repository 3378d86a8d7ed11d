#include "tcf/commands.hpp"

#include <cmath>
#include <filesystem>

#include "tcf/csv.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"
#include "tcf/report.hpp"

namespace tcf {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string unit_label(const PanelDataset& d, Eigen::Index i) {
  return d.unit_ids.empty() ? std::to_string(i + 1) : d.unit_ids[static_cast<std::size_t>(i)];
}

std::string period_label(const PanelDataset& d, Eigen::Index t) {
  return d.periods.empty() ? std::to_string(t + 1) : std::to_string(d.periods[static_cast<std::size_t>(t)]);
}

// Collects report tables and writes them, then the manifest.
class Report {
 public:
  explicit Report(const RunConfig& cfg) : cfg_(cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output, ec);
    if (ec) throw InputError("cannot create output directory '" + cfg.output + "': " + ec.message());
  }

  void add(const std::string& name, const CsvTable& t) {
    t.write(cfg_.output + "/" + name);
    out_.files.push_back(name);
  }

  CommandOutput finish(const std::string& command) {
    write_manifest(cfg_.output, command, cfg_.seed, dump_config(cfg_), out_.files);
    out_.files.push_back("manifest.json");
    return out_;
  }

 private:
  const RunConfig& cfg_;
  CommandOutput out_;
};

CsvTable gap_table(const LoadedPanel& p) {
  CsvTable t;
  t.header = {"unit_id", "period", "outcome_id"};
  for (const PanelGap& g : p.gaps) t.add_row({g.unit_id, std::to_string(g.period), g.outcome_id});
  return t;
}

std::string interval_name(Method m, bool intervals) {
  if (!intervals) return "none";
  return is_completion_method(m) ? "bootstrap" : "delta_method";
}

}  // namespace

LoadedPanel load_config_panel(const RunConfig& cfg) {
  if (cfg.data.empty()) throw InputError("config: 'data' (panel CSV path) is required for this command");
  if (cfg.primary_outcome.empty()) throw InputError("config: 'primary_outcome' is required for this command");
  PanelSchema schema;
  schema.primary_outcome = cfg.primary_outcome;
  schema.control_outcomes = cfg.control_outcomes;
  schema.covariates = cfg.covariates;
  schema.offset = cfg.offset;
  schema.transform = cfg.transform;
  return load_panel(cfg.data, schema);
}

MethodOptions method_options(const RunConfig& cfg, const PanelDataset& d) {
  MethodOptions o;
  o.solver = cfg.solver;
  o.impute.intercepts = cfg.intercepts;
  o.impute.select_lambda = cfg.select_lambda;
  o.impute.lambda_grid = cfg.lambda_grid;
  o.impute.grid_points = cfg.grid_points;
  o.impute.grid_lo = cfg.grid_lo;
  o.impute.grid_hi = cfg.grid_hi;
  const int folds = cfg.cv_folds >= 0 ? cfg.cv_folds : (d.N() * d.T() * d.K() <= 5000 ? 0 : 10);
  o.impute.cv_folds = folds;
  o.impute.seed = cfg.seed;
  o.out_of_sample = true;
  o.oos_folds = folds;
  o.interval = cfg.intervals ? IntervalKind::bootstrap : IntervalKind::none;
  o.bootstrap_reps = cfg.bootstrap_reps;
  o.seed = cfg.seed;
  return o;
}

CommandOutput cmd_fit(const RunConfig& cfg) {
  const LoadedPanel panel = load_config_panel(cfg);
  const PanelDataset& d = panel.data;
  const MethodOptions opts = method_options(cfg, d);

  CsvTable table;
  table.header = {"method", "in_mse",   "out_mse", "delta_hat", "lo",        "hi",       "interval",
                  "n_treated", "n_excluded", "lambda", "phi", "converged", "flagged"};
  CsvTable cells;
  cells.header = {"method", "unit_id", "period", "y1_obs", "y0_hat", "relative_effect"};
  for (Method m : cfg.methods) {
    const MethodResult r = run_method(d, m, opts);
    const bool completion = is_completion_method(m);
    table.add_row({method_name(m), fmt(r.diagnostics.in_sample_mse), fmt(r.diagnostics.out_of_sample_mse),
                   fmt(r.effect.delta_hat), fmt(r.effect.lo), fmt(r.effect.hi), interval_name(m, cfg.intervals),
                   std::to_string(r.effect.n_treated), std::to_string(r.effect.n_excluded),
                   completion ? fmt(r.lambda) : "NA", completion ? "NA" : fmt(r.phi), r.converged ? "1" : "0",
                   r.flagged ? "1" : "0"});
    for (const CellEffect& c : r.effect.per_cell) {
      cells.add_row({method_name(m), unit_label(d, c.unit), period_label(d, c.period), fmt(c.y1_obs),
                     fmt(c.y0_imputed), fmt(c.relative_effect)});
    }
  }
  Report rep(cfg);
  rep.add("fit_table.csv", table);
  rep.add("fit_cells.csv", cells);
  rep.add("gaps.csv", gap_table(panel));
  return rep.finish("fit");
}

CommandOutput cmd_cv(const RunConfig& cfg) {
  const LoadedPanel panel = load_config_panel(cfg);
  const PanelDataset& d = panel.data;
  MethodOptions opts = method_options(cfg, d);
  opts.interval = IntervalKind::none;

  CsvTable table;
  table.header = {"method", "lambda", "cv_mse", "selected"};
  for (Method m : cfg.methods) {
    MethodOptions mo = opts;
    mo.impute.select_lambda = true;
    const MethodResult r = run_method(d, m, mo);
    if (!is_completion_method(m)) {
      table.add_row({method_name(m), "NA", fmt(r.diagnostics.out_of_sample_mse), "1"});
      continue;
    }
    // The lambda path itself; recomputed here so the table lists every grid point.
    ImputeOptions io = mo.impute;
    io.controls = m == Method::MC1 ? ControlUse::ignored : m == Method::MC2 ? ControlUse::covariates : ControlUse::layers;
    const Imputation imp = impute_counterfactuals(d, mo.solver, io);
    for (const CvRow& row : imp.cv_table)
      table.add_row({method_name(m), fmt(row.lambda), fmt(row.mean_mse), row.lambda == imp.lambda ? "1" : "0"});
  }
  Report rep(cfg);
  rep.add("cv_table.csv", table);
  rep.add("gaps.csv", gap_table(panel));
  return rep.finish("cv");
}

CommandOutput cmd_bootstrap(const RunConfig& cfg) {
  const LoadedPanel panel = load_config_panel(cfg);
  const PanelDataset& d = panel.data;
  MethodOptions opts = method_options(cfg, d);
  opts.out_of_sample = false;

  CsvTable summary;
  summary.header = {"method", "delta_hat", "lo", "hi", "interval", "reps", "lambda"};
  CsvTable draws;
  draws.header = {"method", "rep", "delta_hat"};
  for (Method m : cfg.methods) {
    MethodOptions mo = opts;
    mo.interval = is_completion_method(m) ? IntervalKind::bootstrap : IntervalKind::delta_method;
    const MethodResult r = run_method(d, m, mo);
    const bool completion = is_completion_method(m);
    summary.add_row({method_name(m), fmt(r.effect.delta_hat), fmt(r.effect.lo), fmt(r.effect.hi),
                     interval_name(m, true), completion ? std::to_string(r.effect.bootstrap_draws.size()) : "0",
                     completion ? fmt(r.lambda) : "NA"});
    for (std::size_t b = 0; b < r.effect.bootstrap_draws.size(); ++b)
      draws.add_row({method_name(m), std::to_string(b + 1), fmt(r.effect.bootstrap_draws[b])});
  }
  Report rep(cfg);
  rep.add("bootstrap_summary.csv", summary);
  rep.add("bootstrap_draws.csv", draws);
  return rep.finish("bootstrap");
}

CommandOutput cmd_simulate(const RunConfig& cfg) {
  CsvTable summary;
  summary.header = {"scenario", "method", "reps",     "truth_delta", "mean_mse",
                    "mean_delta_hat", "mean_mape", "failures", "not_converged"};
  CsvTable reps;
  reps.header = {"scenario", "method", "rep", "mse", "delta_hat"};
  CsvTable mape;
  mape.header = {"scenario", "method", "rep", "cell", "mape"};

  for (std::size_t s = 0; s < cfg.simulate.scenarios.size(); ++s) {
    SimScenario sc = cfg.simulate.base;
    sc.which = cfg.simulate.scenarios[s];
    const SimResult res = run_comparison(sc, cfg.simulate.methods, cfg.simulate.reps, derive_seed(cfg.seed, s));
    const std::string name = scenario_name(sc.which);
    for (const MethodSummary& m : res.per_method) {
      summary.add_row({name, method_name(m.method), std::to_string(res.reps), fmt(res.truth_delta), fmt(m.mean_mse),
                       fmt(m.mean_delta_hat), fmt(m.mean_mape), std::to_string(m.failures),
                       std::to_string(m.not_converged)});
      for (std::size_t r = 0; r < m.delta_hat.size(); ++r) {
        reps.add_row({name, method_name(m.method), std::to_string(r + 1), fmt(m.mse[r]), fmt(m.delta_hat[r])});
        for (std::size_t c = 0; c < m.mape_per_cell[r].size(); ++c)
          mape.add_row({name, method_name(m.method), std::to_string(r + 1), std::to_string(c + 1),
                        fmt(m.mape_per_cell[r][c])});
      }
    }
  }
  Report rep(cfg);
  rep.add("sim_summary.csv", summary);
  rep.add("sim_replications.csv", reps);
  rep.add("sim_mape.csv", mape);
  return rep.finish("simulate");
}

CommandOutput cmd_rate(const RunConfig& cfg) {
  const RateConfig& rc = cfg.rate;
  CsvTable runs;
  runs.header = {"seed_index", "K", "masked_rmse", "lambda"};
  std::vector<std::vector<double>> rmse(rc.K_grid.size());
  int monotone = 0;
  for (int s = 0; s < rc.seeds; ++s) {
    const std::vector<RateRow> rows =
        rate_experiment(rc.r, rc.N, rc.T, rc.K_grid, rc.noise_sd, derive_seed(cfg.seed, static_cast<std::uint64_t>(s)),
                        rc.options);
    bool decreasing = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      runs.add_row({std::to_string(s + 1), std::to_string(rows[k].K), fmt(rows[k].masked_rmse), fmt(rows[k].lambda)});
      rmse[k].push_back(rows[k].masked_rmse);
      if (k > 0 && !(rows[k].masked_rmse < rows[k - 1].masked_rmse)) decreasing = false;
    }
    monotone += decreasing ? 1 : 0;
  }
  CsvTable table;
  table.header = {"K", "mean_rmse", "sd_rmse", "seeds", "strictly_decreasing_share"};
  for (std::size_t k = 0; k < rc.K_grid.size(); ++k) {
    const auto& v = rmse[k];
    double mean = 0.0, ss = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    table.add_row({std::to_string(rc.K_grid[k]), fmt(mean), fmt(sd), std::to_string(rc.seeds),
                   fmt(static_cast<double>(monotone) / rc.seeds)});
  }
  Report rep(cfg);
  rep.add("rate_table.csv", table);
  rep.add("rate_runs.csv", runs);
  return rep.finish("rate");
}

}  // namespace tcf
