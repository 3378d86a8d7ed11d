#pragma once

#include <string>
#include <vector>

#include "tcf/config.hpp"
#include "tcf/methods.hpp"
#include "tcf/panel_csv.hpp"

namespace tcf {

/// Report files written (relative to cfg.output), manifest.json last.
struct CommandOutput {
  std::vector<std::string> files;
};

/*
 * Each command writes CSV tables plus manifest.json into cfg.output
 * (created if needed). Output depends only on the config, so reruns are
 * byte-identical.
 *
 *   fit        fit_table.csv (method, in_mse, out_mse, delta_hat, lo, hi,
 *              ...), fit_cells.csv, gaps.csv
 *   cv         cv_table.csv: cross-validated MSE per lambda / method
 *   bootstrap  bootstrap_summary.csv, bootstrap_draws.csv
 *   simulate   sim_summary.csv, sim_replications.csv, sim_mape.csv
 *   rate       rate_table.csv, rate_runs.csv
 */
CommandOutput cmd_fit(const RunConfig& cfg);
CommandOutput cmd_cv(const RunConfig& cfg);
CommandOutput cmd_bootstrap(const RunConfig& cfg);
CommandOutput cmd_simulate(const RunConfig& cfg);
CommandOutput cmd_rate(const RunConfig& cfg);

/// The panel named by the config's data / outcome / covariate keys.
LoadedPanel load_config_panel(const RunConfig& cfg);

/// Method settings derived from the config for a given panel; folds are
/// leave-one-out when N*T*K <= 5000 and 10 otherwise unless set.
MethodOptions method_options(const RunConfig& cfg, const PanelDataset& d);

}  // namespace tcf
