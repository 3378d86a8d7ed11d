// tcf: command-line front end. Exit codes: 0 success, 1 input error,
// 2 numerical or internal error; errors go to stderr as one JSON line.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tcf/commands.hpp"
#include "tcf/error.hpp"

namespace {

int report_error(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor completion for causal effects in multi-outcome panels"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> reps;

  struct Sub {
    const char* name;
    const char* help;
    tcf::CommandOutput (*run)(const tcf::RunConfig&);
    bool needs_config;
  };
  const Sub subs[] = {
      {"fit", "Fit every configured method; in/out-of-sample MSE and effect estimates", tcf::cmd_fit, true},
      {"cv", "Cross-validated MSE over the lambda grid", tcf::cmd_cv, true},
      {"bootstrap", "Bootstrap (completion) and delta-method (log-linear) intervals", tcf::cmd_bootstrap, true},
      {"simulate", "Simulation comparison across scenarios", tcf::cmd_simulate, false},
      {"rate", "Masked RMSE as the number of outcomes K grows", tcf::cmd_rate, false},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    auto* opt = sc->add_option("-c,--config", config_path, "YAML configuration file");
    if (s.needs_config) opt->required();
    sc->add_option("--seed", seed, "Override the configured seed");
    sc->add_option("-o,--out", out, "Output directory (overrides the config)");
    if (std::string(s.name) == "simulate") sc->add_option("--reps", reps, "Replications per scenario");
    registered.emplace_back(sc, &s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 1);
  }

  try {
    for (const auto& [sc, s] : registered) {
      if (!sc->parsed()) continue;
      tcf::RunConfig cfg = config_path.empty() ? tcf::RunConfig{} : tcf::load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (out) cfg.output = *out;
      if (reps) cfg.simulate.reps = *reps;
      cfg.validate();
      const tcf::CommandOutput res = s->run(cfg);
      for (const std::string& f : res.files) std::cout << (std::filesystem::path(cfg.output) / f).string() << '\n';
      return 0;
    }
  } catch (const tcf::InputError& e) {
    return report_error("input", e.what(), 1);
  } catch (const tcf::NumericalError& e) {
    return report_error("numerical", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 2);
  }
  return 2;
}
