// rydsim command-line front end: run named experiments, list the registry,
// or verify the control-synthesis oracles.

#include <iostream>

#include "CLI11.hpp"
#include "rydsim/experiments.hpp"

namespace {

rydsim::ExperimentConfig resolve_config(const std::string& config_path,
                                        const std::string& experiment) {
  if (!config_path.empty()) return rydsim::load_config(config_path);
  if (!experiment.empty()) return rydsim::default_config(experiment);
  throw rydsim::ConfigError("provide --config FILE or --experiment NAME");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rydsim: driven Rydberg-chain GHZ preparation simulator"};
  app.require_subcommand(1);

  std::string config_path, experiment, out_dir = ".", format = "csv",
                                       model;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("--config", config_path, "Config file (key = value lines)");
  run->add_option("--experiment", experiment, "Experiment name (defaults)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads for sweep grids");
  run->add_option("--model", model, "Override model: full | effective");
  run->add_option("--format", format, "Output format: csv | json");

  CLI::App* list = app.add_subcommand("list", "List available experiments");

  CLI::App* verify =
      app.add_subcommand("verify", "Check synthesis and model oracles");
  verify->add_option("--config", config_path, "Config file");
  verify->add_option("--experiment", experiment, "Experiment name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& e : rydsim::experiment_registry())
        std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (verify->parsed()) {
      if (config_path.empty() && experiment.empty())
        experiment = "fig3-populations";
      const auto cfg = resolve_config(config_path, experiment);
      auto [ok, report] = rydsim::verify_report(cfg);
      std::cout << report << "\n";
      return ok ? 0 : 1;
    }
    // run
    const auto cfg = resolve_config(config_path, experiment);
    rydsim::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    opts.format = format;
    if (!model.empty()) {
      if (model == "full")
        opts.model = rydsim::ModelKind::full;
      else if (model == "effective")
        opts.model = rydsim::ModelKind::effective;
      else
        throw rydsim::ConfigError("unknown model: " + model);
    }
    const int rc = rydsim::run_experiment(cfg, opts);
    if (rc != 0) std::cerr << "numerical failure (see error file)\n";
    return rc;
  } catch (const rydsim::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
}
