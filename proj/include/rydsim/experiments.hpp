#pragma once

// Named experiment registry: declarative configs, sweep execution over
// error/noise/control grids, and CSV/JSON emission.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rydsim/ghz.hpp"

namespace rydsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration with strict keys; values stay as strings and
// are interpreted on access. Keys carry their units (e.g. V_over_2pi_MHz).
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

const std::vector<ExperimentInfo>& experiment_registry();

ExperimentConfig default_config(const std::string& experiment);

// Strict parser for "key = value" lines ('#' comments); unknown keys or
// unknown experiment names raise ConfigError.
ExperimentConfig load_config(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  std::string format = "csv";  // csv | json
  std::optional<ModelKind> model;
};

struct SweepRow {
  std::vector<double> axes;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> metadata;
};

struct SweepResult {
  std::vector<std::string> axis_names;
  std::vector<std::string> metric_names;
  std::vector<SweepRow> rows;
  // Time series of the last run, for single-run experiments.
  RunResult trace;
  std::map<std::string, std::string> metadata;
};

// Executes the grid (optionally across threads, deterministically ordered).
SweepResult execute_experiment(const ExperimentConfig& cfg,
                               const RunOptions& opts);

// Executes and writes <experiment>.csv plus manifest.json into out_dir.
// Returns 0 on success, 3 on numerical failure.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

// Runs the synthesis/effective-model oracles on the config's parameters.
// Returns pass flag and a JSON report.
std::pair<bool, std::string> verify_report(const ExperimentConfig& cfg);

// Builds the ProtocolPlan / NoiseParams / ErrorSpec triple of one grid cell.
struct CellSpec {
  ProtocolPlan plan;
  NoiseParams noise;
  ErrorSpec error;
  ProtocolRunConfig run;
};
CellSpec cell_from_config(const ExperimentConfig& cfg);

}  // namespace rydsim
