#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evb/diagnostics.hpp"
#include "evb/particle.hpp"
#include "evb/registry.hpp"
#include "evb/sv_mcmc.hpp"
#include "evb/vb.hpp"

namespace evb {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"efficient-vb", "gaussian-vb", "hybrid-vb", "mcmc", "pmcmc"};
  return m;
}

struct SimulationSpec {
  Vector theta;  // constrained
  int T = 500;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::string mode;  // "T" or "recalibration"; empty for none
  std::vector<int> values;
};

struct ExperimentConfig {
  std::string model = "sv";
  ModelOptions model_options;
  std::filesystem::path data_path;        // used when no simulation block
  std::optional<SimulationSpec> simulate;
  std::vector<std::string> methods;
  std::map<std::string, VbConfig> vb;     // per VB method
  SvMcmcConfig mcmc;
  PmcmcConfig pmcmc;
  int param_draws = 10000;
  int state_draws = 1000;
  DiagnosticsOptions diagnostics;
  SweepSpec sweep;
  std::filesystem::path out_dir = "evb_out";
  std::uint64_t seed = 42;
  int threads = 1;

  VbConfig vb_config(const std::string& method) const;
};

// JSON config; unknown keys are rejected so typos do not go unnoticed.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);
// EVB_OUT_DIR and EVB_THREADS override the output directory and thread count.
void apply_environment(ExperimentConfig& config);

struct MethodOutcome {
  std::string method;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  DiagnosticsReport report;
  std::vector<std::pair<std::string, double>> phases;
};

struct ExperimentSummary {
  std::filesystem::path out_dir;
  std::vector<MethodOutcome> outcomes;
};

// Loads or simulates the data as configured. Simulation also returns the true states.
Dataset prepare_data(const ExperimentConfig& config, StateMatrix* true_states = nullptr);

// Writes data.csv, config.json and, for each method, draws/states/elbo CSVs and a
// JSON report, plus timings.csv. Incompatible or failing methods are recorded and skipped.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Runs the configured sweep; one subdirectory per point plus sweep.csv.
std::vector<ExperimentSummary> run_sweep(const ExperimentConfig& config);

// Collects report_*.json in a directory into comparison.csv (method, parameter, mean, quantiles).
std::filesystem::path compare_reports(const std::filesystem::path& dir);

// Whether a method can run on a model.
bool method_supports(const std::string& method, const StateSpaceModel& model);

}  // namespace evb
