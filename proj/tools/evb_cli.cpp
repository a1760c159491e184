#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "evb/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "global seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "parallel fits (1 = reproducible)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory");
}

evb::ExperimentConfig resolve(const Common& c, CLI::App* cmd) {
  evb::ExperimentConfig config = evb::load_config(c.config);
  evb::apply_environment(config);
  // Command-line flags win over both the file and the environment.
  if (cmd->count("--seed") > 0) config.seed = c.seed;
  if (cmd->count("--threads") > 0) config.threads = c.threads;
  if (!c.out.empty()) config.out_dir = c.out;
  return config;
}

int report(const evb::ExperimentSummary& s) {
  int failed = 0;
  for (const auto& o : s.outcomes) {
    if (o.ok) {
      std::cout << o.method << ": ok (" << o.seconds << " s)\n";
    } else {
      std::cout << o.method << ": skipped: " << o.error << "\n";
      ++failed;
    }
  }
  std::cout << "artifacts in " << s.out_dir.string() << "\n";
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Bayes for state space models"};
  app.require_subcommand(1);

  Common sim_opts, fit_opts, sweep_opts, diag_opts, cmp_opts;
  auto* sim = app.add_subcommand("simulate", "simulate data from the configured model");
  add_common(sim, sim_opts, true);
  auto* fit = app.add_subcommand("fit", "fit every configured method and write artifacts");
  add_common(fit, fit_opts, true);
  auto* sweep = app.add_subcommand("sweep", "run the configured sample-size or recalibration sweep");
  add_common(sweep, sweep_opts, true);

  auto* diag = app.add_subcommand("diagnose", "summarise a draws CSV (and optional states CSV)");
  std::string draws_path, states_path;
  evb::DiagnosticsOptions dopts;
  diag->add_option("--draws", draws_path, "parameter draws CSV")->required()->check(CLI::ExistingFile);
  diag->add_option("--states", states_path, "state draws CSV")->check(CLI::ExistingFile);
  diag->add_option("--window-start", dopts.window_start, "first state (zero-based) of the correlation window");
  diag->add_option("--window-length", dopts.window_length);
  diag->add_option("--max-lag", dopts.max_lag);
  diag->add_option("--out", diag_opts.out, "write the JSON report here instead of stdout");

  auto* cmp = app.add_subcommand("compare", "tabulate report_*.json files of a run directory");
  cmp->add_option("--out", cmp_opts.out, "run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      evb::ExperimentConfig config = resolve(sim_opts, sim);
      if (!config.simulate) throw evb::DomainError("simulate: config has no data.simulate block");
      config.methods.clear();
      const auto s = evb::run_experiment(config);
      std::cout << "wrote " << (s.out_dir / "data.csv").string() << "\n";
      return 0;
    }
    if (fit->parsed()) return report(evb::run_experiment(resolve(fit_opts, fit))) > 0 ? 2 : 0;
    if (sweep->parsed()) {
      int failed = 0;
      for (const auto& s : evb::run_sweep(resolve(sweep_opts, sweep))) failed += report(s);
      return failed > 0 ? 2 : 0;
    }
    if (diag->parsed()) {
      const evb::DrawSet draws = evb::read_drawset_csv(draws_path);
      evb::DrawSet states;
      if (!states_path.empty()) states = evb::read_drawset_csv(states_path);
      auto rep = evb::diagnostics(draws, states_path.empty() ? nullptr : &states, dopts);
      rep.method = fs::path(draws_path).stem().string();
      const std::string json = evb::report_to_json(rep);
      if (diag_opts.out.empty()) {
        std::cout << json << "\n";
      } else {
        std::ofstream(diag_opts.out, std::ios::binary) << json;
      }
      return 0;
    }
    if (cmp->parsed()) {
      std::cout << "wrote " << evb::compare_reports(cmp_opts.out).string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
