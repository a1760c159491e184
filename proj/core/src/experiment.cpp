#include "evb/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "evb/csv.hpp"
#include "json.hpp"

namespace evb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw DomainError("config: '" + where + "' must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw DomainError("config: unknown key '" + item.key() + "' in " + where);
  }
}

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void parse_vb(const json& j, VbConfig& c, const std::string& where) {
  check_keys(j, {"iterations", "factors", "recalibration_interval", "paths", "init_d", "adadelta_decay",
                 "adadelta_eps", "init", "state_init_scale", "state_diag_floor", "stop_on_plateau",
                 "plateau_window", "plateau_tol"}, where);
  c.iterations = j.value("iterations", c.iterations);
  c.factors = j.value("factors", c.factors);
  c.recalibration_interval = j.value("recalibration_interval", c.recalibration_interval);
  c.paths = j.value("paths", c.paths);
  c.init_d = j.value("init_d", c.init_d);
  c.adadelta_decay = j.value("adadelta_decay", c.adadelta_decay);
  c.adadelta_eps = j.value("adadelta_eps", c.adadelta_eps);
  if (j.contains("init")) c.init_constrained = to_vector(j["init"]);
  c.state_init_scale = j.value("state_init_scale", c.state_init_scale);
  c.state_diag_floor = j.value("state_diag_floor", c.state_diag_floor);
  c.stop_on_plateau = j.value("stop_on_plateau", c.stop_on_plateau);
  c.plateau_window = j.value("plateau_window", c.plateau_window);
  c.plateau_tol = j.value("plateau_tol", c.plateau_tol);
}

json vb_to_json(const VbConfig& c) {
  json j = {{"iterations", c.iterations},
            {"factors", c.factors},
            {"recalibration_interval", c.recalibration_interval},
            {"paths", c.paths},
            {"init_d", c.init_d},
            {"adadelta_decay", c.adadelta_decay},
            {"adadelta_eps", c.adadelta_eps},
            {"state_init_scale", c.state_init_scale},
            {"state_diag_floor", c.state_diag_floor},
            {"stop_on_plateau", c.stop_on_plateau},
            {"plateau_window", c.plateau_window},
            {"plateau_tol", c.plateau_tol}};
  if (c.init_constrained.size() > 0) j["init"] = from_vector(c.init_constrained);
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_elbo_csv(const fs::path& path, const std::vector<double>& trace) {
  CsvWriter out(path, {"iteration", "elbo"});
  for (std::size_t i = 0; i < trace.size(); ++i) out.write_values({static_cast<double>(i + 1), trace[i]});
}

std::uint64_t method_seed(std::uint64_t seed, const std::string& method) {
  const auto& m = known_methods();
  const auto idx = static_cast<std::uint64_t>(std::find(m.begin(), m.end(), method) - m.begin());
  return derive_seed(seed, 100 + idx);
}

struct MethodArtifacts {
  DrawSet params;
  DrawSet states;
  std::vector<double> elbo;
  std::vector<std::pair<std::string, double>> phases;
  std::optional<KernelParams> kernel;
};

MethodArtifacts run_method(const std::string& method, const StateSpaceModel& model, const Dataset& data,
                           const ExperimentConfig& config) {
  const std::uint64_t seed = method_seed(config.seed, method);
  MethodArtifacts art;
  art.params.names = model.param_names();
  art.states.names = state_column_names(data.T(), model.dim_state());
  Rng draw_rng = make_rng(seed, 7);
  const auto t0 = std::chrono::steady_clock::now();

  auto vb_phases = [&](const FitResult& fit) {
    art.phases = {{"calibration", fit.timings.calibration},
                  {"sampling", fit.timings.sampling},
                  {"gradient", fit.timings.gradient},
                  {"total", fit.timings.total()}};
  };

  if (method == "efficient-vb") {
    const FitResult fit = fit_efficient_vb(model, data, config.vb_config(method), seed);
    art.params.values = draw_constrained(model, fit.q, config.param_draws, draw_rng);
    art.states.values = draw_state_paths(state_approximation(model, fit), config.state_draws, draw_rng);
    art.elbo = fit.elbo;
    art.kernel = fit.kernel;
    vb_phases(fit);
  } else if (method == "gaussian-vb") {
    const FitResult fit = fit_gaussian_vb(model, data, config.vb_config(method), seed);
    art.params.values = draw_constrained(model, fit.q, config.param_draws, draw_rng);
    art.states.values = draw_state_paths(*fit.state_block, config.state_draws, draw_rng);
    art.elbo = fit.elbo;
    vb_phases(fit);
  } else if (method == "hybrid-vb") {
    if (model.name() != "sv") throw CapabilityError("hybrid-vb is only available for the sv model");
    const FitResult fit = fit_hybrid_vb(model, data, config.vb_config(method), seed);
    art.params.values = draw_constrained(model, fit.q, config.param_draws, draw_rng);
    // States: the conditional sampler run along draws of theta from q.
    SvConditionalStateSampler sampler(data.y.col(0), config.mcmc);
    StateMatrix x = StateMatrix::Constant(data.T(), 1, fit.phi[0]);
    const Matrix theta = draw_constrained(model, fit.q, 100 + config.state_draws, draw_rng);
    art.states.values.resize(config.state_draws, data.T());
    for (int s = 0; s < 100 + config.state_draws; ++s) {
      sampler(theta.row(s).transpose(), x, draw_rng);
      if (s >= 100) art.states.values.row(s - 100) = x.col(0).transpose();
    }
    art.elbo = fit.elbo;
    vb_phases(fit);
  } else if (method == "mcmc") {
    if (model.name() != "sv") throw CapabilityError("mcmc is only available for the sv model");
    SvMcmcConfig mc = config.mcmc;
    mc.state_draws = config.state_draws;
    if (auto* ar1 = dynamic_cast<const Ar1Model*>(&model)) {
      mc.prior_alpha = ar1->alpha();
      mc.prior_beta = ar1->beta();
    }
    const SvMcmcResult r = mcmc_sv(data.y.col(0), mc, seed);
    art.params.values = r.params;
    art.states.values = r.states;
    art.phases = {{"total", r.seconds}};
  } else if (method == "pmcmc") {
    if (model.dim_state() != 1) throw CapabilityError("pmcmc is only available for univariate models");
    const Vector u0 = model.transform(model.initial_guess(data));
    const PmcmcResult r = pmcmc_model(model, data, u0, config.pmcmc, seed);
    art.params.values.resize(r.draws.rows(), model.dim_theta());
    for (Eigen::Index s = 0; s < r.draws.rows(); ++s)
      art.params.values.row(s) = model.inverse_transform(r.draws.row(s).transpose()).transpose();
    art.states.values.resize(0, static_cast<Eigen::Index>(art.states.names.size()));
    art.phases = {{"total", r.seconds}};
  } else {
    throw DomainError("unknown method '" + method + "'");
  }
  if (art.phases.empty()) art.phases = {{"total", seconds_since(t0)}};
  return art;
}

MethodOutcome run_and_write(const std::string& method, const StateSpaceModel& model, const Dataset& data,
                            const ExperimentConfig& config, const fs::path& dir) {
  MethodOutcome outcome;
  outcome.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    MethodArtifacts art = run_method(method, model, data, config);
    outcome.seconds = seconds_since(t0);
    write_drawset_csv(dir / ("draws_" + method + ".csv"), art.params);
    if (art.states.values.rows() > 0) write_drawset_csv(dir / ("states_" + method + ".csv"), art.states);
    if (!art.elbo.empty()) write_elbo_csv(dir / ("elbo_" + method + ".csv"), art.elbo);
    if (art.kernel) write_kernel_csv(dir / ("kernel_" + method + ".csv"), *art.kernel);

    DiagnosticsOptions opts = config.diagnostics;
    opts.strict_window = false;
    outcome.report = diagnostics(art.params, art.states.values.rows() > 0 ? &art.states : nullptr, opts);
    outcome.report.method = method;
    if (!art.elbo.empty()) outcome.report.elbo = summarize_elbo(art.elbo);
    outcome.report.timings = art.phases;
    outcome.phases = art.phases;
    write_text(dir / ("report_" + method + ".json"), report_to_json(outcome.report));
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace

VbConfig ExperimentConfig::vb_config(const std::string& method) const {
  const auto it = vb.find(method);
  VbConfig c = it != vb.end() ? it->second : VbConfig{};
  if (it == vb.end() && model == "skellam") c.factors = 2;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  const json j = json::parse(text);
  check_keys(j, {"model", "model_options", "data", "methods", "settings", "output", "sweep", "out_dir", "seed",
                 "threads"}, "config");
  ExperimentConfig c;
  c.model = j.value("model", c.model);
  if (j.contains("model_options")) {
    const json& m = j["model_options"];
    check_keys(m, {"prior_alpha", "prior_beta", "obs_var", "n_series", "day_length", "knots", "x0"}, "model_options");
    c.model_options.prior_alpha = m.value("prior_alpha", c.model_options.prior_alpha);
    c.model_options.prior_beta = m.value("prior_beta", c.model_options.prior_beta);
    c.model_options.obs_var = m.value("obs_var", c.model_options.obs_var);
    c.model_options.skellam.n_series = m.value("n_series", c.model_options.skellam.n_series);
    c.model_options.skellam.day_length = m.value("day_length", c.model_options.skellam.day_length);
    if (m.contains("knots")) {
      const auto k = m["knots"].get<std::vector<int>>();
      if (k.size() != 4) throw DomainError("config: knots needs exactly four grid indices");
      std::copy(k.begin(), k.end(), c.model_options.skellam.knots.begin());
    }
    if (m.contains("x0")) c.model_options.skellam.x0 = to_vector(m["x0"]);
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d, {"path", "simulate"}, "data");
    if (d.contains("path")) c.data_path = d["path"].get<std::string>();
    if (d.contains("simulate")) {
      const json& s = d["simulate"];
      check_keys(s, {"theta", "T", "seed"}, "data.simulate");
      SimulationSpec spec;
      spec.theta = to_vector(s.at("theta"));
      spec.T = s.value("T", spec.T);
      spec.seed = s.value("seed", spec.seed);
      c.simulate = spec;
    }
  }
  if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
  for (const auto& m : c.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw DomainError("config: unknown method '" + m + "'");
  if (j.contains("settings")) {
    const json& s = j["settings"];
    check_keys(s, known_methods(), "settings");
    for (const char* m : {"efficient-vb", "gaussian-vb", "hybrid-vb"}) {
      if (!s.contains(m)) continue;
      VbConfig vc = c.vb_config(m);
      parse_vb(s[m], vc, std::string("settings.") + m);
      c.vb[m] = vc;
    }
    if (s.contains("mcmc")) {
      const json& m = s["mcmc"];
      check_keys(m, {"burn_in", "draws", "thin", "log_offset"}, "settings.mcmc");
      c.mcmc.burn_in = m.value("burn_in", c.mcmc.burn_in);
      c.mcmc.draws = m.value("draws", c.mcmc.draws);
      c.mcmc.thin = m.value("thin", c.mcmc.thin);
      c.mcmc.log_offset = m.value("log_offset", c.mcmc.log_offset);
    }
    if (s.contains("pmcmc")) {
      const json& m = s["pmcmc"];
      check_keys(m, {"burn_in", "draws", "thin", "particles", "initial_step", "window", "target_low",
                     "target_high", "adapt_factor", "two_blocks"}, "settings.pmcmc");
      c.pmcmc.burn_in = m.value("burn_in", c.pmcmc.burn_in);
      c.pmcmc.draws = m.value("draws", c.pmcmc.draws);
      c.pmcmc.thin = m.value("thin", c.pmcmc.thin);
      c.pmcmc.particles = m.value("particles", c.pmcmc.particles);
      c.pmcmc.initial_step = m.value("initial_step", c.pmcmc.initial_step);
      c.pmcmc.window = m.value("window", c.pmcmc.window);
      c.pmcmc.target_low = m.value("target_low", c.pmcmc.target_low);
      c.pmcmc.target_high = m.value("target_high", c.pmcmc.target_high);
      c.pmcmc.adapt_factor = m.value("adapt_factor", c.pmcmc.adapt_factor);
      c.pmcmc.two_blocks = m.value("two_blocks", c.pmcmc.two_blocks);
    }
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"param_draws", "state_draws", "window_start", "window_length", "max_lag"}, "output");
    c.param_draws = o.value("param_draws", c.param_draws);
    c.state_draws = o.value("state_draws", c.state_draws);
    c.diagnostics.window_start = o.value("window_start", c.diagnostics.window_start);
    c.diagnostics.window_length = o.value("window_length", c.diagnostics.window_length);
    c.diagnostics.max_lag = o.value("max_lag", c.diagnostics.max_lag);
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, {"mode", "values"}, "sweep");
    c.sweep.mode = s.value("mode", std::string());
    if (c.sweep.mode != "T" && c.sweep.mode != "recalibration")
      throw DomainError("config: sweep mode must be 'T' or 'recalibration'");
    c.sweep.values = s.contains("values") ? s["values"].get<std::vector<int>>()
                                          : (c.sweep.mode == "recalibration" ? std::vector<int>{1, 50, 200, 1000}
                                                                             : std::vector<int>{});
  }
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (!c.simulate && c.data_path.empty()) throw DomainError("config: data needs a path or a simulate block");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_config(ss.str());
  if (!c.data_path.empty() && c.data_path.is_relative()) c.data_path = path.parent_path() / c.data_path;
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["model_options"] = {{"prior_alpha", c.model_options.prior_alpha},
                        {"prior_beta", c.model_options.prior_beta},
                        {"obs_var", c.model_options.obs_var},
                        {"n_series", c.model_options.skellam.n_series},
                        {"day_length", c.model_options.skellam.day_length}};
  if (c.model_options.skellam.knots[0] >= 0)
    j["model_options"]["knots"] = std::vector<int>(c.model_options.skellam.knots.begin(), c.model_options.skellam.knots.end());
  if (c.model_options.skellam.x0.size() > 0) j["model_options"]["x0"] = from_vector(c.model_options.skellam.x0);
  if (c.simulate) {
    j["data"]["simulate"] = {{"theta", from_vector(c.simulate->theta)}, {"T", c.simulate->T}, {"seed", c.simulate->seed}};
  } else {
    j["data"]["path"] = c.data_path.string();
  }
  j["methods"] = c.methods;
  for (const auto& [m, vc] : c.vb) j["settings"][m] = vb_to_json(vc);
  j["settings"]["mcmc"] = {{"burn_in", c.mcmc.burn_in}, {"draws", c.mcmc.draws}, {"thin", c.mcmc.thin},
                           {"log_offset", c.mcmc.log_offset}};
  j["settings"]["pmcmc"] = {{"burn_in", c.pmcmc.burn_in},         {"draws", c.pmcmc.draws},
                            {"thin", c.pmcmc.thin},               {"particles", c.pmcmc.particles},
                            {"initial_step", c.pmcmc.initial_step}, {"window", c.pmcmc.window},
                            {"target_low", c.pmcmc.target_low},   {"target_high", c.pmcmc.target_high},
                            {"adapt_factor", c.pmcmc.adapt_factor}, {"two_blocks", c.pmcmc.two_blocks}};
  j["output"] = {{"param_draws", c.param_draws},
                 {"state_draws", c.state_draws},
                 {"window_start", c.diagnostics.window_start},
                 {"window_length", c.diagnostics.window_length},
                 {"max_lag", c.diagnostics.max_lag}};
  if (!c.sweep.mode.empty()) j["sweep"] = {{"mode", c.sweep.mode}, {"values", c.sweep.values}};
  j["out_dir"] = c.out_dir.string();
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv("EVB_OUT_DIR"); dir != nullptr && *dir != '\0') config.out_dir = dir;
  if (const char* th = std::getenv("EVB_THREADS"); th != nullptr && *th != '\0') {
    const int n = std::atoi(th);
    if (n < 1) throw DomainError("EVB_THREADS must be a positive integer");
    config.threads = n;
  }
}

bool method_supports(const std::string& method, const StateSpaceModel& model) {
  if (method == "mcmc" || method == "hybrid-vb") return model.name() == "sv";
  if (method == "pmcmc") return model.dim_state() == 1;
  return std::find(known_methods().begin(), known_methods().end(), method) != known_methods().end();
}

Dataset prepare_data(const ExperimentConfig& config, StateMatrix* true_states) {
  if (config.simulate) {
    ModelOptions opts = config.model_options;
    const auto sim_model = make_model(config.model, opts);
    Simulation sim = simulate(*sim_model, config.simulate->theta, config.simulate->T, config.simulate->seed);
    if (true_states != nullptr) *true_states = sim.states;
    return sim.data;
  }
  Dataset data = read_dataset_csv(config.data_path);
  if (config.model == "skellam") make_model(config.model, config.model_options, &data)->annotate_dataset(data);
  return data;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  ExperimentSummary summary;
  summary.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);
  StateMatrix truth;
  const Dataset data = prepare_data(config, &truth);
  write_dataset_csv(config.out_dir / "data.csv", data);
  if (truth.size() > 0) {
    DrawSet t;
    t.names = state_column_names(data.T(), static_cast<int>(truth.cols()));
    t.values = Eigen::Map<const Matrix>(truth.data(), 1, truth.size());
    write_drawset_csv(config.out_dir / "true_states.csv", t);
  }
  write_text(config.out_dir / "config.json", config_to_json(config));
  if (config.methods.empty()) return summary;

  const auto model = make_model(config.model, config.model_options, &data);
  std::vector<MethodOutcome> outcomes(config.methods.size());
  auto run_one = [&](std::size_t i) {
    const std::string& m = config.methods[i];
    if (!method_supports(m, *model)) {
      outcomes[i].method = m;
      outcomes[i].error = "method '" + m + "' does not support model '" + model->name() + "'";
      return;
    }
    outcomes[i] = run_and_write(m, *model, data, config, config.out_dir);
  };
  if (config.threads <= 1) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) run_one(i);
  } else {
    std::vector<std::future<void>> running;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (running.size() >= static_cast<std::size_t>(config.threads)) {
        running.front().get();
        running.erase(running.begin());
      }
      running.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : running) f.get();
  }

  CsvWriter timings(config.out_dir / "timings.csv", {"method", "phase", "seconds"});
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    for (const auto& [phase, sec] : o.phases) timings.write_row({o.method, phase, format_double(sec)});
  }
  if (std::any_of(outcomes.begin(), outcomes.end(), [](const MethodOutcome& o) { return !o.ok; })) {
    CsvWriter errors(config.out_dir / "errors.csv", {"method", "error"});
    for (const auto& o : outcomes)
      if (!o.ok) {
        std::string msg = o.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        errors.write_row({o.method, msg});
      }
  }
  summary.outcomes = std::move(outcomes);
  return summary;
}

std::vector<ExperimentSummary> run_sweep(const ExperimentConfig& config) {
  if (config.sweep.mode.empty()) throw DomainError("sweep: config has no sweep block");
  std::vector<ExperimentSummary> out;
  fs::create_directories(config.out_dir);
  Dataset full;
  if (config.sweep.mode == "T" && !config.simulate) full = prepare_data(config);
  CsvWriter table(config.out_dir / "sweep.csv",
                  {"mode", "value", "method", "parameter", "mean", "q0.005", "q0.995", "seconds"});
  for (int v : config.sweep.values) {
    ExperimentConfig c = config;
    c.sweep = {};
    if (config.sweep.mode == "T") {
      if (v < 1) throw DomainError("sweep: T values must be >= 1");
      c.out_dir = config.out_dir / ("T_" + std::to_string(v));
      if (c.simulate) {
        c.simulate->T = v;
      } else {
        if (v > full.T()) throw DomainError("sweep: T larger than the data");
        fs::create_directories(c.out_dir);
        Dataset part = full;
        part.y = full.y.topRows(v).eval();
        if (!full.time_labels.empty()) part.time_labels.resize(static_cast<std::size_t>(v));
        part.covariates.resize(0, 0);
        c.data_path = c.out_dir / "input.csv";
        write_dataset_csv(c.data_path, part);
      }
    } else {
      c.out_dir = config.out_dir / ("recal_" + std::to_string(v));
      c.methods = {"efficient-vb"};
      VbConfig vc = c.vb_config("efficient-vb");
      vc.recalibration_interval = v;
      c.vb["efficient-vb"] = vc;
    }
    ExperimentSummary s = run_experiment(c);
    for (const auto& o : s.outcomes) {
      if (!o.ok) continue;
      for (const auto& p : o.report.params)
        table.write_row({config.sweep.mode, std::to_string(v), o.method, p.name, format_double(p.mean),
                         format_double(p.q_low), format_double(p.q_high), format_double(o.seconds)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

fs::path compare_reports(const fs::path& dir) {
  std::vector<fs::path> reports;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") reports.push_back(entry.path());
  }
  if (reports.empty()) throw Error("compare: no report_*.json in " + dir.string());
  std::sort(reports.begin(), reports.end());
  const fs::path out_path = dir / "comparison.csv";
  CsvWriter out(out_path, {"method", "parameter", "mean", "sd", "q0.005", "q0.995"});
  auto field = [](const json& v) { return v.is_null() ? std::string("nan") : format_double(v.get<double>()); };
  for (const auto& path : reports) {
    std::ifstream in(path);
    const json j = json::parse(in);
    const std::string method = j.value("method", path.stem().string().substr(7));
    for (const auto& p : j.at("parameters"))
      out.write_row({method, p.at("name").get<std::string>(), field(p.at("mean")), field(p.at("sd")),
                     field(p.at("q0.005")), field(p.at("q0.995"))});
    if (j.contains("elbo")) out.write_row({method, "elbo_final_mean_100", field(j["elbo"]["final_mean_100"]), "", "", ""});
  }
  return out_path;
}

}  // namespace evb
