// Runs the ten acceptance checks and prints one PASS/FAIL line each.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "evb/diagnostics.hpp"
#include "evb/eis.hpp"
#include "evb/kalman.hpp"
#include "evb/ksc.hpp"
#include "evb/particle.hpp"
#include "evb/registry.hpp"
#include "evb/skellam_model.hpp"
#include "evb/sv_mcmc.hpp"
#include "evb/sv_model.hpp"
#include "evb/vb.hpp"
#include "oracles.hpp"

using namespace evb;
using evb::testing::central_diff;
using evb::testing::max_rel_error;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared T = 500 SV fits, reused by several checks.
struct SvReplication {
  Simulation sim;
  FitResult evb, gvb;
  SvMcmcResult mcmc;
  bool ready = false;
};

SvReplication& sv500() {
  static SvReplication r;
  if (r.ready) return r;
  SvModel m;
  r.sim = simulate(m, evb::testing::sv_truth(), 500, 2024);
  VbConfig cfg;
  cfg.iterations = 10000;
  r.evb = fit_efficient_vb(m, r.sim.data, cfg, 1);
  r.gvb = fit_gaussian_vb(m, r.sim.data, cfg, 2);
  SvMcmcConfig mc;
  mc.burn_in = 10000;
  mc.draws = 10000;
  mc.state_draws = 1000;
  r.mcmc = mcmc_sv(r.sim.data.y.col(0), mc, 3);
  r.ready = true;
  return r;
}

double final_elbo(const FitResult& f) { return summarize_elbo(f.elbo).final_mean; }

Outcome gradients() {
  double worst_sv = 0.0, worst_sk = 0.0;
  SvModel sv;
  for (std::uint64_t k = 0; k < 10; ++k) {
    Rng rng = make_rng(k);
    const int T = 25;
    Vector u{{-1.0 + std_normal(rng), 1.0 + 2.0 * std_normal(rng), -2.0 + std_normal(rng)}};
    StateMatrix x(T, 1);
    Matrix y(T, 1);
    for (int t = 0; t < T; ++t) {
      x(t, 0) = -1.0 + std_normal(rng);
      y(t, 0) = std::exp(0.5 * x(t, 0)) * std_normal(rng);
    }
    const Dataset d = make_dataset(y);
    const Vector fd = central_diff([&](const Vector& v) { return sv.log_joint(v, x, d); }, u);
    worst_sv = std::max(worst_sv, max_rel_error(sv.log_joint_grad(u, x, d), fd));
  }
  auto sim_model = make_model("skellam");
  const Simulation sim = simulate(*sim_model, evb::testing::skellam_truth(), 5, 3);
  auto sk = make_model("skellam", {}, &sim.data);
  for (std::uint64_t k = 0; k < 10; ++k) {
    Rng rng = make_rng(100 + k);
    Vector u = sk->transform(evb::testing::skellam_truth());
    for (auto& v : u) v += 0.3 * std_normal(rng);
    StateMatrix x(5, 2);
    for (int t = 0; t < 5; ++t)
      for (int i = 0; i < 2; ++i) x(t, i) = 0.5 * std_normal(rng);
    const Vector fd = central_diff([&](const Vector& v) { return sk->log_joint(v, x, sim.data); }, u);
    worst_sk = std::max(worst_sk, max_rel_error(sk->log_joint_grad(u, x, sim.data), fd));
  }
  return {worst_sv < 1e-6 && worst_sk < 1e-5,
          "sv max rel err " + fmt("%.2e", worst_sv) + ", skellam " + fmt("%.2e", worst_sk)};
}

Outcome eis_exactness() {
  const double obs_var = 0.5;
  LinearGaussianModel m(obs_var);
  const Vector phi{{0.4, 0.9, 0.6}};
  const Simulation sim = simulate(m, phi, 50, 17);
  CalibrationStats stats;
  const KernelParams a = calibrate(m, sim.data, phi, KernelParams::zeros(50, 1), default_path_count(1), 9, &stats);
  const GaussianTransition tr = m.transition(phi);
  const auto spec = LinearGaussianSpec::from_transition(tr, Matrix::Identity(1, 1), Matrix::Constant(1, 1, obs_var));
  const KalmanResult kf = kalman_smoother(spec, sim.data.y);
  const StateApprox q(tr, a);
  Rng rng = make_rng(0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    for (int rep = 0; rep < 3; ++rep) {
      const double prev = t > 0 ? kf.smoothed_mean[t - 1][0] + std_normal(rng) : 0.0;
      const auto mom = q.moments(t, {&prev, 1});
      double mean = kf.smoothed_mean[t][0], var = kf.smoothed_cov[t](0, 0);
      if (t > 0) {
        const double cxy = kf.smoothed_cross_cov[t](0, 0), vp = kf.smoothed_cov[t - 1](0, 0);
        mean += cxy / vp * (prev - kf.smoothed_mean[t - 1][0]);
        var -= cxy * cxy / vp;
      }
      worst = std::max({worst, std::abs(mom.mean[0] - mean), std::abs(mom.cov(0, 0) - var)});
    }
  }
  return {worst < 1e-8 && stats.max_residual < 1e-10,
          "max moment error " + fmt("%.2e", worst) + ", residual " + fmt("%.2e", stats.max_residual)};
}

Outcome chi_quadrature() {
  SvModel m;
  Rng rng = make_rng(33);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector phi{{-2.0 + 3.0 * uniform01(rng), 0.99 * uniform01(rng), 0.1 + 0.9 * uniform01(rng)}};
    const GaussianTransition tr = m.transition(phi);
    const int t = k % 5;
    const double prev = phi[0] + std_normal(rng);
    const double prec = tr.precision_at(t)(0, 0);
    const double b = 2.0 * (uniform01(rng) - 0.5);
    // c below prec / 2 keeps the kernel integrable.
    const double c = -1.0 + (1.0 + 0.4 * prec) * uniform01(rng);
    const double lchi = log_chi(tr, t, {&b, 1}, {&c, 1}, {&prev, 1});
    const auto mom = conditional_moments(tr, t, {&b, 1}, {&c, 1}, {&prev, 1});
    const double mu = mom.mean[0], sd = std::sqrt(mom.cov(0, 0));
    auto f = [&](double x) {
      return std::exp(b * x + c * x * x + eval_transition_logdensity(tr, t, {&x, 1}, {&prev, 1}) - lchi);
    };
    worst = std::max(worst, std::abs(evb::testing::trapezoid(f, mu - 20 * sd, mu + 20 * sd, 20000) - 1.0));
  }
  return {worst < 1e-8, "max relative quadrature gap " + fmt("%.2e", worst)};
}

Outcome replication() {
  SvReplication& r = sv500();
  SvModel m;
  Rng rng = make_rng(44);
  const Matrix evb_draws = draw_constrained(m, r.evb.q, 10000, rng);
  const double dx = std::abs(evb_draws.col(0).mean() - r.mcmc.params.col(0).mean());
  const double dr = std::abs(evb_draws.col(1).mean() - r.mcmc.params.col(1).mean());
  const double ds = std::abs(evb_draws.col(2).mean() - r.mcmc.params.col(2).mean());

  const std::vector<std::string> names = state_column_names(500, 1);
  const DrawSet ev_states{names, draw_state_paths(state_approximation(m, r.evb), 1000, rng)};
  const DrawSet gv_states{names, draw_state_paths(*r.gvb.state_block, 1000, rng)};
  const DrawSet mc_states{names, r.mcmc.states};
  const DrawSet dummy{{"p"}, Matrix::Zero(2, 1)};
  const DiagnosticsReport ev = diagnostics(dummy, &ev_states);
  const DiagnosticsReport gv = diagnostics(dummy, &gv_states);
  const DiagnosticsReport mc = diagnostics(dummy, &mc_states);
  const double state_mad = (ev.state_mean - r.mcmc.state_mean).cwiseAbs().mean();
  const double ac_gap = (ev.lag_autocorr - mc.lag_autocorr).cwiseAbs().maxCoeff();
  const double gv_tail = gv.lag_autocorr.tail(8).cwiseAbs().maxCoeff();
  const bool pass = dx < 0.15 && dr < 0.05 && ds < 0.05 && state_mad < 0.15 && ac_gap < 0.1 && gv_tail < 0.1;
  std::ostringstream d;
  d << "|dmean| xbar " << fmt("%.3f", dx) << " rho " << fmt("%.4f", dr) << " sigma " << fmt("%.4f", ds)
    << "; state MAD " << fmt("%.3f", state_mad) << "; autocorr gap " << fmt("%.3f", ac_gap)
    << "; gaussian-vb lag>2 max " << fmt("%.3f", gv_tail);
  return {pass, d.str()};
}

Outcome ordering() {
  SvModel m;
  const Simulation sim = simulate(m, evb::testing::sv_truth(), 4000, 4000);
  VbConfig cfg;
  cfg.iterations = 10000;
  auto t0 = std::chrono::steady_clock::now();
  fit_efficient_vb(m, sim.data, cfg, 1);
  const double e = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  fit_gaussian_vb(m, sim.data, cfg, 2);
  const double g = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  fit_hybrid_vb(m, sim.data, cfg, 3);
  const double h = seconds_since(t0);
  SvMcmcConfig mc;
  mc.burn_in = 10000;
  mc.draws = 10000;
  t0 = std::chrono::steady_clock::now();
  mcmc_sv(sim.data.y.col(0), mc, 4);
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "seconds efficient-vb " << fmt("%.1f", e) << ", gaussian-vb " << fmt("%.1f", g) << ", hybrid-vb "
    << fmt("%.1f", h) << ", mcmc " << fmt("%.1f", s);
  return {e < g && g < h && h < s, d.str()};
}

// Shared N = 2, T = 1500 Skellam fits.
struct SkellamFits {
  Simulation sim;
  std::unique_ptr<StateSpaceModel> model;
  FitResult evb, gvb;
  bool ready = false;
};

SkellamFits& skellam1500() {
  static SkellamFits s;
  if (s.ready) return s;
  auto sim_model = make_model("skellam");
  s.sim = simulate(*sim_model, evb::testing::skellam_truth(), 1500, 77);
  s.model = make_model("skellam", {}, &s.sim.data);
  VbConfig cfg;
  cfg.iterations = 10000;
  cfg.factors = 2;
  s.evb = fit_efficient_vb(*s.model, s.sim.data, cfg, 5);
  s.gvb = fit_gaussian_vb(*s.model, s.sim.data, cfg, 6);
  s.ready = true;
  return s;
}

Outcome elbo_dominance() {
  SvReplication& r = sv500();
  SkellamFits& s = skellam1500();
  const double se = final_elbo(r.evb), sg = final_elbo(r.gvb);
  const double ke = final_elbo(s.evb), kg = final_elbo(s.gvb);
  std::ostringstream d;
  d << "sv " << fmt("%.2f", se) << " vs " << fmt("%.2f", sg) << "; skellam " << fmt("%.2f", ke) << " vs "
    << fmt("%.2f", kg);
  return {se >= sg && ke >= kg, d.str()};
}

Outcome skellam_machinery() {
  double worst_sum = 0.0;
  for (double s2 : {0.1, 1.0, 10.0, 25.0})
    for (double kappa : {0.0, 0.5}) {
      double total = 0.0;
      for (int y = -200; y <= 200; ++y) total += skellam_pmf(y, s2, kappa);
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
  SkellamFits& s = skellam1500();
  const auto& sk = dynamic_cast<const SkellamModel&>(*s.model);
  Rng rng = make_rng(55);
  const Matrix draws = draw_constrained(*s.model, s.evb.q, 10000, rng);
  const Vector truth = evb::testing::skellam_truth();
  double worst = 0.0;
  std::ostringstream d;
  for (int i = 0; i < 2; ++i) {
    for (int off : {sk.off_kappa(), sk.off_omega()}) {
      const double est = draws.col(off + i).mean();
      worst = std::max(worst, std::abs(est - truth[off + i]));
      d << sk.param_names()[static_cast<std::size_t>(off + i)] << " " << fmt("%.3f", est) << " ";
    }
  }
  d << "; max recovery error " << fmt("%.3f", worst) << "; pmf sum error " << fmt("%.1e", worst_sum);
  return {worst_sum < 1e-10 && worst < 0.1, d.str()};
}

Outcome pf_unbiased() {
  LinearGaussianModel m(1.0);
  const Vector phi{{0.2, 0.9, 0.5}};
  const Simulation sim = simulate(m, phi, 100, 21);
  const auto spec = LinearGaussianSpec::from_transition(m.transition(phi), Matrix::Identity(1, 1),
                                                        Matrix::Constant(1, 1, 1.0));
  const double exact = kalman_smoother(spec, sim.data.y).loglik;
  const int reps = 500;
  Vector ratio(reps);
  for (int r = 0; r < reps; ++r) ratio[r] = std::exp(bootstrap_pf_loglik(m, phi, sim.data, 200, 5000 + r).loglik - exact);
  const double mean = ratio.mean();
  const double se = std::sqrt((ratio.array() - mean).square().sum() / (reps - 1) / reps);
  return {std::abs(mean - 1.0) < 2 * se, "mean ratio " + fmt("%.4f", mean) + ", se " + fmt("%.4f", se)};
}

Outcome ksc() {
  const MixtureApprox& mix = ksc_mixture();
  double worst = 0.0;
  for (double v = -15.0; v <= 5.0; v += 0.001)
    worst = std::max(worst, std::abs(mix.density(v) - std::exp(log_chi2_1_density(v))));
  const double mean = mix.mixture_mean(), var = mix.mixture_variance();
  return {std::abs(mean + 1.2704) < 0.02 && std::abs(var - 4.9348) < 0.02 && worst < 0.01,
          "mean " + fmt("%.4f", mean) + ", variance " + fmt("%.4f", var) + ", max density error " + fmt("%.4f", worst)};
}

Outcome recalibration() {
  SvModel m;
  const Simulation sim = simulate(m, evb::testing::sv_truth(), 500, 2024);
  std::vector<std::pair<double, double>> ci;
  std::ostringstream d;
  for (int interval : {1, 50, 200, 1000}) {
    VbConfig cfg;
    cfg.iterations = 10000;
    cfg.recalibration_interval = interval;
    const FitResult f = fit_efficient_vb(m, sim.data, cfg, 1);
    Rng rng = make_rng(66);
    const Matrix draws = draw_constrained(m, f.q, 10000, rng);
    const ColumnSummary c = summarize_column("rho", draws.col(1));
    ci.emplace_back(c.q_low, c.q_high);
    d << interval << ": [" << fmt("%.4f", c.q_low) << ", " << fmt("%.4f", c.q_high) << "] ";
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < ci.size(); ++i)
    for (std::size_t j = i + 1; j < ci.size(); ++j)
      worst = std::max({worst, std::abs(ci[i].first - ci[j].first), std::abs(ci[i].second - ci[j].second)});
  d << "; max endpoint gap " << fmt("%.4f", worst);
  return {worst < 0.05, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"gradient finite differences", gradients},
      {"EIS exact on linear Gaussian", eis_exactness},
      {"chi against quadrature", chi_quadrature},
      {"T=500 SV against MCMC", replication},
      {"T=4000 wall-clock ordering", ordering},
      {"ELBO dominance", elbo_dominance},
      {"Skellam pmf and recovery", skellam_machinery},
      {"particle filter unbiasedness", pf_unbiased},
      {"KSC mixture", ksc},
      {"recalibration sensitivity", recalibration},
  };
  int failures = 0;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %-30s %8.1fs  %s\n", o.pass ? "PASS" : "FAIL", k + 1, checks[k].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
