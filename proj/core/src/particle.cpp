#include "evb/particle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace evb {

namespace {

void resample(const std::vector<double>& w, Resampling scheme, Rng& rng, std::vector<int>& idx) {
  const auto n = w.size();
  idx.resize(n);
  std::vector<double> cdf(n);
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  const double total = cdf.back();
  if (scheme == Resampling::Systematic) {
    const double u0 = uniform01(rng) / static_cast<double>(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (u0 + static_cast<double>(i) / static_cast<double>(n)) * total;
      while (j + 1 < n && cdf[j] < u) ++j;
      idx[i] = static_cast<int>(j);
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng) * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    idx[i] = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1));
  }
}

}  // namespace

ParticleFilterResult bootstrap_pf_loglik(const StateSpaceModel& model, const Vector& constrained,
                                         const Dataset& data, int n_particles, std::uint64_t seed,
                                         Resampling scheme) {
  if (n_particles < 1) throw DomainError("particle filter: need at least one particle");
  const GaussianTransition tr = model.transition(constrained);
  const int n = tr.dim();
  const auto un = static_cast<std::size_t>(n);
  const auto np = static_cast<std::size_t>(n_particles);
  const Matrix U_first = transition_noise_factor(tr.first_precision);
  const Matrix U = transition_noise_factor(tr.precision);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;

  StateMatrix particles(n_particles, n), next(n_particles, n);
  std::vector<double> logw(np), w(np);
  std::vector<int> idx;
  Vector z(n), m(n);
  ParticleFilterResult out;

  for (int t = 0; t < data.T(); ++t) {
    const Matrix& Ut = t == 0 ? U_first : U;
    for (std::size_t p = 0; p < np; ++p) {
      const auto ip = static_cast<Eigen::Index>(p);
      const double* prev = t == 0 ? nullptr : &particles(idx[p], 0);
      tr.mean(t, {prev, prev ? un : 0}, {m.data(), un});
      for (int i = 0; i < n; ++i) z[i] = normal(rng);
      next.row(ip) = (m + Ut * z).transpose();
      logw[p] = model.measurement_logdensity(data, t, {&next(ip, 0), un}, constrained);
    }
    std::swap(particles, next);
    const double max_log = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(max_log)) {
      out.loglik = -std::numeric_limits<double>::infinity();
      out.degenerate = true;
      out.degenerate_at = t;
      return out;
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      w[p] = std::exp(logw[p] - max_log);
      sum += w[p];
    }
    out.loglik += max_log + std::log(sum / static_cast<double>(n_particles));
    resample(w, scheme, rng, idx);
  }
  return out;
}

PmcmcResult pmcmc(const LogLikEstimator& loglik, const LogPrior& log_prior, const Vector& u0,
                  const PmcmcConfig& config, std::uint64_t seed) {
  if (config.draws < 1 || config.burn_in < 0 || config.thin < 1 || config.window < 1)
    throw DomainError("pmcmc: bad chain settings");
  const auto start = std::chrono::steady_clock::now();
  const auto d = u0.size();
  Rng rng = make_rng(seed);
  Vector u = u0;
  double ll = loglik(u, rng);
  double lp = log_prior(u);
  Vector sd = Vector::Constant(d, config.initial_step);

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  Vector win_acc = Vector::Zero(d), win_att = Vector::Zero(d);
  long burn_acc = 0, burn_att = 0, inf_acc = 0, inf_att = 0;
  double last_window = 0.0;
  long last_window_acc = 0, last_window_att = 0;

  PmcmcResult out;
  out.draws.resize(config.draws, d);
  const long total = static_cast<long>(config.burn_in) + static_cast<long>(config.draws) * config.thin;
  int kept = 0;

  for (long it = 0; it < total; ++it) {
    const bool burning = it < config.burn_in;
    std::shuffle(order.begin(), order.end(), rng);
    const auto split = config.two_blocks && d > 1 ? static_cast<std::size_t>(d / 2) : static_cast<std::size_t>(d);
    for (int block = 0; block < 2; ++block) {
      const std::size_t lo = block == 0 ? 0 : split;
      const std::size_t hi = block == 0 ? split : static_cast<std::size_t>(d);
      if (lo >= hi) continue;
      Vector prop = u;
      for (std::size_t k = lo; k < hi; ++k) prop[order[k]] += sd[order[k]] * std_normal(rng);
      const double lp_prop = log_prior(prop);
      double ll_prop = -std::numeric_limits<double>::infinity();
      if (std::isfinite(lp_prop)) ll_prop = loglik(prop, rng);
      const double log_alpha = std::min(0.0, ll_prop + lp_prop - ll - lp);
      const bool accept = std::isfinite(ll_prop) && std::log(uniform01(rng)) < log_alpha;
      if (accept) {
        u = prop;
        ll = ll_prop;
        lp = lp_prop;
      }
      for (std::size_t k = lo; k < hi; ++k) {
        win_att[order[k]] += 1;
        win_acc[order[k]] += accept ? 1 : 0;
      }
      (burning ? burn_att : inf_att) += 1;
      (burning ? burn_acc : inf_acc) += accept ? 1 : 0;
      last_window_att += 1;
      last_window_acc += accept ? 1 : 0;
    }

    if ((it + 1) % config.window == 0) {
      if (burning) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (win_att[j] == 0) continue;
          const double rate = win_acc[j] / win_att[j];
          if (rate < config.target_low) sd[j] /= config.adapt_factor;
          if (rate > config.target_high) sd[j] *= config.adapt_factor;
        }
      }
      last_window = last_window_att > 0 ? static_cast<double>(last_window_acc) / last_window_att : 0.0;
      if (it + 1 == config.burn_in) out.final_window_acceptance = last_window;
      win_acc.setZero();
      win_att.setZero();
      last_window_acc = last_window_att = 0;
    }

    if (!burning && (it - config.burn_in + 1) % config.thin == 0) out.draws.row(kept++) = u.transpose();
  }

  out.step_sd = sd;
  out.burn_in_acceptance = burn_att > 0 ? static_cast<double>(burn_acc) / burn_att : 0.0;
  out.acceptance = inf_att > 0 ? static_cast<double>(inf_acc) / inf_att : 0.0;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

PmcmcResult pmcmc_model(const StateSpaceModel& model, const Dataset& data, const Vector& u0,
                        const PmcmcConfig& config, std::uint64_t seed) {
  const LogLikEstimator loglik = [&](const Vector& u, Rng& rng) {
    const Vector c = model.inverse_transform(u);
    if (!model.in_domain(c)) return -std::numeric_limits<double>::infinity();
    return bootstrap_pf_loglik(model, c, data, config.particles, rng()).loglik;
  };
  const LogPrior prior = [&](const Vector& u) { return model.log_prior(u); };
  return pmcmc(loglik, prior, u0, config, seed);
}

}  // namespace evb
