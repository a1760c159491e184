#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evb/model.hpp"

namespace evb {

enum class Resampling { Multinomial, Systematic };

struct ParticleFilterResult {
  double loglik = 0.0;      // log of the unbiased likelihood estimate
  bool degenerate = false;  // all weights vanished at some t (loglik = -inf)
  int degenerate_at = -1;
};

// Bootstrap filter: propagate through the transition, weight by the
// measurement density, resample every step.
ParticleFilterResult bootstrap_pf_loglik(const StateSpaceModel& model, const Vector& constrained,
                                         const Dataset& data, int n_particles, std::uint64_t seed,
                                         Resampling scheme = Resampling::Multinomial);

struct PmcmcConfig {
  int burn_in = 5000;
  int draws = 10000;
  int thin = 1;
  int particles = 1000;
  double initial_step = 0.1;  // proposal standard deviation per coordinate
  int window = 100;
  double target_low = 0.15;
  double target_high = 0.30;
  double adapt_factor = 1.2;
  bool two_blocks = true;     // random two-block split each step; otherwise one joint block
};

struct PmcmcResult {
  Matrix draws;              // unconstrained, draws x d
  Vector step_sd;            // frozen proposal scales
  double burn_in_acceptance = 0.0;
  double acceptance = 0.0;   // inference phase
  double final_window_acceptance = 0.0;
  double seconds = 0.0;
};

// Log-likelihood estimator at unconstrained theta, given a generator for its randomness.
using LogLikEstimator = std::function<double(const Vector& u, Rng& rng)>;
using LogPrior = std::function<double(const Vector& u)>;

// Pseudo-marginal random-walk Metropolis-Hastings. Proposal scales are tuned
// during burn-in (multiplied or divided by adapt_factor whenever the
// acceptance rate over a window falls outside [target_low, target_high]) and
// frozen afterwards.
PmcmcResult pmcmc(const LogLikEstimator& loglik, const LogPrior& log_prior, const Vector& u0,
                  const PmcmcConfig& config, std::uint64_t seed);

// PMCMC on a registered model with the bootstrap filter as estimator.
PmcmcResult pmcmc_model(const StateSpaceModel& model, const Dataset& data, const Vector& u0,
                        const PmcmcConfig& config, std::uint64_t seed);

}  // namespace evb
