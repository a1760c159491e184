#pragma once

#include <cstdint>
#include <vector>

#include "evb/kalman.hpp"
#include "evb/ksc.hpp"
#include "evb/rng.hpp"
#include "evb/types.hpp"

namespace evb {

struct SvMcmcConfig {
  int burn_in = 10000;
  int draws = 10000;
  int thin = 1;
  int state_draws = 1000;       // state paths kept (evenly spaced over the inference draws)
  double log_offset = 1e-10;    // y*_t = log(y_t^2 + offset)
  double prior_alpha = 1.001;
  double prior_beta = 1.001;
};

struct SvMcmcResult {
  Matrix params;         // draws x 3: xbar, rho, sigma
  Matrix states;         // kept paths x T
  Vector state_mean;     // posterior mean over all inference draws
  double rho_acceptance = 0.0;
  double seconds = 0.0;
};

// Gibbs sampler for the univariate SV model with the seven-component mixture
// representation of log y_t^2. Each sweep:
//   1. mixture indicators, then x | indicators, theta via the banded precision sampler;
//   2. xbar | x from its Gaussian conditional;
//   3. sigma^2 | x from its inverse gamma conditional;
//   4. rho by Metropolis-Hastings with the Gaussian proposal N(mu_rho, s_rho^2).
class SvGibbs {
 public:
  SvGibbs(const Vector& y, const SvMcmcConfig& config);

  void sample_indicators(Rng& rng);
  void sample_states(Rng& rng);
  void sample_xbar(Rng& rng);
  void sample_sigma2(Rng& rng);
  // Returns true when the proposal was accepted.
  bool sample_rho(Rng& rng);
  bool sweep(Rng& rng);

  // Linear Gaussian model implied by the current indicators (offset and
  // variance per time point), for checks against the Kalman smoother.
  LinearGaussianSpec conditional_spec() const;

  // Gaussian conditional of xbar (mean, variance) and inverse gamma
  // conditional of sigma^2 (shape, rate); of rho's proposal (mean, variance).
  std::pair<double, double> xbar_conditional() const;
  std::pair<double, double> sigma2_conditional() const;
  std::pair<double, double> rho_proposal() const;

  double xbar = 0.0;
  double rho = 0.9;
  double sigma2 = 0.09;
  Vector x;
  std::vector<int> s;
  const Vector& ystar() const { return ystar_; }

 private:
  Vector ystar_;
  SvMcmcConfig config_;
};

// Draws x from (an MCMC step towards) p(x | y, theta) at a given constrained theta:
// one indicator update then one precision-sampler state draw, starting from the
// path passed in. Used by Hybrid VB.
class SvConditionalStateSampler {
 public:
  explicit SvConditionalStateSampler(const Vector& y, const SvMcmcConfig& config = {});
  void operator()(const Vector& constrained, StateMatrix& x, Rng& rng);

 private:
  SvGibbs gibbs_;
};

SvMcmcResult mcmc_sv(const Vector& y, const SvMcmcConfig& config, std::uint64_t seed);

}  // namespace evb
