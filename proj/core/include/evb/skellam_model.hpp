#pragma once

#include <array>

#include "evb/model.hpp"

namespace evb {

// Zero-inflated Skellam pmf kappa 1{y=0} + (1 - kappa) e^{-s2} I_|y|(s2).
double skellam_pmf(int y, double sigma2, double kappa);
double skellam_log_pmf(int y, double sigma2, double kappa);

// Draws from the zero-inflated Skellam as the difference of two Poisson(sigma2/2) counts.
int draw_skellam(double sigma2, double kappa, Rng& rng);

struct SkellamOptions {
  int n_series = 2;
  int day_length = 0;  // 0: use the default trading-day grid
  std::array<int, 4> knots{-1, -1, -1, -1};  // negative: default knots
  Vector x0;  // initial state; empty means the stationary mean
};

// Multivariate zero-inflated Skellam stochastic volatility model
//   y_{i,t} ~ ZISkellam(kappa_i, sigma2_{i,t}),  sigma2_{i,t} = exp(W~_t' beta_i + x_{i,t}),
//   x_t = xbar + diag(omega) x_{t-1} + N(0, (L L')^{-1}),  x_0 fixed.
// Constrained layout: (kappa[N], xbar[N], vech(L), omega[N], beta_1[3], ..., beta_N[3]),
// vech taking L row by row over j <= i. Unconstrained: logit kappa, xbar,
// vech(L*) with log diagonal, logit omega, beta.
// W~ is read from the dataset covariates (T x 3); empty covariates mean no seasonality.
class SkellamModel final : public StateSpaceModel {
 public:
  explicit SkellamModel(SkellamOptions options);

  std::string name() const override { return "skellam"; }
  int dim_obs() const override { return n_; }
  int dim_state() const override { return n_; }
  int dim_theta() const override { return 3 * n_ + n_ * (n_ + 1) / 2 + 3 * n_; }
  std::vector<std::string> param_names() const override;
  std::vector<std::string> unconstrained_names() const override;

  bool in_domain(const Vector& constrained) const override;
  Vector transform(const Vector& constrained) const override;
  Vector inverse_transform(const Vector& unconstrained) const override;

  double log_prior(const Vector& u) const override;
  Vector log_prior_grad(const Vector& u) const override;

  GaussianTransition transition(const Vector& constrained) const override;
  double measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                const Vector& constrained) const override;
  void draw_observation(const Dataset& data, int t, std::span<const double> x_t, const Vector& constrained,
                        Rng& rng, std::span<double> y_t) const override;

  Vector log_joint_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const override;
  StateMatrix state_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const override;

  Vector initial_guess(const Dataset& data) const override;
  void annotate_dataset(Dataset& data) const override;

  // Offsets of the parameter blocks inside theta.
  int off_kappa() const { return 0; }
  int off_xbar() const { return n_; }
  int off_l() const { return 2 * n_; }
  int off_omega() const { return 2 * n_ + n_ * (n_ + 1) / 2; }
  int off_beta() const { return off_omega() + n_; }

  // Index of L(i, j), j <= i, inside the vech block.
  static int vech_index(int i, int j) { return i * (i + 1) / 2 + j; }

  // Lower-triangular factor from the constrained vech block.
  Matrix lower_factor(const Vector& constrained) const;
  const Vector& x0() const { return options_.x0; }
  const SkellamOptions& options() const { return options_; }

  // Per-series log sample variances, the conventional x_0.
  static Vector log_sample_variances(const Dataset& data);

 private:
  double seasonal(const Dataset& data, int t, const Vector& constrained, int i) const;

  SkellamOptions options_;
  int n_;
};

}  // namespace evb
