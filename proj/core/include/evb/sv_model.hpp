#pragma once

#include "evb/model.hpp"

namespace evb {

// Shared AR(1) latent log-variance layer:
//   x_1 ~ N(xbar, sigma^2 / (1 - rho^2)),  x_t = xbar + rho (x_{t-1} - xbar) + sigma eta_t.
// Constrained theta = (xbar, rho, sigma); unconstrained u = (xbar, kappa, c) with
// rho = 0.995 logistic(kappa), sigma = exp(c / 2).
// Priors on u: xbar ~ N(0, 1000); kappa logistic (uniform rho); c from an
// inverse gamma(alpha, beta) on sigma^2.
class Ar1Model : public StateSpaceModel {
 public:
  static constexpr double kRhoMax = 0.995;
  static constexpr double kXbarPriorVar = 1000.0;

  explicit Ar1Model(double alpha = 1.001, double beta = 1.001);

  int dim_obs() const override { return 1; }
  int dim_state() const override { return 1; }
  int dim_theta() const override { return 3; }
  std::vector<std::string> param_names() const override { return {"xbar", "rho", "sigma"}; }
  std::vector<std::string> unconstrained_names() const override { return {"xbar", "kappa", "c"}; }

  bool in_domain(const Vector& constrained) const override;
  // Also admits rho = 0 and sigma = 0 (a deterministic path).
  bool simulable(const Vector& constrained) const override;
  Vector transform(const Vector& constrained) const override;
  Vector inverse_transform(const Vector& unconstrained) const override;

  double log_prior(const Vector& u) const override;
  Vector log_prior_grad(const Vector& u) const override;

  GaussianTransition transition(const Vector& constrained) const override;

  double log_joint(const Vector& u, const StateMatrix& x, const Dataset& data) const override;
  // The measurement density does not involve theta, so only the state layer and prior contribute.
  Vector log_joint_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const override;
  StateMatrix state_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const override;

  Vector initial_guess(const Dataset& data) const override;

  // log p(x | theta) for the AR(1) path, theta constrained.
  double log_state_density(double xbar, double rho, double sigma, const StateMatrix& x) const;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 protected:
  // d/dx_t log p(y_t | x_t).
  virtual double measurement_state_grad(double y, double x) const = 0;

 private:
  double alpha_;
  double beta_;
};

// y_t = exp(x_t / 2) eps_t, eps_t ~ N(0, 1).
class SvModel final : public Ar1Model {
 public:
  using Ar1Model::Ar1Model;

  std::string name() const override { return "sv"; }
  double measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                const Vector& constrained) const override;
  void draw_observation(const Dataset& data, int t, std::span<const double> x_t, const Vector& constrained,
                        Rng& rng, std::span<double> y_t) const override;

  static double log_density(double y, double x);

 protected:
  double measurement_state_grad(double y, double x) const override;
};

// Linear Gaussian counterpart, y_t = x_t + N(0, obs_var). Same state layer and
// priors as SV; used where exact answers are needed (Kalman comparisons).
class LinearGaussianModel final : public Ar1Model {
 public:
  explicit LinearGaussianModel(double obs_var = 1.0, double alpha = 1.001, double beta = 1.001);

  std::string name() const override { return "lgssm"; }
  double measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                const Vector& constrained) const override;
  void draw_observation(const Dataset& data, int t, std::span<const double> x_t, const Vector& constrained,
                        Rng& rng, std::span<double> y_t) const override;

  double obs_var() const { return obs_var_; }

 protected:
  double measurement_state_grad(double y, double x) const override;

 private:
  double obs_var_;
};

}  // namespace evb
