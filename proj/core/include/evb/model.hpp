#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evb/dataset.hpp"
#include "evb/rng.hpp"
#include "evb/types.hpp"

namespace evb {

// Linear Gaussian state transition
//   x_1 ~ N(first_mean, first_precision^{-1})
//   x_t | x_{t-1} ~ N(intercept + coef .* x_{t-1}, precision^{-1}),  t >= 2.
// Both shipped models (and the linear-Gaussian test model) have this form.
struct GaussianTransition {
  Vector intercept;
  Vector coef;
  Matrix precision;
  Vector first_mean;
  Matrix first_precision;

  int dim() const { return static_cast<int>(intercept.size()); }

  // Conditional mean of x_t. `t` is zero-based; `prev` is ignored for t == 0.
  void mean(int t, std::span<const double> prev, std::span<double> out) const;
  const Matrix& precision_at(int t) const { return t == 0 ? first_precision : precision; }
};

// Exponential-family view of a Gaussian transition density,
//   p(x_t | x_{t-1}) = h(x_t) g(x_{t-1}) exp(eta(x_{t-1})' T(x_t)),
// with T(x) = (x, vec(x x')).
struct ExpFamilyTerms {
  double log_h = 0.0;
  double log_g = 0.0;
  Vector eta;
};

Vector sufficient_statistics(std::span<const double> x);
ExpFamilyTerms exp_family_terms(const GaussianTransition& tr, int t, std::span<const double> prev);

// log p(x_t | x_{t-1}) through the exponential-family decomposition.
double eval_transition_logdensity(const GaussianTransition& tr, int t, std::span<const double> x_t,
                                  std::span<const double> prev);

// Direct multivariate normal log density, used as a cross-check.
double gaussian_logpdf_precision(std::span<const double> x, std::span<const double> mean,
                                 const Matrix& precision);

// A state space model plugin. Parameters come in two flavours: the
// constrained vector (natural scale, e.g. rho in (0, 0.995)) and the
// unconstrained vector used by the variational family. Priors and gradients
// live on the unconstrained scale with the Jacobian already folded in.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string name() const = 0;
  virtual int dim_obs() const = 0;
  virtual int dim_state() const = 0;
  virtual int dim_theta() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::vector<std::string> unconstrained_names() const = 0;

  virtual bool in_domain(const Vector& constrained) const = 0;
  // Simulation may accept boundary values (e.g. a zero innovation scale).
  virtual bool simulable(const Vector& constrained) const { return in_domain(constrained); }
  // Throws DomainError when `constrained` is outside the domain.
  virtual Vector transform(const Vector& constrained) const = 0;
  virtual Vector inverse_transform(const Vector& unconstrained) const = 0;

  virtual double log_prior(const Vector& u) const = 0;
  virtual Vector log_prior_grad(const Vector& u) const = 0;

  virtual GaussianTransition transition(const Vector& constrained) const = 0;
  virtual double measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                        const Vector& constrained) const = 0;
  // `data` carries covariates only; its observations are not yet drawn.
  virtual void draw_observation(const Dataset& data, int t, std::span<const double> x_t,
                                const Vector& constrained, Rng& rng, std::span<double> y_t) const = 0;

  // log p(y, x | theta) + log p(theta), with theta unconstrained.
  virtual double log_joint(const Vector& u, const StateMatrix& x, const Dataset& data) const;
  // Gradient of log_joint with respect to u.
  virtual Vector log_joint_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const = 0;
  // Gradient of log p(y | x, theta) + log p(x | theta) with respect to x.
  virtual StateMatrix state_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const = 0;

  // Constrained starting point for the optimisers.
  virtual Vector initial_guess(const Dataset& data) const = 0;

  // Adds model-owned covariates (e.g. a seasonal basis) to a dataset of matching T.
  virtual void annotate_dataset(Dataset& /*data*/) const {}

  double log_measurement(const Vector& constrained, const StateMatrix& x, const Dataset& data) const;
  double log_states(const GaussianTransition& tr, const StateMatrix& x) const;
};

struct Simulation {
  Dataset data;
  StateMatrix states;
};

// Draws x_1 ~ p(x_1|theta), then x_t | x_{t-1} and y_t | x_t recursively.
Simulation simulate(const StateSpaceModel& model, const Vector& constrained, int T, std::uint64_t seed);

// Maps standard normals to N(0, P^{-1}) noise (x = m + U z). Infinite precision means no noise.
Matrix transition_noise_factor(const Matrix& precision);

// Draws a state path from the transition alone.
void simulate_states(const GaussianTransition& tr, Rng& rng, StateMatrix& x);

double logistic(double v);
double logit(double p);

}  // namespace evb
