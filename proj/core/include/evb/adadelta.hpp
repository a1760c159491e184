#pragma once

#include "evb/types.hpp"

namespace evb {

// Per-coordinate adaptive step sizes from decayed averages of squared
// gradients and squared steps.
struct AdadeltaState {
  Vector mean_sq_grad;
  Vector mean_sq_step;
  double decay = 0.95;
  double eps = 1e-6;

  explicit AdadeltaState(Eigen::Index n = 0, double decay_ = 0.95, double eps_ = 1e-6)
      : mean_sq_grad(Vector::Zero(n)), mean_sq_step(Vector::Zero(n)), decay(decay_), eps(eps_) {}
};

// Ascent step: updates the accumulators and lambda in place, returns the step taken.
Vector adadelta_step(AdadeltaState& state, Vector& lambda, const Vector& grad);

}  // namespace evb
