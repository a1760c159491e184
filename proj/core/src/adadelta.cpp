#include "evb/adadelta.hpp"

namespace evb {

Vector adadelta_step(AdadeltaState& state, Vector& lambda, const Vector& grad) {
  if (grad.size() != lambda.size() || state.mean_sq_grad.size() != lambda.size())
    throw DomainError("adadelta: dimension mismatch");
  const double rho = state.decay;
  state.mean_sq_grad = rho * state.mean_sq_grad + (1.0 - rho) * grad.cwiseAbs2();
  const Vector step = ((state.mean_sq_step.array() + state.eps).sqrt() /
                       (state.mean_sq_grad.array() + state.eps).sqrt() * grad.array()).matrix();
  lambda += step;
  state.mean_sq_step = rho * state.mean_sq_step + (1.0 - rho) * step.cwiseAbs2();
  return step;
}

}  // namespace evb
