#pragma once

#include <vector>

#include "evb/model.hpp"

namespace evb {

// x_1 ~ N(m1, P1),  x_t = c + F x_{t-1} + N(0, Q),
// y_t = d_t + H x_t + N(0, R_t).
// obs_offset (T x N) and obs_var (per-t R_t) are optional; when absent d_t = 0, R_t = R.
struct LinearGaussianSpec {
  Vector m1;
  Matrix P1;
  Vector c;
  Matrix F;
  Matrix Q;
  Matrix H;
  Matrix R;
  Matrix obs_offset;
  std::vector<Matrix> obs_var;

  // Transition part taken from a Gaussian transition (diagonal coefficient).
  static LinearGaussianSpec from_transition(const GaussianTransition& tr, const Matrix& H, const Matrix& R);
};

struct KalmanResult {
  std::vector<Vector> filtered_mean;
  std::vector<Matrix> filtered_cov;
  std::vector<Vector> smoothed_mean;
  std::vector<Matrix> smoothed_cov;
  // Cov(x_t, x_{t-1} | y) for t >= 2 (index 0 unused, left empty).
  std::vector<Matrix> smoothed_cross_cov;
  double loglik = 0.0;
};

// Forward filter and Rauch-Tung-Striebel smoother. Throws Error when an
// innovation covariance is not positive definite.
KalmanResult kalman_smoother(const LinearGaussianSpec& spec, const Matrix& y);

}  // namespace evb
