#include "evb/kalman.hpp"

#include <string>

namespace evb {

LinearGaussianSpec LinearGaussianSpec::from_transition(const GaussianTransition& tr, const Matrix& H,
                                                       const Matrix& R) {
  LinearGaussianSpec s;
  s.m1 = tr.first_mean;
  s.P1 = tr.first_precision.inverse();
  s.c = tr.intercept;
  s.F = tr.coef.asDiagonal();
  s.Q = tr.precision.inverse();
  s.H = H;
  s.R = R;
  return s;
}

KalmanResult kalman_smoother(const LinearGaussianSpec& spec, const Matrix& y) {
  const auto T = y.rows();
  KalmanResult out;
  out.filtered_mean.resize(static_cast<std::size_t>(T));
  out.filtered_cov.resize(static_cast<std::size_t>(T));
  std::vector<Vector> pred_mean(static_cast<std::size_t>(T));
  std::vector<Matrix> pred_cov(static_cast<std::size_t>(T));

  Vector m = spec.m1;
  Matrix P = spec.P1;
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    if (t > 0) {
      m = spec.c + spec.F * out.filtered_mean[ut - 1];
      P = spec.F * out.filtered_cov[ut - 1] * spec.F.transpose() + spec.Q;
    }
    pred_mean[ut] = m;
    pred_cov[ut] = P;
    const Matrix& R = spec.obs_var.empty() ? spec.R : spec.obs_var[ut];
    Vector innov = y.row(t).transpose() - spec.H * m;
    if (spec.obs_offset.size() > 0) innov -= spec.obs_offset.row(t).transpose();
    const Matrix S = spec.H * P * spec.H.transpose() + R;
    const Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw Error("kalman: innovation covariance not positive definite at t=" + std::to_string(t + 1));
    const Matrix K = llt.solve(spec.H * P).transpose();
    out.filtered_mean[ut] = m + K * innov;
    out.filtered_cov[ut] = P - K * spec.H * P;
    out.filtered_cov[ut] = 0.5 * (out.filtered_cov[ut] + out.filtered_cov[ut].transpose()).eval();
    const Vector s = llt.matrixL().solve(innov);
    out.loglik += -0.5 * static_cast<double>(innov.size()) * kLogTwoPi -
                  llt.matrixLLT().diagonal().array().log().sum() - 0.5 * s.squaredNorm();
  }

  out.smoothed_mean = out.filtered_mean;
  out.smoothed_cov = out.filtered_cov;
  out.smoothed_cross_cov.assign(static_cast<std::size_t>(T), Matrix());
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const auto ut = static_cast<std::size_t>(t);
    const Matrix J = pred_cov[ut + 1].llt().solve(spec.F * out.filtered_cov[ut]).transpose();
    out.smoothed_mean[ut] = out.filtered_mean[ut] + J * (out.smoothed_mean[ut + 1] - pred_mean[ut + 1]);
    out.smoothed_cov[ut] = out.filtered_cov[ut] + J * (out.smoothed_cov[ut + 1] - pred_cov[ut + 1]) * J.transpose();
    out.smoothed_cross_cov[ut + 1] = out.smoothed_cov[ut + 1] * J.transpose();
  }
  return out;
}

}  // namespace evb
