#include <gtest/gtest.h>

#include "evb/kalman.hpp"
#include "evb/ksc.hpp"
#include "oracles.hpp"

using namespace evb;

namespace {

LinearGaussianSpec bivariate_spec() {
  LinearGaussianSpec s;
  s.m1 = Vector{{0.5, -0.2}};
  s.P1 = Matrix{{1.0, 0.3}, {0.3, 2.0}};
  s.c = Vector{{0.1, 0.0}};
  s.F = Matrix{{0.8, 0.0}, {0.0, 0.5}};
  s.Q = Matrix{{0.4, 0.1}, {0.1, 0.3}};
  s.H = Matrix{{1.0, 0.5}, {0.0, 1.0}, {2.0, -1.0}};
  s.R = Matrix{{0.5, 0.0, 0.0}, {0.0, 0.3, 0.1}, {0.0, 0.1, 0.7}};
  return s;
}

}  // namespace

TEST(Kalman, SingleStepIsConjugateUpdate) {
  LinearGaussianSpec s;
  s.m1 = Vector::Constant(1, 1.0);
  s.P1 = Matrix::Constant(1, 1, 2.0);
  s.c = Vector::Zero(1);
  s.F = Matrix::Identity(1, 1);
  s.Q = Matrix::Identity(1, 1);
  s.H = Matrix::Identity(1, 1);
  s.R = Matrix::Constant(1, 1, 0.5);
  const KalmanResult r = kalman_smoother(s, Matrix::Constant(1, 1, 3.0));
  const double post_var = 1.0 / (1.0 / 2.0 + 1.0 / 0.5);
  const double post_mean = post_var * (1.0 / 2.0 + 3.0 / 0.5);
  EXPECT_NEAR(r.smoothed_mean[0][0], post_mean, 1e-14);
  EXPECT_NEAR(r.smoothed_cov[0](0, 0), post_var, 1e-14);
  EXPECT_NEAR(r.loglik, -0.5 * std::log(2 * M_PI * 2.5) - 0.5 * 4.0 / 2.5, 1e-14);
}

TEST(Kalman, UninformativeObservationsGivePriorMoments) {
  LinearGaussianSpec s = bivariate_spec();
  s.R *= 1e14;
  const Matrix y = Matrix::Ones(6, 3);
  const KalmanResult r = kalman_smoother(s, y);
  Vector m = s.m1;
  Matrix P = s.P1;
  for (int t = 0; t < 6; ++t) {
    if (t > 0) {
      m = s.c + s.F * m;
      P = s.F * P * s.F.transpose() + s.Q;
    }
    EXPECT_LT((r.smoothed_mean[t] - m).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((r.smoothed_cov[t] - P).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Kalman, MatchesDenseJointGaussianConditioning) {
  const LinearGaussianSpec s = bivariate_spec();
  const int T = 5, n = 2, N = 3;
  Rng rng = make_rng(4);
  Matrix y(T, N);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) y(t, i) = std_normal(rng);

  // Joint moments of (x_1..x_T, y_1..y_T).
  Vector mx(T * n);
  Matrix Sxx = Matrix::Zero(T * n, T * n);
  std::vector<Matrix> Fpow(T);
  Vector m = s.m1;
  for (int t = 0; t < T; ++t) {
    if (t > 0) m = s.c + s.F * m;
    mx.segment(t * n, n) = m;
  }
  // Cov(x_t, x_u) for t >= u: F^{t-u} Var(x_u)
  std::vector<Matrix> V(T);
  V[0] = s.P1;
  for (int t = 1; t < T; ++t) V[t] = s.F * V[t - 1] * s.F.transpose() + s.Q;
  for (int u = 0; u < T; ++u) {
    Matrix A = V[u];
    for (int t = u; t < T; ++t) {
      if (t > u) A = s.F * A;
      Sxx.block(t * n, u * n, n, n) = A;
      Sxx.block(u * n, t * n, n, n) = A.transpose();
    }
  }
  Matrix H = Matrix::Zero(T * N, T * n);
  Matrix R = Matrix::Zero(T * N, T * N);
  for (int t = 0; t < T; ++t) {
    H.block(t * N, t * n, N, n) = s.H;
    R.block(t * N, t * N, N, N) = s.R;
  }
  const Matrix Syy = H * Sxx * H.transpose() + R;
  const Matrix Sxy = Sxx * H.transpose();
  Vector yv(T * N);
  for (int t = 0; t < T; ++t) yv.segment(t * N, N) = y.row(t).transpose();
  const Vector my = H * mx;
  const Eigen::LDLT<Matrix> ldlt(Syy);
  const Vector post_mean = mx + Sxy * ldlt.solve(yv - my);
  const Matrix post_cov = Sxx - Sxy * ldlt.solve(Sxy.transpose());
  const Vector r = yv - my;
  const double loglik = -0.5 * (T * N * kLogTwoPi + std::log(Syy.determinant()) + r.dot(ldlt.solve(r)));

  const KalmanResult kf = kalman_smoother(s, y);
  for (int t = 0; t < T; ++t) {
    EXPECT_LT((kf.smoothed_mean[t] - post_mean.segment(t * n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((kf.smoothed_cov[t] - post_cov.block(t * n, t * n, n, n)).cwiseAbs().maxCoeff(), 1e-10);
    if (t > 0)
      EXPECT_LT((kf.smoothed_cross_cov[t] - post_cov.block(t * n, (t - 1) * n, n, n)).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_NEAR(kf.loglik, loglik, 1e-10);
}

TEST(Kalman, RejectsIndefiniteInnovation) {
  LinearGaussianSpec s = bivariate_spec();
  s.R = -10.0 * Matrix::Identity(3, 3);
  EXPECT_THROW(kalman_smoother(s, Matrix::Zero(2, 3)), Error);
}

TEST(Ksc, WeightsSumToOne) {
  const MixtureApprox& m = ksc_mixture();
  double total = 0.0;
  for (double w : m.weight) {
    EXPECT_GT(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Ksc, MomentsMatchLogChiSquare) {
  const MixtureApprox& m = ksc_mixture();
  // Quadrature oracle for the moments of log chi^2_1.
  auto f1 = [](double v) { return v * std::exp(log_chi2_1_density(v)); };
  auto f2 = [](double v) { return v * v * std::exp(log_chi2_1_density(v)); };
  const double mean = evb::testing::trapezoid(f1, -60.0, 8.0, 200000);
  const double second = evb::testing::trapezoid(f2, -60.0, 8.0, 200000);
  EXPECT_NEAR(mean, -1.2703628454614782, 1e-6);
  EXPECT_NEAR(second - mean * mean, M_PI * M_PI / 2, 1e-6);
  EXPECT_NEAR(m.mixture_mean(), -1.2704, 0.02);
  EXPECT_NEAR(m.mixture_variance(), 4.9348, 0.02);
}

TEST(Ksc, DensityCloseToExact) {
  const MixtureApprox& m = ksc_mixture();
  double worst = 0.0;
  for (double v = -15.0; v <= 5.0; v += 0.001) worst = std::max(worst, std::abs(m.density(v) - std::exp(log_chi2_1_density(v))));
  EXPECT_LT(worst, 0.01);
}

TEST(Tridiagonal, SolvesAndDeterminant) {
  const Vector diag{{4.0, 5.0, 6.0, 3.0}};
  const Vector sub{{1.0, -2.0, 0.5}};
  Matrix A = Matrix::Zero(4, 4);
  A.diagonal() = diag;
  for (int i = 0; i < 3; ++i) A(i + 1, i) = A(i, i + 1) = sub[i];
  const TridiagonalCholesky chol(diag, sub);
  const Vector b{{1.0, 2.0, -1.0, 0.5}};
  EXPECT_LT((chol.solve(b) - A.ldlt().solve(b)).norm(), 1e-13);
  EXPECT_NEAR(chol.log_det(), std::log(A.determinant()), 1e-13);
  Matrix L = Matrix::Zero(4, 4);
  L.diagonal() = chol.ld;
  for (int i = 0; i < 3; ++i) L(i + 1, i) = chol.ls[i];
  EXPECT_LT((L * L.transpose() - A).norm(), 1e-13);
  EXPECT_LT((chol.solve_upper(b) - L.transpose().triangularView<Eigen::Upper>().solve(b)).norm(), 1e-13);
}
