#include <gtest/gtest.h>

#include "evb/adadelta.hpp"
#include "evb/variational.hpp"
#include "oracles.hpp"

using namespace evb;

namespace {

VariationalParams random_q(int d, int p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  VariationalParams q = VariationalParams::init(Vector::Zero(d), p, 0.1);
  for (int i = 0; i < d; ++i) {
    q.mu[i] = std_normal(rng);
    q.d[i] = 0.3 + uniform01(rng);
    for (int j = 0; j < p && j <= i; ++j) q.B(i, j) = 0.5 * std_normal(rng);
  }
  return q;
}

double dense_log_density(const VariationalParams& q, const Vector& theta) {
  const Matrix omega = q.covariance();
  const Eigen::LLT<Matrix> llt(omega);
  const Vector r = theta - q.mu;
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * (q.dim() * kLogTwoPi + logdet + r.dot(llt.solve(r)));
}

}  // namespace

TEST(Reparam, IdentityCases) {
  const VariationalParams q = random_q(4, 2, 1);
  EXPECT_TRUE(reparam_draw(q, Vector::Zero(2), Vector::Zero(4)) == q.mu);
  VariationalParams u = VariationalParams::init(q.mu, 2, 1.0);
  const Vector eps{{0.1, -0.2, 0.3, 2.0}};
  EXPECT_LT((reparam_draw(u, Vector::Ones(2), eps) - (q.mu + eps)).norm(), 1e-15);
}

TEST(Reparam, EmpiricalCovarianceMatchesFactorForm) {
  const VariationalParams q = random_q(3, 2, 2);
  const int n = 1000000;
  Rng rng = make_rng(3);
  const Matrix draws = draw_parameters(q, n, rng);
  const Vector mean = draws.colwise().mean();
  const Matrix centered = draws.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / (n - 1);
  const Matrix omega = q.covariance();
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT(std::abs(mean[i] - q.mu[i]), 5 * std::sqrt(omega(i, i) / n));
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((omega(i, i) * omega(j, j) + omega(i, j) * omega(i, j)) / n);
      EXPECT_LT(std::abs(cov(i, j) - omega(i, j)), 5 * se) << i << "," << j;
    }
  }
}

TEST(Variational, FactorUpperTriangleStaysZero) {
  VariationalParams q = VariationalParams::init(Vector::Zero(4), 2);
  Vector lambda = q.pack();
  EXPECT_EQ(q.packed_size(), 4 + 4 + 4 + 3);
  lambda.setLinSpaced(lambda.size(), 1.0, 2.0);
  q.unpack(lambda);
  EXPECT_EQ(q.B(0, 1), 0.0);
  EXPECT_TRUE(q.pack() == lambda);
}

TEST(GradLogQ, ModeAndIdentity) {
  const VariationalParams q = random_q(3, 1, 4);
  EXPECT_LT(grad_log_q(q, q.mu).norm(), 1e-15);
  VariationalParams u = VariationalParams::init(q.mu, 1, 1.0);
  const Vector g = grad_log_q(u, q.mu + Vector::Unit(3, 0));
  EXPECT_LT((g + Vector::Unit(3, 0)).norm(), 1e-14);
}

TEST(GradLogQ, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const VariationalParams q = random_q(5, 2, 10 + seed);
    Rng rng = make_rng(seed);
    Vector theta(5);
    for (auto& v : theta) v = std_normal(rng);
    const Vector fd = evb::testing::central_diff([&](const Vector& t) { return dense_log_density(q, t); }, theta);
    EXPECT_LT(evb::testing::max_rel_error(grad_log_q(q, theta), fd), 1e-6);
    EXPECT_NEAR(log_q(q, theta), dense_log_density(q, theta), 1e-10);
  }
}

TEST(GradLogQ, DenseFallbackWithZeroDiagonal) {
  VariationalParams q = random_q(3, 2, 7);
  q.d[1] = 0.0;
  q.B(1, 1) = 0.4;
  Vector theta{{0.1, 0.2, -0.3}};
  const Vector fd = evb::testing::central_diff([&](const Vector& t) { return dense_log_density(q, t); }, theta);
  EXPECT_LT(evb::testing::max_rel_error(grad_log_q(q, theta), fd), 1e-6);
}

TEST(GradLogQ, SingularCovarianceThrows) {
  VariationalParams q = VariationalParams::init(Vector::Zero(3), 1, 0.0);
  EXPECT_THROW(grad_log_q(q, Vector::Ones(3)), Error);
}

TEST(ElboGradient, ZeroBracketAndMuBlock) {
  const VariationalParams q = random_q(3, 2, 5);
  const Vector z{{0.4, -1.0}}, eps{{0.3, 0.2, -0.1}};
  EXPECT_LT(elbo_gradient(q, z, eps, Vector::Zero(3)).norm(), 1e-15);
  const Vector bracket{{1.0, -2.0, 0.5}};
  const Vector g = elbo_gradient(q, z, eps, bracket);
  EXPECT_TRUE(g.head(3) == bracket);
  EXPECT_LT((g.segment(3, 3) - bracket.cwiseProduct(eps)).norm(), 1e-15);
  // B(i, j) block, column by column over j <= i
  EXPECT_DOUBLE_EQ(g[6], bracket[0] * z[0]);
  EXPECT_DOUBLE_EQ(g[9], bracket[1] * z[1]);
}

TEST(ElboGradient, ChainRuleMatchesFiniteDifferenceOfReparam) {
  // For f(theta) = w'theta the exact gradient over lambda is d theta/d lambda' w.
  const VariationalParams q = random_q(4, 2, 9);
  const Vector z{{0.7, -0.2}}, eps{{0.1, 0.5, -0.3, 1.2}};
  const Vector w{{0.3, -1.0, 2.0, 0.5}};
  auto f = [&](const Vector& lambda) {
    VariationalParams r = q;
    r.unpack(lambda);
    return w.dot(reparam_draw(r, z, eps));
  };
  const Vector fd = evb::testing::central_diff(f, q.pack());
  EXPECT_LT(evb::testing::max_rel_error(elbo_gradient(q, z, eps, w), fd), 1e-9);
}

TEST(Adadelta, ZeroGradientDecaysAccumulators) {
  AdadeltaState s(2);
  s.mean_sq_grad << 1.0, 2.0;
  s.mean_sq_step << 0.5, 0.1;
  Vector lambda{{1.0, -1.0}};
  adadelta_step(s, lambda, Vector::Zero(2));
  EXPECT_TRUE(lambda == Vector({{1.0, -1.0}}));
  EXPECT_DOUBLE_EQ(s.mean_sq_grad[0], 0.95);
  EXPECT_DOUBLE_EQ(s.mean_sq_step[1], 0.095);
}

TEST(Adadelta, FirstStepValue) {
  AdadeltaState s(1, 0.95, 1e-6);
  Vector lambda = Vector::Zero(1);
  const Vector step = adadelta_step(s, lambda, Vector::Ones(1));
  const double expected = std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6);
  EXPECT_NEAR(step[0], expected, 1e-15);
  EXPECT_NEAR(expected, 4.4721e-3, 1e-7);
  EXPECT_DOUBLE_EQ(lambda[0], step[0]);
}

TEST(Adadelta, ConstantGradientIncreasesMonotonically) {
  AdadeltaState s(1);
  Vector lambda = Vector::Zero(1);
  const Vector g = Vector::Constant(1, 0.5);
  double prev = 0.0, prev_step = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double step = adadelta_step(s, lambda, g)[0];
    EXPECT_GT(lambda[0], prev);
    prev = lambda[0];
    if (k > 1000) EXPECT_GE(step, prev_step * (1 - 1e-12));
    prev_step = step;
  }
  // Independent iteration of the recursion.
  double eg = 0.0, ed = 0.0, x = 0.0;
  for (int k = 0; k < 2000; ++k) {
    eg = 0.95 * eg + 0.05 * 0.25;
    const double d = std::sqrt(ed + 1e-6) / std::sqrt(eg + 1e-6) * 0.5;
    ed = 0.95 * ed + 0.05 * d * d;
    x += d;
  }
  EXPECT_NEAR(lambda[0], x, 1e-9 * x);
  EXPECT_GE(s.mean_sq_grad.minCoeff(), 0.0);
  EXPECT_GE(s.mean_sq_step.minCoeff(), 0.0);
}
