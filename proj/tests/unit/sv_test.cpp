#include <gtest/gtest.h>

#include "evb/sv_model.hpp"
#include "oracles.hpp"

using namespace evb;
using evb::testing::central_diff;
using evb::testing::max_rel_error;

namespace {

struct Point {
  Vector u;
  StateMatrix x;
  Dataset data;
};

Point random_point(std::uint64_t seed, int T) {
  Rng rng = make_rng(seed);
  Point p;
  p.u = Vector{{-1.0 + std_normal(rng), 1.0 + 2.0 * std_normal(rng), -2.0 + std_normal(rng)}};
  p.x.resize(T, 1);
  Matrix y(T, 1);
  for (int t = 0; t < T; ++t) {
    p.x(t, 0) = -1.0 + std_normal(rng);
    y(t, 0) = std::exp(0.5 * p.x(t, 0)) * std_normal(rng);
  }
  p.data = make_dataset(y);
  return p;
}

}  // namespace

TEST(SvMeasurement, ClosedFormValues) {
  EXPECT_NEAR(SvModel::log_density(0.0, 0.0), -0.9189385332046727, 1e-15);
  EXPECT_NEAR(SvModel::log_density(1.0, 0.0), -0.9189385332046727 - 0.5, 1e-15);
}

TEST(SvMeasurement, IntegratesToOneOverY) {
  const double x = 0.7, sd = std::exp(0.35);
  auto f = [&](double y) { return std::exp(SvModel::log_density(y, x)); };
  EXPECT_NEAR(evb::testing::trapezoid(f, -15 * sd, 15 * sd, 30000), 1.0, 1e-8);
}

TEST(SvJointGrad, MatchesFiniteDifferences) {
  SvModel m;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Point p = random_point(k, 25);
    const Vector fd = central_diff([&](const Vector& u) { return m.log_joint(u, p.x, p.data); }, p.u);
    EXPECT_LT(max_rel_error(m.log_joint_grad(p.u, p.x, p.data), fd), 1e-6) << "point " << k;
  }
}

TEST(SvJointGrad, PriorOnlyXbarBlock) {
  SvModel m;
  const Vector u{{2.5, 0.3, -0.2}};
  const StateMatrix none(0, 1);
  Dataset empty;
  empty.y.resize(0, 1);
  EXPECT_DOUBLE_EQ(m.log_joint_grad(u, none, empty)[0], -2.5 / 1000.0);
}

TEST(SvJointGrad, NearZeroRhoReducesToLagProducts) {
  SvModel m;
  const Point p = random_point(3, 30);
  Vector u = p.u;
  u[1] = -30.0;  // rho = 0.995 logistic(-30), effectively zero
  const double xbar = u[0], sigma2 = std::exp(u[2]);
  double lag = 0.0;
  for (int t = 1; t < 30; ++t) lag += (p.x(t - 1, 0) - xbar) * (p.x(t, 0) - xbar);
  const double ek = std::exp(u[1]);
  const double expected = lag / sigma2 * 0.995 * ek / ((1 + ek) * (1 + ek));
  const double prior = 1.0 - 2.0 * logistic(u[1]);
  // The prior term is O(1), so compare in absolute terms at rounding level.
  EXPECT_NEAR(m.log_joint_grad(u, p.x, p.data)[1], prior + expected, 1e-15);
  EXPECT_LT(std::abs(expected), 1e-8);
}

TEST(SvLogJoint, EqualsSumOfParts) {
  SvModel m;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Point p = random_point(20 + k, 15);
    const Vector c = m.inverse_transform(p.u);
    const GaussianTransition tr = m.transition(c);
    double direct = m.log_prior(p.u);
    for (int t = 0; t < 15; ++t) {
      const double xt = p.x(t, 0);
      const double prev = t > 0 ? p.x(t - 1, 0) : 0.0;
      direct += SvModel::log_density(p.data.y(t, 0), xt) +
                eval_transition_logdensity(tr, t, {&xt, 1}, {&prev, 1});
    }
    EXPECT_NEAR(m.log_joint(p.u, p.x, p.data), direct, 1e-10);
  }
}

TEST(SvStateGrad, MatchesFiniteDifferences) {
  SvModel m;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Point p = random_point(40 + k, 12);
    Vector xv = Eigen::Map<const Vector>(p.x.data(), 12);
    auto f = [&](const Vector& v) {
      StateMatrix x = Eigen::Map<const StateMatrix>(v.data(), 12, 1);
      return m.log_joint(p.u, x, p.data);
    };
    const StateMatrix g = m.state_grad(p.u, p.x, p.data);
    EXPECT_LT(max_rel_error(Eigen::Map<const Vector>(g.data(), 12), central_diff(f, xv)), 1e-6);
  }
}

TEST(SvStateGrad, VanishesAtStationaryPoint) {
  SvModel m;
  const Vector u = m.transform(Vector{{-1.3, 0.9, 0.4}});
  const StateMatrix x = StateMatrix::Constant(8, 1, -1.3);
  const Dataset d = make_dataset(Matrix::Constant(8, 1, std::exp(-0.65)));
  EXPECT_LT(m.state_grad(u, x, d).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SvStateGrad, TridiagonalDependence) {
  SvModel m;
  const Point p = random_point(77, 10);
  const StateMatrix g0 = m.state_grad(p.u, p.x, p.data);
  StateMatrix x = p.x;
  x(5, 0) += 0.3;
  const StateMatrix g1 = m.state_grad(p.u, x, p.data);
  for (int t = 0; t < 10; ++t) {
    if (t >= 4 && t <= 6) {
      EXPECT_NE(g0(t, 0), g1(t, 0));
    } else {
      EXPECT_EQ(g0(t, 0), g1(t, 0));
    }
  }
}

TEST(SvPrior, UnconstrainedDensitiesAsWritten) {
  SvModel m(1.001, 1.001);
  const Vector u{{0.4, -0.7, 0.9}};
  const double lx = -0.5 * std::log(2 * M_PI * 1000) - 0.5 * 0.16 / 1000;
  const double lk = -0.7 - 2 * std::log(1 + std::exp(-0.7));
  const double lc = 1.001 * std::log(1.001) - std::lgamma(1.001) - 1.001 * 0.9 - 1.001 * std::exp(-0.9);
  EXPECT_NEAR(m.log_prior(u), lx + lk + lc, 1e-13);
  const Vector fd = central_diff([&](const Vector& v) { return m.log_prior(v); }, u);
  EXPECT_LT(max_rel_error(m.log_prior_grad(u), fd), 1e-8);
}
