#include "evb/sv_model.hpp"

#include <cmath>

namespace evb {

Ar1Model::Ar1Model(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("inverse gamma prior needs alpha, beta > 0");
}

bool Ar1Model::in_domain(const Vector& c) const {
  return c.size() == 3 && std::isfinite(c[0]) && c[1] > 0 && c[1] < kRhoMax && c[2] > 0 &&
         std::isfinite(c[2]);
}

bool Ar1Model::simulable(const Vector& c) const {
  return c.size() == 3 && std::isfinite(c[0]) && c[1] >= 0 && c[1] < kRhoMax && c[2] >= 0 &&
         std::isfinite(c[2]);
}

Vector Ar1Model::transform(const Vector& c) const {
  if (!in_domain(c)) throw DomainError("AR(1) parameters outside 0 < rho < 0.995, sigma > 0");
  Vector u(3);
  u << c[0], logit(c[1] / kRhoMax), 2.0 * std::log(c[2]);
  return u;
}

Vector Ar1Model::inverse_transform(const Vector& u) const {
  if (u.size() != 3) throw DomainError("AR(1) model expects 3 parameters");
  Vector c(3);
  c << u[0], kRhoMax * logistic(u[1]), std::exp(0.5 * u[2]);
  return c;
}

double Ar1Model::log_prior(const Vector& u) const {
  const double xbar = u[0], kappa = u[1], c = u[2];
  const double lp_xbar = -0.5 * std::log(2.0 * M_PI * kXbarPriorVar) - 0.5 * xbar * xbar / kXbarPriorVar;
  // log of e^k / (1 + e^k)^2, written to avoid overflow
  const double lp_kappa = -std::abs(kappa) - 2.0 * std::log1p(std::exp(-std::abs(kappa)));
  const double lp_c = alpha_ * std::log(beta_) - std::lgamma(alpha_) - alpha_ * c - beta_ * std::exp(-c);
  return lp_xbar + lp_kappa + lp_c;
}

Vector Ar1Model::log_prior_grad(const Vector& u) const {
  Vector g(3);
  g << -u[0] / kXbarPriorVar, 1.0 - 2.0 * logistic(u[1]), -alpha_ + beta_ * std::exp(-u[2]);
  return g;
}

GaussianTransition Ar1Model::transition(const Vector& c) const {
  const double xbar = c[0], rho = c[1], sigma2 = c[2] * c[2];
  GaussianTransition tr;
  tr.intercept = Vector::Constant(1, xbar * (1.0 - rho));
  tr.coef = Vector::Constant(1, rho);
  tr.precision = Matrix::Constant(1, 1, 1.0 / sigma2);
  tr.first_mean = Vector::Constant(1, xbar);
  tr.first_precision = Matrix::Constant(1, 1, (1.0 - rho * rho) / sigma2);
  return tr;
}

double Ar1Model::log_state_density(double xbar, double rho, double sigma, const StateMatrix& x) const {
  const Eigen::Index T = x.rows();
  if (T == 0) return 0.0;
  const double sigma2 = sigma * sigma;
  const double one_m_r2 = 1.0 - rho * rho;
  const double e1 = x(0, 0) - xbar;
  double ss = 0.0;
  for (Eigen::Index t = 1; t < T; ++t) {
    const double r = x(t, 0) - xbar - rho * (x(t - 1, 0) - xbar);
    ss += r * r;
  }
  return -0.5 * static_cast<double>(T) * (kLogTwoPi + std::log(sigma2)) + 0.5 * std::log(one_m_r2) -
         0.5 * (e1 * e1 * one_m_r2 + ss) / sigma2;
}

double Ar1Model::log_joint(const Vector& u, const StateMatrix& x, const Dataset& data) const {
  const Vector c = inverse_transform(u);
  double lm = 0.0;
  for (int t = 0; t < data.T(); ++t)
    lm += measurement_logdensity(data, t, {&x(t, 0), 1}, c);
  return lm + log_state_density(c[0], c[1], c[2], x) + log_prior(u);
}

Vector Ar1Model::log_joint_grad(const Vector& u, const StateMatrix& x, const Dataset& /*data*/) const {
  const double xbar = u[0];
  const double rho = kRhoMax * logistic(u[1]);
  const double sigma2 = std::exp(u[2]);
  const double one_m_r2 = 1.0 - rho * rho;
  const Eigen::Index T = x.rows();
  if (T == 0) return log_prior_grad(u);

  const double e1 = x(0, 0) - xbar;
  double sum_r = 0.0, sum_r_lag = 0.0, ss = 0.0;
  for (Eigen::Index t = 1; t < T; ++t) {
    const double lag = x(t - 1, 0) - xbar;
    const double r = x(t, 0) - xbar - rho * lag;
    sum_r += r;
    sum_r_lag += r * lag;
    ss += r * r;
  }

  const double d_xbar = e1 * one_m_r2 / sigma2 + (1.0 - rho) * sum_r / sigma2;
  const double d_rho = -rho / one_m_r2 + rho * e1 * e1 / sigma2 + sum_r_lag / sigma2;
  const double drho_dkappa = kRhoMax * logistic(u[1]) * (1.0 - logistic(u[1]));
  const double d_c = -0.5 * static_cast<double>(T) + 0.5 * (e1 * e1 * one_m_r2 + ss) / sigma2;

  Vector g(3);
  g << d_xbar, d_rho * drho_dkappa, d_c;
  return g + log_prior_grad(u);
}

StateMatrix Ar1Model::state_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const {
  const double xbar = u[0];
  const double rho = kRhoMax * logistic(u[1]);
  const double sigma2 = std::exp(u[2]);
  const Eigen::Index T = x.rows();
  StateMatrix g(T, 1);
  if (T == 0) return g;
  for (Eigen::Index t = 0; t < T; ++t) g(t, 0) = measurement_state_grad(data.y(t, 0), x(t, 0));
  // r_t = x_t - xbar - rho (x_{t-1} - xbar); the first period has precision (1 - rho^2) / sigma^2.
  g(0, 0) -= (1.0 - rho * rho) * (x(0, 0) - xbar) / sigma2;
  for (Eigen::Index t = 1; t < T; ++t) {
    const double r = x(t, 0) - xbar - rho * (x(t - 1, 0) - xbar);
    g(t, 0) -= r / sigma2;
    g(t - 1, 0) += rho * r / sigma2;
  }
  return g;
}

Vector Ar1Model::initial_guess(const Dataset& data) const {
  const auto y = data.y.col(0);
  const double mean = y.mean();
  const double var = data.T() > 1 ? (y.array() - mean).square().sum() / (data.T() - 1) : 1.0;
  Vector c(3);
  c << std::log(std::max(var, 1e-8)), 0.9, 0.3;
  return c;
}

double SvModel::log_density(double y, double x) { return -0.5 * kLogTwoPi - 0.5 * x - 0.5 * y * y * std::exp(-x); }

double SvModel::measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                       const Vector& /*constrained*/) const {
  return log_density(data.y(t, 0), x_t[0]);
}

void SvModel::draw_observation(const Dataset& /*data*/, int /*t*/, std::span<const double> x_t, const Vector& /*constrained*/,
                               Rng& rng, std::span<double> y_t) const {
  y_t[0] = std::exp(0.5 * x_t[0]) * std_normal(rng);
}

double SvModel::measurement_state_grad(double y, double x) const { return -0.5 + 0.5 * y * y * std::exp(-x); }

LinearGaussianModel::LinearGaussianModel(double obs_var, double alpha, double beta)
    : Ar1Model(alpha, beta), obs_var_(obs_var) {
  if (!(obs_var > 0)) throw DomainError("observation variance must be positive");
}

double LinearGaussianModel::measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                                   const Vector& /*constrained*/) const {
  const double r = data.y(t, 0) - x_t[0];
  return -0.5 * (kLogTwoPi + std::log(obs_var_)) - 0.5 * r * r / obs_var_;
}

void LinearGaussianModel::draw_observation(const Dataset& /*data*/, int /*t*/, std::span<const double> x_t, const Vector& /*constrained*/,
                                           Rng& rng, std::span<double> y_t) const {
  y_t[0] = x_t[0] + std::sqrt(obs_var_) * std_normal(rng);
}

double LinearGaussianModel::measurement_state_grad(double y, double x) const { return (y - x) / obs_var_; }

}  // namespace evb
