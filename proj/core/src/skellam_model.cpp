#include "evb/skellam_model.hpp"

#include <cmath>
#include <limits>

#include "evb/bessel.hpp"
#include "evb/spline.hpp"

namespace evb {

double skellam_log_pmf(int y, double sigma2, double kappa) {
  if (!(sigma2 >= 0)) throw DomainError("skellam: sigma2 must be non-negative");
  if (y == 0) return std::log(kappa + (1.0 - kappa) * bessel_i_scaled(0, sigma2));
  if (kappa >= 1.0) return -std::numeric_limits<double>::infinity();
  return std::log1p(-kappa) + log_bessel_i_scaled(std::abs(y), sigma2);
}

double skellam_pmf(int y, double sigma2, double kappa) { return std::exp(skellam_log_pmf(y, sigma2, kappa)); }

int draw_skellam(double sigma2, double kappa, Rng& rng) {
  if (uniform01(rng) < kappa) return 0;
  if (sigma2 <= 0) return 0;
  std::poisson_distribution<long long> pois(0.5 * sigma2);
  return static_cast<int>(pois(rng) - pois(rng));
}

namespace {

double log_logistic_density(double v) { return -std::abs(v) - 2.0 * std::log1p(std::exp(-std::abs(v))); }

constexpr double kPriorVar = 100.0;

}  // namespace

SkellamModel::SkellamModel(SkellamOptions options) : options_(std::move(options)), n_(options_.n_series) {
  if (n_ < 1) throw DomainError("skellam: need at least one series");
  if (options_.x0.size() != 0 && options_.x0.size() != n_) throw DomainError("skellam: x0 has wrong length");
}

std::vector<std::string> SkellamModel::param_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < n_; ++i) names.push_back("kappa" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i) names.push_back("xbar" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) names.push_back("L" + std::to_string(i + 1) + std::to_string(j + 1));
  for (int i = 0; i < n_; ++i) names.push_back("omega" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < 3; ++k) names.push_back("beta" + std::to_string(i + 1) + std::to_string(k + 1));
  return names;
}

std::vector<std::string> SkellamModel::unconstrained_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < n_; ++i) names.push_back("logit_kappa" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i) names.push_back("xbar" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j)
      names.push_back((i == j ? "logL" : "L") + std::to_string(i + 1) + std::to_string(j + 1));
  for (int i = 0; i < n_; ++i) names.push_back("logit_omega" + std::to_string(i + 1));
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < 3; ++k) names.push_back("beta" + std::to_string(i + 1) + std::to_string(k + 1));
  return names;
}

bool SkellamModel::in_domain(const Vector& c) const {
  if (c.size() != dim_theta() || !c.allFinite()) return false;
  for (int i = 0; i < n_; ++i) {
    const double kappa = c[off_kappa() + i], omega = c[off_omega() + i];
    if (!(kappa > 0 && kappa < 1 && omega > 0 && omega < 1)) return false;
    if (!(c[off_l() + vech_index(i, i)] > 0)) return false;
  }
  return true;
}

Vector SkellamModel::transform(const Vector& c) const {
  if (!in_domain(c)) throw DomainError("skellam parameters outside the model domain");
  Vector u = c;
  for (int i = 0; i < n_; ++i) {
    u[off_kappa() + i] = logit(c[off_kappa() + i]);
    u[off_omega() + i] = logit(c[off_omega() + i]);
    u[off_l() + vech_index(i, i)] = std::log(c[off_l() + vech_index(i, i)]);
  }
  return u;
}

Vector SkellamModel::inverse_transform(const Vector& u) const {
  if (u.size() != dim_theta()) throw DomainError("skellam: wrong parameter length");
  Vector c = u;
  for (int i = 0; i < n_; ++i) {
    c[off_kappa() + i] = logistic(u[off_kappa() + i]);
    c[off_omega() + i] = logistic(u[off_omega() + i]);
    c[off_l() + vech_index(i, i)] = std::exp(u[off_l() + vech_index(i, i)]);
  }
  return c;
}

Matrix SkellamModel::lower_factor(const Vector& c) const {
  Matrix L = Matrix::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) L(i, j) = c[off_l() + vech_index(i, j)];
  return L;
}

// Logistic densities for logit kappa and logit omega, N(0, 100) for xbar and beta,
// and the Jeffreys-type prior on L* (log diagonal):
//   log p(L*) = -(N+1)/2 log|L L'| + sum_i (N + 2 - i) L*_ii,  i = 1..N.
double SkellamModel::log_prior(const Vector& u) const {
  double lp = 0.0;
  const double log_norm = -0.5 * std::log(2.0 * M_PI * kPriorVar);
  for (int i = 0; i < n_; ++i) {
    lp += log_logistic_density(u[off_kappa() + i]) + log_logistic_density(u[off_omega() + i]);
    const double xb = u[off_xbar() + i];
    lp += log_norm - 0.5 * xb * xb / kPriorVar;
    const double ld = u[off_l() + vech_index(i, i)];
    lp += -(n_ + 1.0) * ld + (n_ + 1.0 - i) * ld;
  }
  for (int k = 0; k < 3 * n_; ++k) {
    const double b = u[off_beta() + k];
    lp += log_norm - 0.5 * b * b / kPriorVar;
  }
  return lp;
}

Vector SkellamModel::log_prior_grad(const Vector& u) const {
  Vector g = Vector::Zero(dim_theta());
  for (int i = 0; i < n_; ++i) {
    g[off_kappa() + i] = 1.0 - 2.0 * logistic(u[off_kappa() + i]);
    g[off_omega() + i] = 1.0 - 2.0 * logistic(u[off_omega() + i]);
    g[off_xbar() + i] = -u[off_xbar() + i] / kPriorVar;
    g[off_l() + vech_index(i, i)] = -(n_ + 1.0) + (n_ + 1.0 - i);
  }
  for (int k = 0; k < 3 * n_; ++k) g[off_beta() + k] = -u[off_beta() + k] / kPriorVar;
  return g;
}

GaussianTransition SkellamModel::transition(const Vector& c) const {
  const Matrix L = lower_factor(c);
  GaussianTransition tr;
  tr.intercept = c.segment(off_xbar(), n_);
  tr.coef = c.segment(off_omega(), n_);
  tr.precision = L * L.transpose();
  tr.first_precision = tr.precision;
  if (options_.x0.size() == n_) {
    tr.first_mean = tr.intercept.array() + tr.coef.array() * options_.x0.array();
  } else {
    tr.first_mean = tr.intercept.array() / (1.0 - tr.coef.array());
  }
  return tr;
}

double SkellamModel::seasonal(const Dataset& data, int t, const Vector& c, int i) const {
  if (data.covariates.cols() == 0) return 0.0;
  if (data.covariates.cols() != 3) throw DomainError("skellam: expected 3 seasonal covariates");
  return data.covariates.row(t).dot(c.segment(off_beta() + 3 * i, 3));
}

double SkellamModel::measurement_logdensity(const Dataset& data, int t, std::span<const double> x_t,
                                            const Vector& c) const {
  double lp = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double sigma2 = std::exp(seasonal(data, t, c, i) + x_t[static_cast<std::size_t>(i)]);
    lp += skellam_log_pmf(static_cast<int>(std::lround(data.y(t, i))), sigma2, c[off_kappa() + i]);
  }
  return lp;
}

void SkellamModel::draw_observation(const Dataset& data, int t, std::span<const double> x_t,
                                    const Vector& c, Rng& rng, std::span<double> y_t) const {
  for (int i = 0; i < n_; ++i) {
    const double sigma2 = std::exp(seasonal(data, t, c, i) + x_t[static_cast<std::size_t>(i)]);
    y_t[static_cast<std::size_t>(i)] = draw_skellam(sigma2, c[off_kappa() + i], rng);
  }
}

namespace {

// d log p / d logit(kappa) and d log p / d log(sigma2) for one observation.
struct MeasurementDerivs {
  double d_kappa;
  double d_log_sigma2;
};

MeasurementDerivs measurement_derivs(int y, double sigma2, double kappa) {
  if (y == 0) {
    const double i0 = bessel_i_scaled(0, sigma2), i1 = bessel_i_scaled(1, sigma2);
    const double p = kappa + (1.0 - kappa) * i0;
    return {(1.0 - i0) * kappa * (1.0 - kappa) / p, (1.0 - kappa) * (i1 - i0) * sigma2 / p};
  }
  const int nu = std::abs(y);
  return {-kappa, sigma2 * bessel_i_ratio(nu, sigma2) - nu - sigma2};
}

}  // namespace

Vector SkellamModel::log_joint_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const {
  if (options_.x0.size() != n_) throw DomainError("skellam: gradients need a fixed x0");
  const Vector c = inverse_transform(u);
  const Matrix L = lower_factor(c);
  const Matrix P = L * L.transpose();
  const Vector xbar = c.segment(off_xbar(), n_);
  const Vector omega = c.segment(off_omega(), n_);
  const int T = static_cast<int>(x.rows());

  Vector g = Vector::Zero(dim_theta());
  Matrix S = Matrix::Zero(n_, n_);
  Vector r(n_), prev(n_), Pr(n_);
  Vector sum_Pr = Vector::Zero(n_), sum_Pr_lag = Vector::Zero(n_);
  for (int t = 0; t < T; ++t) {
    prev = t == 0 ? options_.x0 : Vector(x.row(t - 1).transpose());
    for (int i = 0; i < n_; ++i) r[i] = x(t, i) - xbar[i] - omega[i] * prev[i];
    S.noalias() += r * r.transpose();
    Pr.noalias() = P * r;
    sum_Pr += Pr;
    sum_Pr_lag.array() += Pr.array() * prev.array();

    for (int i = 0; i < n_; ++i) {
      const double s = seasonal(data, t, c, i);
      const double kappa = c[off_kappa() + i];
      const auto md = measurement_derivs(static_cast<int>(std::lround(data.y(t, i))), std::exp(s + x(t, i)), kappa);
      g[off_kappa() + i] += md.d_kappa;
      if (data.covariates.cols() == 3)
        g.segment(off_beta() + 3 * i, 3) += md.d_log_sigma2 * data.covariates.row(t).transpose();
    }
  }
  g.segment(off_xbar(), n_) += sum_Pr;
  g.segment(off_omega(), n_).array() += sum_Pr_lag.array() * omega.array() * (1.0 - omega.array());

  // d/dL of T log|L| - 1/2 tr(S L L') is T L^{-T} - S L; only the lower part is free.
  const Matrix Linv_t = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n_, n_)).transpose();
  const Matrix GL = T * Linv_t - S * L;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) g[off_l() + vech_index(i, j)] += GL(i, j) * (i == j ? L(i, i) : 1.0);

  return g + log_prior_grad(u);
}

StateMatrix SkellamModel::state_grad(const Vector& u, const StateMatrix& x, const Dataset& data) const {
  if (options_.x0.size() != n_) throw DomainError("skellam: gradients need a fixed x0");
  const Vector c = inverse_transform(u);
  const Matrix L = lower_factor(c);
  const Matrix P = L * L.transpose();
  const Vector xbar = c.segment(off_xbar(), n_);
  const Vector omega = c.segment(off_omega(), n_);
  const int T = static_cast<int>(x.rows());

  StateMatrix g(T, n_);
  Vector r(n_), prev(n_), Pr(n_);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n_; ++i) {
      const double s = seasonal(data, t, c, i);
      g(t, i) = measurement_derivs(static_cast<int>(std::lround(data.y(t, i))), std::exp(s + x(t, i)),
                                   c[off_kappa() + i]).d_log_sigma2;
    }
    prev = t == 0 ? options_.x0 : Vector(x.row(t - 1).transpose());
    for (int i = 0; i < n_; ++i) r[i] = x(t, i) - xbar[i] - omega[i] * prev[i];
    Pr.noalias() = P * r;
    for (int i = 0; i < n_; ++i) {
      g(t, i) -= Pr[i];
      if (t > 0) g(t - 1, i) += omega[i] * Pr[i];
    }
  }
  return g;
}

Vector SkellamModel::log_sample_variances(const Dataset& data) {
  Vector out(data.N());
  for (int i = 0; i < data.N(); ++i) {
    const auto col = data.y.col(i);
    const double mean = col.mean();
    const double var = data.T() > 1 ? (col.array() - mean).square().sum() / (data.T() - 1) : 1.0;
    out[i] = std::log(std::max(var, 1e-8));
  }
  return out;
}

Vector SkellamModel::initial_guess(const Dataset& data) const {
  const Vector logvar = log_sample_variances(data);
  Vector c = Vector::Zero(dim_theta());
  for (int i = 0; i < n_; ++i) {
    c[off_kappa() + i] = 0.1;
    c[off_omega() + i] = 0.9;
    c[off_xbar() + i] = 0.1 * logvar[i];
    c[off_l() + vech_index(i, i)] = std::sqrt(10.0);  // Sigma = 0.1 I
  }
  return c;
}

void SkellamModel::annotate_dataset(Dataset& data) const {
  const int day = options_.day_length > 0 ? options_.day_length : std::min(data.T(), kDefaultDayLength);
  std::array<int, 4> knots = options_.knots;
  if (knots[0] < 0) knots = default_knots(std::max(day, 4));
  data.covariates = build_seasonal_basis(data.T(), std::max(day, 4), knots);
}

}  // namespace evb
