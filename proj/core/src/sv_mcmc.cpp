#include "evb/sv_mcmc.hpp"

#include <chrono>
#include <cmath>

namespace evb {

namespace {

constexpr double kRhoMax = 0.995;
constexpr double kXbarPriorVar = 1000.0;

double gaussian_log_kernel(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * std::log(var) - 0.5 * r * r / var;
}

}  // namespace

SvGibbs::SvGibbs(const Vector& y, const SvMcmcConfig& config) : config_(config) {
  const auto T = y.size();
  if (T < 2) throw DomainError("sv mcmc: need T >= 2");
  ystar_ = (y.array().square() + config.log_offset).log();
  // start from the data: x_t = y*_t - E log chi^2_1
  const double mean_ystar = ystar_.mean();
  xbar = mean_ystar + 1.2704;
  x = Vector::Constant(T, xbar);
  s.assign(static_cast<std::size_t>(T), 4);
}

void SvGibbs::sample_indicators(Rng& rng) {
  const MixtureApprox& mix = ksc_mixture();
  std::array<double, 7> p{};
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double e = ystar_[t] - x[t];
    double total = 0.0;
    double max_log = -INFINITY;
    std::array<double, 7> lp{};
    for (std::size_t j = 0; j < 7; ++j) {
      lp[j] = std::log(mix.weight[j]) + gaussian_log_kernel(e, mix.mean[j], mix.var[j]);
      max_log = std::max(max_log, lp[j]);
    }
    for (std::size_t j = 0; j < 7; ++j) {
      p[j] = std::exp(lp[j] - max_log);
      total += p[j];
    }
    double u = uniform01(rng) * total;
    int k = 6;
    for (int j = 0; j < 7; ++j) {
      u -= p[static_cast<std::size_t>(j)];
      if (u <= 0) {
        k = j;
        break;
      }
    }
    s[static_cast<std::size_t>(t)] = k;
  }
}

void SvGibbs::sample_states(Rng& rng) {
  const MixtureApprox& mix = ksc_mixture();
  const auto T = x.size();
  // Prior precision of x - xbar: tridiagonal with diagonal (1, 1+rho^2, ..., 1+rho^2, 1)/sigma^2.
  Vector diag(T), sub(T - 1), b(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    diag[t] = (t == 0 || t == T - 1 ? 1.0 : 1.0 + rho * rho) / sigma2;
    if (t + 1 < T) sub[t] = -rho / sigma2;
  }
  // b = Q_prior * xbar 1 + obs part
  for (Eigen::Index t = 0; t < T; ++t) {
    double row = diag[t] * xbar;
    if (t > 0) row += sub[t - 1] * xbar;
    if (t + 1 < T) row += sub[t] * xbar;
    b[t] = row;
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto j = static_cast<std::size_t>(s[static_cast<std::size_t>(t)]);
    diag[t] += 1.0 / mix.var[j];
    b[t] += (ystar_[t] - mix.mean[j]) / mix.var[j];
  }
  const TridiagonalCholesky chol(diag, sub);
  Vector z(T);
  for (Eigen::Index t = 0; t < T; ++t) z[t] = std_normal(rng);
  x = chol.solve(b) + chol.solve_upper(z);
}

std::pair<double, double> SvGibbs::xbar_conditional() const {
  const auto T = static_cast<double>(x.size());
  const double s2 = 1.0 / (1.0 / kXbarPriorVar + ((T - 1.0) * (1.0 - rho) * (1.0 - rho) + (1.0 - rho * rho)) / sigma2);
  double sum = 0.0;
  for (Eigen::Index t = 1; t < x.size(); ++t) sum += x[t] - rho * x[t - 1];
  const double mu = s2 * ((1.0 - rho * rho) * x[0] / sigma2 + (1.0 - rho) / sigma2 * sum);
  return {mu, s2};
}

std::pair<double, double> SvGibbs::sigma2_conditional() const {
  const auto T = x.size();
  double ss = (x[0] - xbar) * (x[0] - xbar) * (1.0 - rho * rho);
  for (Eigen::Index t = 1; t < T; ++t) {
    const double r = x[t] - rho * x[t - 1] - xbar * (1.0 - rho);
    ss += r * r;
  }
  return {config_.prior_alpha + 0.5 * static_cast<double>(T), config_.prior_beta + 0.5 * ss};
}

std::pair<double, double> SvGibbs::rho_proposal() const {
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index t = 1; t < x.size(); ++t) {
    const double lag = x[t - 1] - xbar;
    sxx += lag * lag;
    sxy += (x[t] - xbar) * lag;
  }
  const double s2 = sigma2 / sxx;
  return {s2 * sxy / sigma2, s2};
}

void SvGibbs::sample_xbar(Rng& rng) {
  const auto [mu, s2] = xbar_conditional();
  xbar = mu + std::sqrt(s2) * std_normal(rng);
}

void SvGibbs::sample_sigma2(Rng& rng) {
  const auto [shape, rate] = sigma2_conditional();
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  sigma2 = 1.0 / gamma(rng);
}

bool SvGibbs::sample_rho(Rng& rng) {
  const auto [mu, s2] = rho_proposal();
  const double proposal = mu + std::sqrt(s2) * std_normal(rng);
  if (!(proposal > 0.0 && proposal < kRhoMax)) return false;
  // The proposal matches the t >= 2 terms, so only the first-period density remains.
  const double e1 = x[0] - xbar;
  auto log_first = [&](double r) {
    const double v = sigma2 / (1.0 - r * r);
    return gaussian_log_kernel(e1, 0.0, v);
  };
  const double log_ratio = log_first(proposal) - log_first(rho);
  if (std::log(uniform01(rng)) < log_ratio) {
    rho = proposal;
    return true;
  }
  return false;
}

bool SvGibbs::sweep(Rng& rng) {
  sample_indicators(rng);
  sample_states(rng);
  sample_xbar(rng);
  sample_sigma2(rng);
  return sample_rho(rng);
}

LinearGaussianSpec SvGibbs::conditional_spec() const {
  const MixtureApprox& mix = ksc_mixture();
  const auto T = x.size();
  LinearGaussianSpec spec;
  spec.m1 = Vector::Constant(1, xbar);
  spec.P1 = Matrix::Constant(1, 1, sigma2 / (1.0 - rho * rho));
  spec.c = Vector::Constant(1, xbar * (1.0 - rho));
  spec.F = Matrix::Constant(1, 1, rho);
  spec.Q = Matrix::Constant(1, 1, sigma2);
  spec.H = Matrix::Identity(1, 1);
  spec.R = Matrix::Identity(1, 1);
  spec.obs_offset.resize(T, 1);
  spec.obs_var.resize(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto j = static_cast<std::size_t>(s[static_cast<std::size_t>(t)]);
    spec.obs_offset(t, 0) = mix.mean[j];
    spec.obs_var[static_cast<std::size_t>(t)] = Matrix::Constant(1, 1, mix.var[j]);
  }
  return spec;
}

SvConditionalStateSampler::SvConditionalStateSampler(const Vector& y, const SvMcmcConfig& config)
    : gibbs_(y, config) {}

void SvConditionalStateSampler::operator()(const Vector& constrained, StateMatrix& x, Rng& rng) {
  gibbs_.xbar = constrained[0];
  gibbs_.rho = constrained[1];
  gibbs_.sigma2 = constrained[2] * constrained[2];
  if (x.rows() == gibbs_.x.size()) gibbs_.x = x.col(0);
  gibbs_.sample_indicators(rng);
  gibbs_.sample_states(rng);
  x.resize(gibbs_.x.size(), 1);
  x.col(0) = gibbs_.x;
}

SvMcmcResult mcmc_sv(const Vector& y, const SvMcmcConfig& config, std::uint64_t seed) {
  if (config.draws < 1 || config.burn_in < 0 || config.thin < 1) throw DomainError("sv mcmc: bad chain lengths");
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(seed);
  SvGibbs gibbs(y, config);
  for (int i = 0; i < config.burn_in; ++i) gibbs.sweep(rng);

  SvMcmcResult out;
  const auto T = y.size();
  out.params.resize(config.draws, 3);
  const int keep = std::min(config.state_draws, config.draws);
  out.states.resize(keep, T);
  out.state_mean = Vector::Zero(T);
  const int stride = keep > 0 ? config.draws / keep : 0;
  int kept = 0, accepted = 0, proposals = 0;
  for (int i = 0; i < config.draws; ++i) {
    for (int k = 0; k < config.thin; ++k) {
      accepted += gibbs.sweep(rng) ? 1 : 0;
      ++proposals;
    }
    out.params.row(i) << gibbs.xbar, gibbs.rho, std::sqrt(gibbs.sigma2);
    out.state_mean += gibbs.x;
    if (keep > 0 && kept < keep && (i + 1) % stride == 0) out.states.row(kept++) = gibbs.x.transpose();
  }
  out.state_mean /= config.draws;
  out.rho_acceptance = static_cast<double>(accepted) / proposals;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace evb
