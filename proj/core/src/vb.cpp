#include "evb/vb.hpp"

#include <chrono>
#include <cmath>

#include "evb/sv_mcmc.hpp"

namespace evb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void fill_normal(Vector& v, Rng& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
}

VariationalParams initial_q(const StateSpaceModel& model, const Dataset& data, const VbConfig& config) {
  const Vector c0 = config.init_constrained.size() > 0 ? config.init_constrained : model.initial_guess(data);
  return VariationalParams::init(model.transform(c0), config.factors, config.init_d);
}

bool plateaued(const std::vector<double>& trace, const VbConfig& config) {
  if (!config.stop_on_plateau) return false;
  const auto w = static_cast<std::size_t>(config.plateau_window);
  if (w < 2 || trace.size() < 2 * w || trace.size() % w != 0) return false;
  double prev = 0.0, last = 0.0, lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = trace.size() - 2 * w; i < trace.size() - w; ++i) prev += trace[i];
  for (std::size_t i = trace.size() - w; i < trace.size(); ++i) {
    last += trace[i];
    lo = std::min(lo, trace[i]);
    hi = std::max(hi, trace[i]);
  }
  prev /= static_cast<double>(w);
  last /= static_cast<double>(w);
  return std::abs(last - prev) < config.plateau_tol * std::max(hi - lo, 1e-12);
}

// Stationary-ish state path implied by iterating the transition mean.
Vector transition_mean_path(const GaussianTransition& tr, int T) {
  const int n = tr.dim();
  Vector mu(static_cast<Eigen::Index>(T) * n);
  Vector m = tr.first_mean;
  for (int t = 0; t < T; ++t) {
    if (t > 0) m = tr.intercept.array() + tr.coef.array() * m.array();
    mu.segment(static_cast<Eigen::Index>(t) * n, n) = m;
  }
  return mu;
}

}  // namespace

BandedStateBlock BandedStateBlock::init(const Vector& mu, double scale) {
  BandedStateBlock b;
  b.mu = mu;
  b.c0 = Vector::Constant(mu.size(), scale);
  b.c1 = Vector::Zero(mu.size());
  b.c2 = Vector::Zero(mu.size());
  return b;
}

Vector BandedStateBlock::draw(const Vector& eps) const {
  const auto M = size();
  Vector x(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    double v = c0[k] * eps[k];
    if (k >= 1) v += c1[k] * eps[k - 1];
    if (k >= 2) v += c2[k] * eps[k - 2];
    x[k] = mu[k] + v;
  }
  return x;
}

Vector BandedStateBlock::solve_upper(const Vector& v) const {
  // C' is upper triangular with C'(k, k+1) = c1[k+1], C'(k, k+2) = c2[k+2].
  const auto M = size();
  Vector w(M);
  for (Eigen::Index k = M - 1; k >= 0; --k) {
    double r = v[k];
    if (k + 1 < M) r -= c1[k + 1] * w[k + 1];
    if (k + 2 < M) r -= c2[k + 2] * w[k + 2];
    w[k] = r / c0[k];
  }
  return w;
}

double BandedStateBlock::log_density_from_eps(const Vector& eps) const {
  return -0.5 * static_cast<double>(size()) * kLogTwoPi - c0.array().abs().log().sum() - 0.5 * eps.squaredNorm();
}

Matrix BandedStateBlock::dense_factor() const {
  const auto M = size();
  Matrix C = Matrix::Zero(M, M);
  for (Eigen::Index k = 0; k < M; ++k) {
    C(k, k) = c0[k];
    if (k >= 1) C(k, k - 1) = c1[k];
    if (k >= 2) C(k, k - 2) = c2[k];
  }
  return C;
}

int BandedStateBlock::packed_size() const {
  const auto M = static_cast<int>(size());
  return 2 * M + std::max(M - 1, 0) + std::max(M - 2, 0);
}

Vector BandedStateBlock::pack() const {
  const auto M = size();
  Vector v(packed_size());
  v.head(M) = mu;
  v.segment(M, M) = c0;
  if (M > 1) v.segment(2 * M, M - 1) = c1.tail(M - 1);
  if (M > 2) v.segment(3 * M - 1, M - 2) = c2.tail(M - 2);
  return v;
}

void BandedStateBlock::unpack(const Vector& v) {
  const auto M = size();
  mu = v.head(M);
  c0 = v.segment(M, M);
  if (M > 1) c1.tail(M - 1) = v.segment(2 * M, M - 1);
  if (M > 2) c2.tail(M - 2) = v.segment(3 * M - 1, M - 2);
}

Vector elbo_gradient_estimate(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                              const Vector& z, const Vector& eps, const StateMatrix& x) {
  const Vector theta = reparam_draw(q, z, eps);
  const Vector bracket = model.log_joint_grad(theta, x, data) - grad_log_q(q, theta);
  return elbo_gradient(q, z, eps, bracket);
}

FitResult fit_efficient_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                           std::uint64_t seed) {
  if (config.iterations < 0) throw DomainError("vb: negative iteration count");
  if (config.recalibration_interval < 1) throw DomainError("vb: recalibration interval must be >= 1");
  const int T = data.T();
  const int n = model.dim_state();
  const int S = config.paths > 0 ? config.paths : default_path_count(n);

  FitResult fit;
  fit.method = "efficient-vb";
  fit.seed = seed;
  fit.q = initial_q(model, data, config);
  fit.kernel = KernelParams::zeros(T, n);
  fit.phi = model.inverse_transform(fit.q.mu);

  Vector lambda = fit.q.pack();
  AdadeltaState ada(lambda.size(), config.adadelta_decay, config.adadelta_eps);
  Rng rng = make_rng(seed);
  Vector z(fit.q.factors()), eps(fit.q.dim());
  StateMatrix x(T, n);
  std::optional<StateApprox> approx;
  CalibrationStats stats;

  fit.elbo.reserve(static_cast<std::size_t>(config.iterations));
  for (int j = 0; j < config.iterations; ++j) {
    if (j % config.recalibration_interval == 0) {
      const auto t0 = Clock::now();
      const Vector phi = model.inverse_transform(fit.q.mu);
      try {
        KernelParams a = calibrate(model, data, phi, fit.kernel, S, derive_seed(seed, 1000003ULL + j), &stats);
        approx.emplace(model.transition(phi), a);
        fit.kernel = std::move(a);
        fit.phi = phi;
      } catch (const CalibrationError&) {
        // keep the previous approximation
        ++fit.calibration_failures;
        if (!approx) approx.emplace(model.transition(fit.phi), KernelParams::zeros(T, n));
      }
      fit.timings.calibration += seconds_since(t0);
    }

    auto t0 = Clock::now();
    fill_normal(z, rng);
    fill_normal(eps, rng);
    const Vector theta = reparam_draw(fit.q, z, eps);
    const double log_qx = approx->sample(rng, x);
    fit.timings.sampling += seconds_since(t0);

    t0 = Clock::now();
    const Vector bracket = model.log_joint_grad(theta, x, data) - grad_log_q(fit.q, theta);
    fit.elbo.push_back(model.log_joint(theta, x, data) - log_q(fit.q, theta) - log_qx);
    const Vector grad = elbo_gradient(fit.q, z, eps, bracket);
    if (grad.allFinite()) {
      adadelta_step(ada, lambda, grad);
      fit.q.unpack(lambda);
    } else {
      ++fit.skipped_updates;
    }
    fit.timings.gradient += seconds_since(t0);
    ++fit.iterations_run;
    if (plateaued(fit.elbo, config)) break;
  }
  fit.clamp_events = stats.clamp_events;
  fit.ridge_events = stats.ridge_events;
  fit.max_residual = stats.max_residual;
  return fit;
}

FitResult fit_gaussian_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                          std::uint64_t seed) {
  if (config.iterations < 0) throw DomainError("vb: negative iteration count");
  const int T = data.T();
  const int n = model.dim_state();

  FitResult fit;
  fit.method = "gaussian-vb";
  fit.seed = seed;
  fit.q = initial_q(model, data, config);
  const GaussianTransition tr0 = model.transition(model.inverse_transform(fit.q.mu));
  BandedStateBlock block = BandedStateBlock::init(transition_mean_path(tr0, T), config.state_init_scale);

  const int n1 = fit.q.packed_size();
  Vector lambda(n1 + block.packed_size());
  lambda << fit.q.pack(), block.pack();
  AdadeltaState ada(lambda.size(), config.adadelta_decay, config.adadelta_eps);
  Rng rng = make_rng(seed);
  Vector z(fit.q.factors()), eps(fit.q.dim()), eps_x(block.size());
  StateMatrix x(T, n);
  Vector grad(lambda.size());
  const auto M = block.size();

  fit.elbo.reserve(static_cast<std::size_t>(config.iterations));
  for (int j = 0; j < config.iterations; ++j) {
    auto t0 = Clock::now();
    fill_normal(z, rng);
    fill_normal(eps, rng);
    fill_normal(eps_x, rng);
    const Vector theta = reparam_draw(fit.q, z, eps);
    const Vector xv = block.draw(eps_x);
    std::copy(xv.data(), xv.data() + M, x.data());
    fit.timings.sampling += seconds_since(t0);

    t0 = Clock::now();
    const Vector bracket = model.log_joint_grad(theta, x, data) - grad_log_q(fit.q, theta);
    const StateMatrix gx = model.state_grad(theta, x, data);
    // bracket over x: grad log p(y, x | theta) - grad log q(x) with grad log q(x) = -C'^{-1} eps_x
    const Vector bx = Eigen::Map<const Vector>(gx.data(), M) + block.solve_upper(eps_x);
    fit.elbo.push_back(model.log_joint(theta, x, data) - log_q(fit.q, theta) - block.log_density_from_eps(eps_x));

    grad.head(n1) = elbo_gradient(fit.q, z, eps, bracket);
    Eigen::Ref<Vector> g2 = grad.segment(n1, block.packed_size());
    g2.head(M) = bx;
    g2.segment(M, M) = bx.cwiseProduct(eps_x);
    if (M > 1) g2.segment(2 * M, M - 1) = bx.tail(M - 1).cwiseProduct(eps_x.head(M - 1));
    if (M > 2) g2.segment(3 * M - 1, M - 2) = bx.tail(M - 2).cwiseProduct(eps_x.head(M - 2));

    if (grad.allFinite()) {
      adadelta_step(ada, lambda, grad);
      // keep the factor's diagonal away from zero
      for (Eigen::Index k = 0; k < M; ++k) {
        double& ck = lambda[n1 + M + k];
        if (ck < config.state_diag_floor) {
          ck = config.state_diag_floor;
          ++fit.diag_projections;
        }
      }
      fit.q.unpack(lambda.head(n1));
      block.unpack(lambda.tail(block.packed_size()));
    } else {
      ++fit.skipped_updates;
    }
    fit.timings.gradient += seconds_since(t0);
    ++fit.iterations_run;
    if (plateaued(fit.elbo, config)) break;
  }
  fit.state_block = std::move(block);
  fit.phi = model.inverse_transform(fit.q.mu);
  return fit;
}

FitResult fit_hybrid_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                        std::uint64_t seed, ExactStateSampler sampler) {
  if (config.iterations < 0) throw DomainError("vb: negative iteration count");
  const int T = data.T();
  const int n = model.dim_state();

  FitResult fit;
  fit.method = "hybrid-vb";
  fit.seed = seed;
  fit.q = initial_q(model, data, config);
  fit.phi = model.inverse_transform(fit.q.mu);

  Vector lambda = fit.q.pack();
  AdadeltaState ada(lambda.size(), config.adadelta_decay, config.adadelta_eps);
  Rng rng = make_rng(seed);
  Vector z(fit.q.factors()), eps(fit.q.dim());
  StateMatrix x(T, n);
  const Vector mu_x = transition_mean_path(model.transition(fit.phi), T);
  std::copy(mu_x.data(), mu_x.data() + mu_x.size(), x.data());

  fit.elbo.reserve(static_cast<std::size_t>(config.iterations));
  for (int j = 0; j < config.iterations; ++j) {
    auto t0 = Clock::now();
    fill_normal(z, rng);
    fill_normal(eps, rng);
    const Vector theta = reparam_draw(fit.q, z, eps);
    sampler(model.inverse_transform(theta), x, rng);
    fit.timings.sampling += seconds_since(t0);

    t0 = Clock::now();
    const Vector bracket = model.log_joint_grad(theta, x, data) - grad_log_q(fit.q, theta);
    // log q(x|y) = log p(x|y,theta) is intractable, so the trace omits it.
    fit.elbo.push_back(model.log_joint(theta, x, data) - log_q(fit.q, theta));
    const Vector grad = elbo_gradient(fit.q, z, eps, bracket);
    if (grad.allFinite()) {
      adadelta_step(ada, lambda, grad);
      fit.q.unpack(lambda);
    } else {
      ++fit.skipped_updates;
    }
    fit.timings.gradient += seconds_since(t0);
    ++fit.iterations_run;
    if (plateaued(fit.elbo, config)) break;
  }
  fit.phi = model.inverse_transform(fit.q.mu);
  return fit;
}

FitResult fit_hybrid_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                        std::uint64_t seed) {
  if (model.name() != "sv")
    throw CapabilityError("hybrid-vb needs an exact state sampler; model '" + model.name() + "' has none");
  auto sampler = std::make_shared<SvConditionalStateSampler>(data.y.col(0));
  return fit_hybrid_vb(model, data, config, seed,
                       [sampler](const Vector& c, StateMatrix& x, Rng& rng) { (*sampler)(c, x, rng); });
}

std::vector<double> elbo_terms(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                               const StateApprox& approx, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw DomainError("estimate_elbo: need at least one sample");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n_samples));
  Vector z(q.factors()), eps(q.dim());
  StateMatrix x;
  for (int k = 0; k < n_samples; ++k) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(k));
    fill_normal(z, rng);
    fill_normal(eps, rng);
    const Vector theta = reparam_draw(q, z, eps);
    const double log_qx = approx.sample(rng, x);
    terms.push_back(model.log_joint(theta, x, data) - log_q(q, theta) - log_qx);
  }
  return terms;
}

double estimate_elbo(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                     const StateApprox& approx, int n_samples, std::uint64_t seed) {
  const std::vector<double> terms = elbo_terms(model, data, q, approx, n_samples, seed);
  double sum = 0.0;
  for (double v : terms) sum += v;
  return sum / static_cast<double>(terms.size());
}

StateApprox state_approximation(const StateSpaceModel& model, const FitResult& fit) {
  return StateApprox(model.transition(fit.phi), fit.kernel);
}

Matrix draw_constrained(const StateSpaceModel& model, const VariationalParams& q, int n, Rng& rng) {
  const Matrix u = draw_parameters(q, n, rng);
  Matrix out(n, model.dim_theta());
  for (int s = 0; s < n; ++s) out.row(s) = model.inverse_transform(u.row(s).transpose()).transpose();
  return out;
}

Matrix draw_state_paths(const StateApprox& approx, int n, Rng& rng) {
  Matrix out(n, static_cast<Eigen::Index>(approx.T()) * approx.dim());
  StateMatrix x;
  for (int s = 0; s < n; ++s) {
    approx.sample(rng, x);
    out.row(s) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), x.size());
  }
  return out;
}

Matrix draw_state_paths(const BandedStateBlock& block, int n, Rng& rng) {
  Matrix out(n, block.size());
  Vector eps(block.size());
  for (int s = 0; s < n; ++s) {
    fill_normal(eps, rng);
    out.row(s) = block.draw(eps).transpose();
  }
  return out;
}

}  // namespace evb
