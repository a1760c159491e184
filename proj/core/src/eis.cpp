#include "evb/eis.hpp"

#include <cmath>
#include <string>

#include "evb/csv.hpp"

namespace evb {

KernelParams KernelParams::zeros(int T, int n) {
  KernelParams a;
  a.b = StateMatrix::Zero(T, n);
  a.c = StateMatrix::Zero(T, n);
  return a;
}

double KernelParams::norm() const { return std::sqrt(b.squaredNorm() + c.squaredNorm()); }

namespace {

Vector transition_mean(const GaussianTransition& tr, int t, std::span<const double> prev) {
  Vector m(tr.dim());
  tr.mean(t, prev, {m.data(), static_cast<std::size_t>(m.size())});
  return m;
}

Matrix tilted_precision(const GaussianTransition& tr, int t, std::span<const double> c) {
  Matrix Q = tr.precision_at(t);
  for (Eigen::Index i = 0; i < Q.rows(); ++i) Q(i, i) -= 2.0 * c[static_cast<std::size_t>(i)];
  return Q;
}

Eigen::LLT<Matrix> checked_llt(const Matrix& Q, int t) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0).all())
    throw CalibrationError(t, "kernel precision is not positive definite at t=" + std::to_string(t + 1));
  return llt;
}

Vector span_vec(std::span<const double> s) {
  return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

}  // namespace

ConditionalMoments conditional_moments(const GaussianTransition& tr, int t, std::span<const double> b,
                                       std::span<const double> c, std::span<const double> prev) {
  const Matrix& P = tr.precision_at(t);
  const Eigen::LLT<Matrix> llt = checked_llt(tilted_precision(tr, t, c), t);
  const Vector m = transition_mean(tr, t, prev);
  ConditionalMoments out;
  out.cov = llt.solve(Matrix::Identity(P.rows(), P.cols()));
  out.mean = llt.solve(span_vec(b) + P * m);
  return out;
}

double log_chi(const GaussianTransition& tr, int t, std::span<const double> b, std::span<const double> c,
               std::span<const double> prev) {
  const Matrix& P = tr.precision_at(t);
  const Eigen::LLT<Matrix> llt = checked_llt(tilted_precision(tr, t, c), t);
  const Eigen::LLT<Matrix> llt_p(P);
  const Vector m = transition_mean(tr, t, prev);
  const Vector h = span_vec(b) + P * m;
  const double logdet_p = 2.0 * llt_p.matrixLLT().diagonal().array().log().sum();
  const double logdet_q = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (logdet_p - logdet_q) + 0.5 * h.dot(llt.solve(h)) - 0.5 * m.dot(P * m);
}

StateApprox::StateApprox(GaussianTransition tr, KernelParams a)
    : tr_(std::move(tr)), a_(std::move(a)), T_(a_.T()), n_(a_.dim()) {
  if (tr_.dim() != n_) throw DomainError("state approximation: kernel and transition dimensions differ");
  const auto nn = static_cast<std::size_t>(n_ * n_);
  const auto T = static_cast<std::size_t>(T_);
  G_.resize(T * nn);
  U_.resize(T * nn);
  Q_.resize(T * nn);
  o_.resize(T * static_cast<std::size_t>(n_));
  log_det_l_.resize(T);
  const Matrix I = Matrix::Identity(n_, n_);
  for (int t = 0; t < T_; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const Matrix& P = tr_.precision_at(t);
    const Matrix Q = tilted_precision(tr_, t, {a_.c.row(t).data(), static_cast<std::size_t>(n_)});
    const Eigen::LLT<Matrix> llt = checked_llt(Q, t);
    const Matrix G = llt.solve(P);
    const Vector o = llt.solve(Vector(a_.b.row(t).transpose()));
    const Matrix U = llt.matrixU().solve(I);
    for (int i = 0; i < n_; ++i) {
      o_[ut * n_ + i] = o[i];
      for (int j = 0; j < n_; ++j) {
        G_[ut * nn + i * n_ + j] = G(i, j);
        U_[ut * nn + i * n_ + j] = U(i, j);
        Q_[ut * nn + i * n_ + j] = Q(i, j);
      }
    }
    log_det_l_[ut] = llt.matrixLLT().diagonal().array().log().sum();
  }
}

void StateApprox::conditional_mean(int t, const double* prev, double* out) const {
  const auto ut = static_cast<std::size_t>(t);
  const auto nn = static_cast<std::size_t>(n_ * n_);
  double m[16];
  std::vector<double> m_heap;
  double* mp = m;
  if (n_ > 16) {
    m_heap.resize(static_cast<std::size_t>(n_));
    mp = m_heap.data();
  }
  for (int i = 0; i < n_; ++i) mp[i] = t == 0 ? tr_.first_mean[i] : tr_.intercept[i] + tr_.coef[i] * prev[i];
  const double* G = &G_[ut * nn];
  for (int i = 0; i < n_; ++i) {
    double acc = o_[ut * n_ + i];
    for (int j = 0; j < n_; ++j) acc += G[i * n_ + j] * mp[j];
    out[i] = acc;
  }
}

double StateApprox::sample_from_normals(std::span<const double> z, StateMatrix& x) const {
  if (static_cast<int>(z.size()) != T_ * n_) throw DomainError("state approximation: wrong normal count");
  x.resize(T_, n_);
  const auto nn = static_cast<std::size_t>(n_ * n_);
  double logq = -0.5 * T_ * n_ * kLogTwoPi;
  if (n_ == 1) {
    // scalar fast path
    const double m0 = tr_.first_mean[0], icpt = tr_.intercept[0], coef = tr_.coef[0];
    double prev = 0.0;
    for (int t = 0; t < T_; ++t) {
      const double m = t == 0 ? m0 : icpt + coef * prev;
      const double zt = z[static_cast<std::size_t>(t)];
      prev = G_[t] * m + o_[t] + U_[t] * zt;
      x(t, 0) = prev;
      logq += log_det_l_[t] - 0.5 * zt * zt;
    }
    return logq;
  }
  double* data = x.data();
  for (int t = 0; t < T_; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    double* xt = data + ut * n_;
    conditional_mean(t, t > 0 ? xt - n_ : nullptr, xt);
    const double* zt = z.data() + ut * n_;
    const double* U = &U_[ut * nn];
    double zz = 0.0;
    for (int i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (int j = i; j < n_; ++j) acc += U[i * n_ + j] * zt[j];
      xt[i] += acc;
      zz += zt[i] * zt[i];
    }
    logq += log_det_l_[ut] - 0.5 * zz;
  }
  return logq;
}

double StateApprox::sample(Rng& rng, StateMatrix& x) const {
  thread_local std::vector<double> z;
  z.resize(static_cast<std::size_t>(T_ * n_));
  std::normal_distribution<double> normal;
  for (double& v : z) v = normal(rng);
  return sample_from_normals(z, x);
}

double StateApprox::log_density(const StateMatrix& x) const {
  if (x.rows() != T_ || x.cols() != n_) throw DomainError("state approximation: path has wrong shape");
  const auto nn = static_cast<std::size_t>(n_ * n_);
  std::vector<double> mu(static_cast<std::size_t>(n_)), r(static_cast<std::size_t>(n_));
  double logq = -0.5 * T_ * n_ * kLogTwoPi;
  for (int t = 0; t < T_; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    conditional_mean(t, t > 0 ? &x(t - 1, 0) : nullptr, mu.data());
    for (int i = 0; i < n_; ++i) r[i] = x(t, i) - mu[i];
    const double* Q = &Q_[ut * nn];
    double quad = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) quad += r[i] * Q[i * n_ + j] * r[j];
    logq += log_det_l_[ut] - 0.5 * quad;
  }
  return logq;
}

ConditionalMoments StateApprox::moments(int t, std::span<const double> prev) const {
  return conditional_moments(tr_, t, {a_.b.row(t).data(), static_cast<std::size_t>(n_)},
                             {a_.c.row(t).data(), static_cast<std::size_t>(n_)}, prev);
}

double StateApprox::log_chi(int t, std::span<const double> prev) const {
  return evb::log_chi(tr_, t, {a_.b.row(t).data(), static_cast<std::size_t>(n_)},
                      {a_.c.row(t).data(), static_cast<std::size_t>(n_)}, prev);
}

namespace {

// Precomputed pieces of log chi_t(x_{t-1}) for fixed a_t, as a function of the
// transition mean m:  const + 1/2 h' V h - 1/2 m' P m with h = b + P m.
struct ChiEvaluator {
  Matrix P, V;
  Vector b;
  double constant = 0.0;
  const GaussianTransition* tr = nullptr;
  int t = 0;

  double operator()(std::span<const double> prev, Vector& m, Vector& h) const {
    tr->mean(t, prev, {m.data(), static_cast<std::size_t>(m.size())});
    h.noalias() = b + P * m;
    return constant + 0.5 * h.dot(V * h) - 0.5 * m.dot(P * m);
  }
};

// Keeps P - 2 diag(c) positive definite. Returns true when c was changed.
bool clamp_kernel(const Matrix& P, std::span<double> c) {
  Matrix Q = P;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) Q(i, i) -= 2.0 * c[static_cast<std::size_t>(i)];
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0).all()) return false;
  const double lambda_min = P.rows() == 1 ? P(0, 0) : Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues()[0];
  const double cap = 0.5 * (lambda_min - 1e-8);
  for (double& ci : c) ci = std::min(ci, cap);
  return true;
}

}  // namespace

KernelParams calibrate(const StateSpaceModel& model, const Dataset& data, const Vector& phi,
                       const KernelParams& a_init, int S, std::uint64_t seed, CalibrationStats* stats) {
  const int T = data.T();
  const int n = model.dim_state();
  if (a_init.T() != T || a_init.dim() != n) throw DomainError("calibrate: kernel parameters have wrong shape");
  const int k = 1 + 2 * n;
  if (S < k) throw DomainError("calibrate: need at least " + std::to_string(k) + " paths");

  const GaussianTransition tr = model.transition(phi);
  const StateApprox q(tr, a_init);
  std::vector<StateMatrix> paths(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
    q.sample(rng, paths[static_cast<std::size_t>(s)]);
  }

  CalibrationStats local;
  KernelParams a = KernelParams::zeros(T, n);
  Matrix X(S, k);
  Vector target(S);
  Vector m(n), h(n);
  ChiEvaluator chi_next;
  bool have_next = false;

  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      const StateMatrix& x = paths[static_cast<std::size_t>(s)];
      std::span<const double> xt{&x(t, 0), static_cast<std::size_t>(n)};
      double y = model.measurement_logdensity(data, t, xt, phi);
      if (have_next) y += chi_next(xt, m, h);
      target[s] = y;
      X(s, 0) = 1.0;
      for (int i = 0; i < n; ++i) {
        X(s, 1 + i) = xt[static_cast<std::size_t>(i)];
        X(s, 1 + n + i) = xt[static_cast<std::size_t>(i)] * xt[static_cast<std::size_t>(i)];
      }
    }

    Vector coef;
    const Eigen::JacobiSVD<Matrix> svd(X);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    if (cond > 1e12) {
      ++local.ridge_events;
      const Matrix A = X.transpose() * X + 1e-10 * Matrix::Identity(k, k);
      coef = A.ldlt().solve(X.transpose() * target);
    } else {
      coef = X.colPivHouseholderQr().solve(target);
    }
    local.max_residual = std::max(local.max_residual, (X * coef - target).cwiseAbs().maxCoeff());

    for (int i = 0; i < n; ++i) {
      a.b(t, i) = coef[1 + i];
      a.c(t, i) = coef[1 + n + i];
    }
    if (clamp_kernel(tr.precision_at(t), {&a.c(t, 0), static_cast<std::size_t>(n)})) ++local.clamp_events;

    // log chi_t under the new a_t, used as part of the target at t-1.
    const Matrix& P = tr.precision_at(t);
    const Matrix Q = tilted_precision(tr, t, {&a.c(t, 0), static_cast<std::size_t>(n)});
    const Eigen::LLT<Matrix> llt = checked_llt(Q, t);
    chi_next.P = P;
    chi_next.V = llt.solve(Matrix::Identity(n, n));
    chi_next.b = a.b.row(t).transpose();
    chi_next.constant = 0.5 * (2.0 * Eigen::LLT<Matrix>(P).matrixLLT().diagonal().array().log().sum() -
                               2.0 * llt.matrixLLT().diagonal().array().log().sum());
    chi_next.tr = &tr;
    chi_next.t = t;
    have_next = true;
  }

  if (stats != nullptr) {
    stats->clamp_events += local.clamp_events;
    stats->ridge_events += local.ridge_events;
    stats->max_residual = std::max(stats->max_residual, local.max_residual);
  }
  return a;
}

void write_kernel_csv(const std::filesystem::path& path, const KernelParams& a) {
  std::vector<std::string> header{"t"};
  for (int i = 0; i < a.dim(); ++i) header.push_back("b" + std::to_string(i + 1));
  for (int i = 0; i < a.dim(); ++i) header.push_back("c" + std::to_string(i + 1));
  CsvWriter out(path, header);
  std::vector<double> row;
  for (int t = 0; t < a.T(); ++t) {
    row.assign({static_cast<double>(t + 1)});
    for (int i = 0; i < a.dim(); ++i) row.push_back(a.b(t, i));
    for (int i = 0; i < a.dim(); ++i) row.push_back(a.c(t, i));
    out.write_values(row);
  }
}

}  // namespace evb
