#include "evb/variational.hpp"

#include <cmath>

namespace evb {

VariationalParams VariationalParams::init(const Vector& mu, int factors, double d0) {
  VariationalParams q;
  q.mu = mu;
  q.B = Matrix::Zero(mu.size(), std::min<Eigen::Index>(factors, mu.size()));
  q.d = Vector::Constant(mu.size(), d0);
  return q;
}

Matrix VariationalParams::covariance() const {
  Matrix omega = B * B.transpose();
  omega.diagonal() += d.array().square().matrix();
  return omega;
}

int VariationalParams::packed_size() const {
  int count = 2 * dim();
  for (int j = 0; j < factors(); ++j) count += dim() - j;
  return count;
}

Vector VariationalParams::pack() const {
  Vector lambda(packed_size());
  lambda.head(dim()) = mu;
  lambda.segment(dim(), dim()) = d;
  int k = 2 * dim();
  for (int j = 0; j < factors(); ++j)
    for (int i = j; i < dim(); ++i) lambda[k++] = B(i, j);
  return lambda;
}

void VariationalParams::unpack(const Vector& lambda) {
  if (lambda.size() != packed_size()) throw DomainError("variational parameters: wrong packed length");
  mu = lambda.head(dim());
  d = lambda.segment(dim(), dim());
  int k = 2 * dim();
  for (int j = 0; j < factors(); ++j)
    for (int i = j; i < dim(); ++i) B(i, j) = lambda[k++];
}

Vector reparam_draw(const VariationalParams& q, const Vector& z, const Vector& eps) {
  return q.mu + q.B * z + q.d.cwiseProduct(eps);
}

Vector grad_log_q(const VariationalParams& q, const Vector& theta) {
  const Vector r = theta - q.mu;
  if ((q.d.array() != 0.0).all()) {
    // (D^2 + B B')^{-1} = D^{-2} - D^{-2} B (I + B' D^{-2} B)^{-1} B' D^{-2}
    const Vector dinv2 = q.d.array().square().inverse();
    const Vector a = dinv2.cwiseProduct(r);
    if (q.factors() == 0) return -a;
    const Matrix DB = dinv2.asDiagonal() * q.B;
    Matrix inner = q.B.transpose() * DB;
    inner.diagonal().array() += 1.0;
    const Vector w = inner.llt().solve(q.B.transpose() * a);
    return -(a - DB * w);
  }
  const Eigen::LDLT<Matrix> ldlt(q.covariance());
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all())
    throw Error("variational covariance is singular");
  return -ldlt.solve(r);
}

double log_q(const VariationalParams& q, const Vector& theta) {
  const Eigen::LLT<Matrix> llt(q.covariance());
  if (llt.info() != Eigen::Success) throw Error("variational covariance is singular");
  const Vector r = theta - q.mu;
  const Vector s = llt.matrixL().solve(r);
  return -0.5 * q.dim() * kLogTwoPi - llt.matrixLLT().diagonal().array().log().sum() - 0.5 * s.squaredNorm();
}

Vector elbo_gradient(const VariationalParams& q, const Vector& z, const Vector& eps, const Vector& bracket) {
  Vector g(q.packed_size());
  const int n = q.dim();
  g.head(n) = bracket;
  g.segment(n, n) = bracket.cwiseProduct(eps);
  int k = 2 * n;
  for (int j = 0; j < q.factors(); ++j)
    for (int i = j; i < n; ++i) g[k++] = bracket[i] * z[j];
  return g;
}

Matrix draw_parameters(const VariationalParams& q, int n, Rng& rng) {
  Matrix out(n, q.dim());
  Vector z(q.factors()), eps(q.dim());
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = std_normal(rng);
    for (Eigen::Index j = 0; j < eps.size(); ++j) eps[j] = std_normal(rng);
    out.row(s) = reparam_draw(q, z, eps).transpose();
  }
  return out;
}

}  // namespace evb
