#pragma once

#include "evb/rng.hpp"
#include "evb/types.hpp"

namespace evb {

// Gaussian q(theta) = N(mu, B B' + diag(d^2)) with a d x p factor matrix B
// whose upper triangle (j > i) is held at zero.
struct VariationalParams {
  Vector mu;
  Matrix B;
  Vector d;

  static VariationalParams init(const Vector& mu, int factors, double d0 = 0.1);

  int dim() const { return static_cast<int>(mu.size()); }
  int factors() const { return static_cast<int>(B.cols()); }
  Matrix covariance() const;

  // Packed order: mu, d, then B(i, j) for j <= i column by column.
  int packed_size() const;
  Vector pack() const;
  void unpack(const Vector& lambda);
};

// theta = mu + B z + d .* eps
Vector reparam_draw(const VariationalParams& q, const Vector& z, const Vector& eps);

// -Omega^{-1} (theta - mu) by the low-rank-plus-diagonal identity; falls back to a
// dense factorisation when some d_i is zero. Throws Error if Omega is singular.
Vector grad_log_q(const VariationalParams& q, const Vector& theta);
double log_q(const VariationalParams& q, const Vector& theta);

// Single-draw ELBO gradient over the packed lambda given the bracket
// g = grad log p(y, x, theta) - grad log q(theta) at theta = mu + B z + d .* eps:
//   d mu = g,  d d = g .* eps,  d B(i, j) = g_i z_j.
Vector elbo_gradient(const VariationalParams& q, const Vector& z, const Vector& eps, const Vector& bracket);

// n draws from q(theta), one per row.
Matrix draw_parameters(const VariationalParams& q, int n, Rng& rng);

}  // namespace evb
