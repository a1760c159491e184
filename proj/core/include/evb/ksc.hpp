#pragma once

#include <array>

#include "evb/types.hpp"

namespace evb {

// Seven-component normal mixture for the density of log(chi^2_1).
struct MixtureApprox {
  std::array<double, 7> weight;
  std::array<double, 7> mean;
  std::array<double, 7> var;

  double density(double v) const;
  double mixture_mean() const;
  double mixture_variance() const;
};

// Constants of Kim, Shephard and Chib (1998), with component means shifted
// by -1.2704 so the mixture targets log(chi^2_1) itself.
const MixtureApprox& ksc_mixture();

// Log density of log(chi^2_1).
double log_chi2_1_density(double v);

// Cholesky factor of a symmetric positive-definite tridiagonal matrix:
// diag (n) and sub (n-1) in, L with diagonal ld and subdiagonal ls out.
struct TridiagonalCholesky {
  Vector ld;
  Vector ls;

  TridiagonalCholesky(const Vector& diag, const Vector& sub);
  // Solves L L' x = b.
  Vector solve(const Vector& b) const;
  // Solves L' x = z.
  Vector solve_upper(const Vector& z) const;
  double log_det() const;
};

}  // namespace evb
