#pragma once

// Small independent reference computations shared by the tests.

#include <algorithm>
#include <cmath>
#include <functional>

#include "evb/model.hpp"

namespace evb::testing {

// Central differences with step h per coordinate.
inline Vector central_diff(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Max over coordinates of |a - b| / max(1, |b|).
inline double max_rel_error(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

inline double trapezoid(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) s += f(lo + i * h);
  return s * h;
}

// kappa, xbar, vech(L) row by row, omega, beta for a two-series Skellam model.
inline Vector skellam_truth() {
  Vector theta(15);
  theta << 0.3, 0.2,           // kappa
      0.2, 0.1,                // xbar
      3.0, 0.5, 2.5,           // L(0,0), L(1,0), L(1,1)
      0.9, 0.85,               // omega
      0.1, -0.1, 0.05,         // beta_1
      0.0, 0.1, -0.05;         // beta_2
  return theta;
}

inline Vector sv_truth() { return Vector{{-1.3, 0.95, 0.3}}; }

}  // namespace evb::testing
