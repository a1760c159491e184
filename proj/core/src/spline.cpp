#include "evb/spline.hpp"

#include <cmath>

namespace evb {

namespace {

struct NaturalSpline {
  std::vector<double> k, v, m;  // knots, values, second derivatives

  NaturalSpline(const std::vector<double>& knots, const std::vector<double>& values) : k(knots), v(values) {
    const std::size_t n = k.size();
    m.assign(n, 0.0);
    if (n < 3) return;
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = k[i] - k[i - 1], h1 = k[i + 1] - k[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
      if (i > 1) {
        const double w = h0 / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }

  double operator()(double t) const {
    const std::size_t n = k.size();
    if (t <= k[0]) {
      const double h = k[1] - k[0];
      const double slope = (v[1] - v[0]) / h - h * (2.0 * m[0] + m[1]) / 6.0;
      return v[0] + slope * (t - k[0]);
    }
    if (t >= k[n - 1]) {
      const double h = k[n - 1] - k[n - 2];
      const double slope = (v[n - 1] - v[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
      return v[n - 1] + slope * (t - k[n - 1]);
    }
    std::size_t i = 0;
    while (t > k[i + 1]) ++i;
    const double h = k[i + 1] - k[i];
    const double a = (k[i + 1] - t) / h, b = 1.0 - a;
    return a * v[i] + b * v[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
  }
};

}  // namespace

Matrix natural_spline_basis(const Vector& grid, const std::vector<double>& knots) {
  if (knots.size() < 2) throw DomainError("spline: need at least two knots");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("spline: knots must be strictly increasing");
  const auto J = static_cast<Eigen::Index>(knots.size());
  Matrix W(grid.size(), J);
  for (Eigen::Index j = 0; j < J; ++j) {
    std::vector<double> e(knots.size(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const NaturalSpline s(knots, e);
    for (Eigen::Index t = 0; t < grid.size(); ++t) W(t, j) = s(grid[t]);
  }
  return W;
}

Matrix build_seasonal_basis(int T, int day_length, const std::array<int, 4>& knots) {
  if (T < 1) throw DomainError("seasonal basis: T must be >= 1");
  if (day_length < 4) throw DomainError("seasonal basis: day length must be >= 4");
  for (int k : knots)
    if (k < 0 || k >= day_length) throw DomainError("seasonal basis: knot outside the trading day");
  Vector day(day_length);
  for (int i = 0; i < day_length; ++i) day[i] = i;
  const Matrix W_day = natural_spline_basis(day, {double(knots[0]), double(knots[1]), double(knots[2]), double(knots[3])});

  Matrix W(T, 4);
  for (int t = 0; t < T; ++t) W.row(t) = W_day.row(t % day_length);
  const Eigen::RowVectorXd mean = W.colwise().mean();
  if (std::abs(mean[3]) < 1e-12) throw DomainError("seasonal basis: last basis column has zero mean");
  Matrix Wt(T, 3);
  for (int j = 0; j < 3; ++j) Wt.col(j) = W.col(j) - W.col(3) * (mean[j] / mean[3]);
  // Remove the rounding residue so column sums are zero to machine precision.
  Wt.rowwise() -= Wt.colwise().mean();
  return Wt;
}

std::array<int, 4> default_knots(int day_length) {
  constexpr std::array<int, 4> base{0, 120, 718, kDefaultDayLength - 1};
  if (day_length == kDefaultDayLength) return base;
  std::array<int, 4> out{};
  const double scale = static_cast<double>(day_length - 1) / (kDefaultDayLength - 1);
  for (std::size_t i = 0; i < 4; ++i) out[i] = static_cast<int>(std::lround(base[i] * scale));
  bool distinct = true;
  for (std::size_t i = 1; i < 4; ++i) distinct = distinct && out[i] > out[i - 1];
  if (!distinct) {
    // Very short days: spread the knots evenly instead.
    if (day_length < 4) throw DomainError("seasonal basis: day too short for four knots");
    for (std::size_t i = 0; i < 4; ++i)
      out[i] = static_cast<int>(std::lround(static_cast<double>(i) * (day_length - 1) / 3.0));
  }
  return out;
}

}  // namespace evb
