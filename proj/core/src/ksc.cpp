#include "evb/ksc.hpp"

#include <cmath>

namespace evb {

const MixtureApprox& ksc_mixture() {
  static const MixtureApprox mix = [] {
    MixtureApprox m{};
    m.weight = {0.00730, 0.10556, 0.00002, 0.04395, 0.34001, 0.24566, 0.25750};
    const std::array<double, 7> raw_mean = {-10.12999, -3.97281, -8.56686, 2.77786, 0.61942, 1.79518, -1.08819};
    m.var = {5.79596, 2.61369, 5.17950, 0.16735, 0.64009, 0.34023, 1.26261};
    for (std::size_t j = 0; j < 7; ++j) m.mean[j] = raw_mean[j] - 1.2704;
    return m;
  }();
  return mix;
}

double MixtureApprox::density(double v) const {
  double p = 0.0;
  for (std::size_t j = 0; j < 7; ++j) {
    const double r = v - mean[j];
    p += weight[j] * std::exp(-0.5 * r * r / var[j]) / std::sqrt(2.0 * M_PI * var[j]);
  }
  return p;
}

double MixtureApprox::mixture_mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < 7; ++j) m += weight[j] * mean[j];
  return m;
}

double MixtureApprox::mixture_variance() const {
  const double m = mixture_mean();
  double v = 0.0;
  for (std::size_t j = 0; j < 7; ++j) v += weight[j] * (var[j] + (mean[j] - m) * (mean[j] - m));
  return v;
}

// v = log u with u ~ chi^2_1: p(v) = exp((v - e^v) / 2) / sqrt(2 pi).
double log_chi2_1_density(double v) { return 0.5 * (v - std::exp(v)) - 0.5 * std::log(2.0 * M_PI); }

TridiagonalCholesky::TridiagonalCholesky(const Vector& diag, const Vector& sub) {
  const auto n = diag.size();
  ld.resize(n);
  ls.resize(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    double a = diag[i];
    if (i > 0) {
      ls[i - 1] = sub[i - 1] / ld[i - 1];
      a -= ls[i - 1] * ls[i - 1];
    }
    if (!(a > 0)) throw Error("tridiagonal matrix is not positive definite");
    ld[i] = std::sqrt(a);
  }
}

Vector TridiagonalCholesky::solve_upper(const Vector& z) const {
  const auto n = ld.size();
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = z[i];
    if (i + 1 < n) v -= ls[i] * x[i + 1];
    x[i] = v / ld[i];
  }
  return x;
}

Vector TridiagonalCholesky::solve(const Vector& b) const {
  const auto n = ld.size();
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = b[i];
    if (i > 0) v -= ls[i - 1] * w[i - 1];
    w[i] = v / ld[i];
  }
  return solve_upper(w);
}

double TridiagonalCholesky::log_det() const { return 2.0 * ld.array().log().sum(); }

}  // namespace evb
