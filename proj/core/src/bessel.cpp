#include "evb/bessel.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "evb/types.hpp"

namespace evb {

namespace {

constexpr double kSeriesLimit = 15.0;

void check_args(int nu, double z) {
  if (nu < 0) throw DomainError("bessel: negative order " + std::to_string(nu));
  if (!(z >= 0)) throw DomainError("bessel: argument must be non-negative");
}

// log I_nu(z) - z from the power series
//   I_nu(z) = (z/2)^nu sum_k (z^2/4)^k / (k! (k+nu)!),
// summed relative to the leading term so nothing overflows.
double log_series(int nu, double z) {
  if (z == 0.0) return nu == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double q = 0.25 * z * z;
  // Terms grow while q / ((k+1)(k+1+nu)) > 1; find the peak so the sum is scaled by it.
  double log_term = 0.0, log_peak = 0.0;
  int k_peak = 0;
  for (int k = 0;; ++k) {
    const double ratio = q / ((k + 1.0) * (k + 1.0 + nu));
    if (ratio <= 1.0) break;
    log_term += std::log(ratio);
    log_peak = log_term;
    k_peak = k + 1;
  }
  double sum = 0.0;
  // forward from the peak
  double term = 1.0;
  for (int k = k_peak;; ++k) {
    sum += term;
    term *= q / ((k + 1.0) * (k + 1.0 + nu));
    if (term < 1e-17 * sum) break;
  }
  // backward from the peak
  term = 1.0;
  for (int k = k_peak; k > 0; --k) {
    term *= (static_cast<double>(k) * (k + nu)) / q;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) + log_peak + std::log(sum) - z;
}

// Miller backward recursion for I_nu(z) e^{-z}, normalised by
// e^{-z} (I_0 + 2 sum_{k>=1} I_k) = 1.
double miller(int nu, double z) {
  const int start = nu + static_cast<int>(10.0 * std::sqrt(z)) + 30;
  double next = 0.0, cur = 1e-300, target = 0.0, norm = 0.0;
  for (int k = start; k >= 1; --k) {
    // I_{k-1} = I_{k+1} + (2k/z) I_k
    const double prev = next + (2.0 * k / z) * cur;
    next = cur;
    cur = prev;
    if (k == nu) target = next;
    norm += 2.0 * next;
    if (cur > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      target *= 1e-250;
      norm *= 1e-250;
    }
  }
  if (nu == 0) target = cur;
  norm += cur;
  return target / norm;
}

// Large-argument expansion I_nu(z) e^{-z} ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(nu) / z^k.
double asymptotic(int nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

bool use_asymptotic(int nu, double z) { return z > 1e4 && z > 50.0 * (static_cast<double>(nu) * nu + 1.0); }

}  // namespace

double bessel_i_scaled(int nu, double z) {
  check_args(nu, z);
  if (z < kSeriesLimit || nu > z) return std::exp(log_series(nu, z));
  if (use_asymptotic(nu, z)) return asymptotic(nu, z);
  return miller(nu, z);
}

double log_bessel_i_scaled(int nu, double z) {
  check_args(nu, z);
  if (z < kSeriesLimit || nu > z) return log_series(nu, z);
  if (use_asymptotic(nu, z)) return std::log(asymptotic(nu, z));
  return std::log(miller(nu, z));
}

double bessel_i_ratio(int nu, double z) {
  if (nu < 1) throw DomainError("bessel ratio needs nu >= 1");
  if (!(z > 0)) throw DomainError("bessel ratio needs z > 0");
  if (use_asymptotic(nu, z)) return asymptotic(nu - 1, z) / asymptotic(nu, z);
  // I_nu / I_{nu-1} = 1 / (2nu/z + I_{nu+1}/I_nu), expanded by modified Lentz.
  constexpr double tiny = 1e-300;
  double f = tiny, C = f, D = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double b = 2.0 * (nu + k) / z;
    D = b + D;
    if (D == 0.0) D = tiny;
    C = b + 1.0 / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace evb
