#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "evb/model.hpp"

namespace evb {

// Kernel coefficients a_t = (b_t, c_t) per time point, acting through
// exp(b_t' x_t + c_t' (x_t .* x_t)). Rows are time points.
struct KernelParams {
  StateMatrix b;
  StateMatrix c;

  static KernelParams zeros(int T, int n);
  int T() const { return static_cast<int>(b.rows()); }
  int dim() const { return static_cast<int>(b.cols()); }
  double norm() const;
};

struct ConditionalMoments {
  Vector mean;
  Matrix cov;
};

// Gaussian q(x_t | x_{t-1}) proportional to exp(a_t'T(x_t)) p(x_t | x_{t-1}, phi):
//   precision Q = P - 2 diag(c),  mean = Q^{-1} (b + P m).
// Throws CalibrationError(t) when Q is not positive definite.
ConditionalMoments conditional_moments(const GaussianTransition& tr, int t, std::span<const double> b,
                                       std::span<const double> c, std::span<const double> prev);

// log of chi = integral of exp(a_t'T(x_t)) p(x_t | x_{t-1}, phi) dx_t,
//   1/2 (log|P| - log|Q|) + 1/2 (b + P m)' Q^{-1} (b + P m) - 1/2 m' P m.
double log_chi(const GaussianTransition& tr, int t, std::span<const double> b, std::span<const double> c,
               std::span<const double> prev);

// The state approximation q(x|y) = prod_t q(x_t | x_{t-1}) for fixed kernel
// parameters and proxy transition. Per-time factors are precomputed so that
// sampling is a single forward pass.
class StateApprox {
 public:
  StateApprox(GaussianTransition tr, KernelParams a);

  int T() const { return T_; }
  int dim() const { return n_; }

  // Draws a path into x (T x n) and returns log q(x|y).
  double sample(Rng& rng, StateMatrix& x) const;
  // Same, with the standard normals supplied (T*n values, time-major).
  double sample_from_normals(std::span<const double> z, StateMatrix& x) const;
  double log_density(const StateMatrix& x) const;

  ConditionalMoments moments(int t, std::span<const double> prev) const;
  double log_chi(int t, std::span<const double> prev) const;

  const KernelParams& params() const { return a_; }
  const GaussianTransition& transition() const { return tr_; }

 private:
  void conditional_mean(int t, const double* prev, double* out) const;

  GaussianTransition tr_;
  KernelParams a_;
  int T_;
  int n_;
  // Per time point: G = Q^{-1} P (n x n), o = Q^{-1} b (n), U = L^{-T} with Q = L L' (n x n),
  // log_det_l = log|L|, Q itself for density evaluation.
  std::vector<double> G_, o_, U_, Q_, log_det_l_;
};

struct CalibrationStats {
  int clamp_events = 0;
  int ridge_events = 0;
  double max_residual = 0.0;
};

// Paths per calibration: three times the number of kernel coefficients per time point.
inline int default_path_count(int state_dim) { return 3 * 2 * state_dim; }

// One backward sweep of recursive least squares. Simulates S paths from
// q(x|y) under a_init (substreams (seed, s)); then for t = T..1 regresses
//   log p(y_t | x_t, phi) + log chi_{t+1}(x_t)
// on (1, x_t, x_t^2) and keeps the slope coefficients as a_t. Coefficients
// that leave q improper are clamped; ill-conditioned designs get a small ridge.
KernelParams calibrate(const StateSpaceModel& model, const Dataset& data, const Vector& phi,
                       const KernelParams& a_init, int S, std::uint64_t seed, CalibrationStats* stats = nullptr);

// Columns t, b_1..b_n, c_1..c_n.
void write_kernel_csv(const std::filesystem::path& path, const KernelParams& a);

}  // namespace evb
