#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evb/adadelta.hpp"
#include "evb/eis.hpp"
#include "evb/model.hpp"
#include "evb/variational.hpp"

namespace evb {

struct VbConfig {
  int iterations = 10000;
  int factors = 1;
  int recalibration_interval = 200;
  int paths = 0;  // calibration paths; 0 means three times the kernel coefficients per time point
  double init_d = 0.1;
  double adadelta_decay = 0.95;
  double adadelta_eps = 1e-6;
  Vector init_constrained;  // empty: the model's initial guess

  // Gaussian VB state block
  double state_init_scale = 0.1;
  double state_diag_floor = 1e-4;

  // Optional early stop: halt once the mean ELBO over the last window moves by
  // less than plateau_tol (relative to the window's spread) against the previous window.
  bool stop_on_plateau = false;
  int plateau_window = 500;
  double plateau_tol = 0.01;
};

struct PhaseTimings {
  double calibration = 0.0;
  double sampling = 0.0;
  double gradient = 0.0;
  double total() const { return calibration + sampling + gradient; }
};

// Lower-triangular Cholesky factor C of the state covariance restricted to
// three bands of the flattened (time-major) state index:
// C(k, k) = c0[k], C(k, k-1) = c1[k], C(k, k-2) = c2[k].
struct BandedStateBlock {
  Vector mu;
  Vector c0, c1, c2;

  static BandedStateBlock init(const Vector& mu, double scale);
  Eigen::Index size() const { return mu.size(); }

  // x = mu + C eps
  Vector draw(const Vector& eps) const;
  // C'^{-1} v by banded back substitution, so grad log q(x) = -C'^{-1} eps.
  Vector solve_upper(const Vector& v) const;
  // log q(x) for x = mu + C eps.
  double log_density_from_eps(const Vector& eps) const;
  // Densely stored C, for tests.
  Matrix dense_factor() const;

  // mu, c0, c1[1..], c2[2..]: entries outside the bands have no slot.
  int packed_size() const;
  Vector pack() const;
  void unpack(const Vector& v);
};

struct FitResult {
  std::string method;
  std::uint64_t seed = 0;
  VariationalParams q;
  std::optional<BandedStateBlock> state_block;
  std::vector<double> elbo;
  PhaseTimings timings;
  int iterations_run = 0;
  int clamp_events = 0;
  int ridge_events = 0;
  int calibration_failures = 0;
  int skipped_updates = 0;
  int diag_projections = 0;
  double max_residual = 0.0;
  KernelParams kernel;
  Vector phi;  // proxy used by the final state approximation (constrained)
};

// Single-draw estimate of the ELBO gradient over packed lambda at
// theta = mu + B z + d .* eps, given a state path x.
Vector elbo_gradient_estimate(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                              const Vector& z, const Vector& eps, const StateMatrix& x);

FitResult fit_efficient_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                           std::uint64_t seed);

FitResult fit_gaussian_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                          std::uint64_t seed);

// Updates x (in place) with a draw from p(x | y, theta), theta constrained.
using ExactStateSampler = std::function<void(const Vector& constrained, StateMatrix& x, Rng& rng)>;

FitResult fit_hybrid_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                        std::uint64_t seed, ExactStateSampler sampler);
// Picks the model's exact sampler; throws CapabilityError when it has none.
FitResult fit_hybrid_vb(const StateSpaceModel& model, const Dataset& data, const VbConfig& config,
                        std::uint64_t seed);

// Terms log p(y, x, theta) - log q(theta) - log q(x | y) for n joint draws;
// draw k uses the substream (seed, k).
std::vector<double> elbo_terms(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                               const StateApprox& approx, int n_samples, std::uint64_t seed);
double estimate_elbo(const StateSpaceModel& model, const Dataset& data, const VariationalParams& q,
                     const StateApprox& approx, int n_samples, std::uint64_t seed);

// The fitted q(x|y) of an Efficient VB result.
StateApprox state_approximation(const StateSpaceModel& model, const FitResult& fit);

// Posterior draws on the constrained scale, one row per draw.
Matrix draw_constrained(const StateSpaceModel& model, const VariationalParams& q, int n, Rng& rng);

// State path draws, one row per path (T * dim_state columns, time-major).
Matrix draw_state_paths(const StateApprox& approx, int n, Rng& rng);
Matrix draw_state_paths(const BandedStateBlock& block, int n, Rng& rng);

}  // namespace evb
