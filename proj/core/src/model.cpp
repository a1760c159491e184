#include "evb/model.hpp"

#include <cmath>

namespace evb {

void GaussianTransition::mean(int t, std::span<const double> prev, std::span<double> out) const {
  const int n = dim();
  if (t == 0) {
    for (int i = 0; i < n; ++i) out[i] = first_mean[i];
  } else {
    for (int i = 0; i < n; ++i) out[i] = intercept[i] + coef[i] * prev[i];
  }
}

Vector sufficient_statistics(std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Vector stats(n + n * n);
  for (Eigen::Index i = 0; i < n; ++i) stats[i] = x[i];
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) stats[n + j * n + i] = x[i] * x[j];
  return stats;
}

ExpFamilyTerms exp_family_terms(const GaussianTransition& tr, int t, std::span<const double> prev) {
  const int n = tr.dim();
  const Matrix& P = tr.precision_at(t);
  Vector m(n);
  tr.mean(t, prev, {m.data(), static_cast<std::size_t>(n)});
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) throw DomainError("transition precision is not positive definite");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  ExpFamilyTerms terms;
  terms.log_h = -0.5 * n * kLogTwoPi;
  terms.log_g = 0.5 * logdet - 0.5 * m.dot(P * m);
  terms.eta.resize(n + n * n);
  terms.eta.head(n) = P * m;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) terms.eta[n + j * n + i] = -0.5 * P(i, j);
  return terms;
}

double eval_transition_logdensity(const GaussianTransition& tr, int t, std::span<const double> x_t,
                                  std::span<const double> prev) {
  const ExpFamilyTerms terms = exp_family_terms(tr, t, prev);
  return terms.log_h + terms.log_g + terms.eta.dot(sufficient_statistics(x_t));
}

double gaussian_logpdf_precision(std::span<const double> x, std::span<const double> mean,
                                 const Matrix& precision) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw DomainError("precision is not positive definite");
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = x[i] - mean[i];
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * n * kLogTwoPi + 0.5 * logdet - 0.5 * r.dot(precision * r);
}

double StateSpaceModel::log_measurement(const Vector& constrained, const StateMatrix& x,
                                        const Dataset& data) const {
  double total = 0.0;
  const auto n = static_cast<std::size_t>(x.cols());
  for (int t = 0; t < data.T(); ++t)
    total += measurement_logdensity(data, t, {x.row(t).data(), n}, constrained);
  return total;
}

double StateSpaceModel::log_states(const GaussianTransition& tr, const StateMatrix& x) const {
  const int n = tr.dim();
  const auto un = static_cast<std::size_t>(n);
  Eigen::LLT<Matrix> llt_first(tr.first_precision);
  Eigen::LLT<Matrix> llt(tr.precision);
  if (llt_first.info() != Eigen::Success || llt.info() != Eigen::Success)
    throw DomainError("transition precision is not positive definite");
  const double logdet_first = 2.0 * llt_first.matrixLLT().diagonal().array().log().sum();
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  Vector m(n), r(n);
  double total = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double* prev = t > 0 ? x.row(t - 1).data() : nullptr;
    tr.mean(static_cast<int>(t), {prev, prev ? un : 0}, {m.data(), un});
    for (int i = 0; i < n; ++i) r[i] = x(t, i) - m[i];
    const Matrix& P = t == 0 ? tr.first_precision : tr.precision;
    total += -0.5 * n * kLogTwoPi + 0.5 * (t == 0 ? logdet_first : logdet) - 0.5 * r.dot(P * r);
  }
  return total;
}

double StateSpaceModel::log_joint(const Vector& u, const StateMatrix& x, const Dataset& data) const {
  const Vector c = inverse_transform(u);
  return log_measurement(c, x, data) + log_states(transition(c), x) + log_prior(u);
}

Matrix transition_noise_factor(const Matrix& P) {
  const auto n = P.rows();
  if (!P.allFinite()) return Matrix::Zero(n, n);
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) throw DomainError("transition precision is not positive definite");
  // x = m + L^{-T} z has covariance (L L')^{-1}.
  return llt.matrixU().solve(Matrix::Identity(n, n));
}

void simulate_states(const GaussianTransition& tr, Rng& rng, StateMatrix& x) {
  const int n = tr.dim();
  const auto un = static_cast<std::size_t>(n);
  const Matrix U_first = transition_noise_factor(tr.first_precision);
  const Matrix U = transition_noise_factor(tr.precision);
  std::normal_distribution<double> normal;
  Vector m(n), z(n);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double* prev = t > 0 ? x.row(t - 1).data() : nullptr;
    tr.mean(static_cast<int>(t), {prev, prev ? un : 0}, {m.data(), un});
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    const Vector draw = m + (t == 0 ? U_first : U) * z;
    x.row(t) = draw.transpose();
  }
}

Simulation simulate(const StateSpaceModel& model, const Vector& constrained, int T, std::uint64_t seed) {
  if (T < 1) throw DomainError("simulate: T must be >= 1");
  if (!model.simulable(constrained)) throw DomainError("simulate: parameters outside model domain");
  Rng rng = make_rng(seed);
  const GaussianTransition tr = model.transition(constrained);
  Simulation sim;
  sim.states.resize(T, model.dim_state());
  simulate_states(tr, rng, sim.states);
  sim.data.y = Matrix::Zero(T, model.dim_obs());
  for (int i = 0; i < model.dim_obs(); ++i) sim.data.series_names.push_back("y" + std::to_string(i + 1));
  model.annotate_dataset(sim.data);
  Vector row(model.dim_obs());
  const auto n = static_cast<std::size_t>(model.dim_state());
  for (int t = 0; t < T; ++t) {
    model.draw_observation(sim.data, t, {sim.states.row(t).data(), n}, constrained, rng,
                           {row.data(), static_cast<std::size_t>(row.size())});
    sim.data.y.row(t) = row.transpose();
  }
  sim.data.validate();
  return sim;
}

double logistic(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace evb
