#include "evb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace evb {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double ma = a.mean(), mb = b.mean();
  const double saa = (a.array() - ma).square().sum();
  const double sbb = (b.array() - mb).square().sum();
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return ((a.array() - ma) * (b.array() - mb)).sum() / std::sqrt(saa * sbb);
}

ColumnSummary summarize_column(const std::string& name, const Eigen::Ref<const Vector>& column) {
  ColumnSummary s;
  s.name = name;
  const auto n = column.size();
  s.mean = column.mean();
  s.sd = n > 1 ? std::sqrt((column.array() - s.mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  std::vector<double> v(column.data(), column.data() + n);
  s.q_low = quantile(v, 0.005);
  s.q_high = quantile(std::move(v), 0.995);
  return s;
}

DiagnosticsReport diagnostics(const DrawSet& params, const DrawSet* states, const DiagnosticsOptions& options) {
  if (params.draws() < 1) throw DomainError("diagnostics: no draws");
  DiagnosticsReport r;
  for (int c = 0; c < params.columns(); ++c) {
    const Vector col = params.values.col(c);
    r.params.push_back(summarize_column(params.names[static_cast<std::size_t>(c)], col));
  }
  if (states == nullptr || states->draws() == 0) return r;

  const int T = states->columns();
  r.state_mean = states->values.colwise().mean().transpose();
  r.state_q_low.resize(T);
  r.state_q_high.resize(T);
  for (int t = 0; t < T; ++t) {
    std::vector<double> v(static_cast<std::size_t>(states->draws()));
    for (int s = 0; s < states->draws(); ++s) v[static_cast<std::size_t>(s)] = states->values(s, t);
    r.state_q_low[t] = quantile(v, 0.005);
    r.state_q_high[t] = quantile(std::move(v), 0.995);
  }

  const int w0 = options.window_start, wl = options.window_length;
  if (w0 < 0 || wl < 1 || w0 + wl > T) {
    if (!options.strict_window) return r;
    throw DomainError("diagnostics: correlation window runs past the state path (T=" + std::to_string(T) + ")");
  }
  r.state_corr.resize(wl, wl);
  for (int i = 0; i < wl; ++i)
    for (int j = 0; j < wl; ++j)
      r.state_corr(i, j) = correlation(states->values.col(w0 + i), states->values.col(w0 + j));

  r.lag_autocorr = Vector::Constant(options.max_lag, std::numeric_limits<double>::quiet_NaN());
  for (int k = 1; k <= options.max_lag; ++k) {
    double sum = 0.0;
    int count = 0;
    for (int t = w0; t < w0 + wl && t + k < T; ++t) {
      const double c = correlation(states->values.col(t), states->values.col(t + k));
      if (std::isfinite(c)) {
        sum += c;
        ++count;
      }
    }
    if (count > 0) r.lag_autocorr[k - 1] = sum / count;
  }
  return r;
}

ElboSummary summarize_elbo(const std::vector<double>& trace) {
  ElboSummary s;
  s.iterations = static_cast<int>(trace.size());
  if (trace.empty()) return s;
  const std::size_t tail = std::min<std::size_t>(100, trace.size());
  double sum = 0.0;
  for (std::size_t i = trace.size() - tail; i < trace.size(); ++i) sum += trace[i];
  s.final_mean = sum / static_cast<double>(tail);
  s.min = *std::min_element(trace.begin(), trace.end());
  s.max = *std::max_element(trace.begin(), trace.end());
  return s;
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json vec(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

}  // namespace

std::string report_to_json(const DiagnosticsReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  auto params = nlohmann::json::array();
  for (const auto& p : r.params)
    params.push_back({{"name", p.name}, {"mean", num(p.mean)}, {"sd", num(p.sd)},
                      {"q0.005", num(p.q_low)}, {"q0.995", num(p.q_high)}});
  j["parameters"] = params;
  if (r.state_mean.size() > 0) {
    j["state_mean"] = vec(r.state_mean);
    j["state_q0.005"] = vec(r.state_q_low);
    j["state_q0.995"] = vec(r.state_q_high);
    auto corr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.state_corr.rows(); ++i) corr.push_back(vec(r.state_corr.row(i).transpose()));
    j["state_window_corr"] = corr;
    j["state_lag_autocorr"] = vec(r.lag_autocorr);
  }
  if (r.elbo) {
    j["elbo"] = {{"iterations", r.elbo->iterations}, {"final_mean_100", num(r.elbo->final_mean)},
                 {"min", num(r.elbo->min)}, {"max", num(r.elbo->max)}};
  }
  if (!r.timings.empty()) {
    nlohmann::json t;
    for (const auto& [phase, sec] : r.timings) t[phase] = sec;
    j["seconds"] = t;
  }
  return j.dump(2) + "\n";
}

}  // namespace evb
