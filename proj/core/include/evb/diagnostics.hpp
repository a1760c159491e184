#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evb/drawset.hpp"

namespace evb {

struct ColumnSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q_low = 0.0;   // 0.5%
  double q_high = 0.0;  // 99.5%
};

struct DiagnosticsOptions {
  int window_start = 100;  // zero-based index of the first state in the correlation window
  int window_length = 10;
  int max_lag = 10;
  // When false, a window that does not fit is skipped instead of rejected.
  bool strict_window = true;
};

struct ElboSummary {
  int iterations = 0;
  double final_mean = 0.0;  // mean over the last 100 iterations
  double min = 0.0;
  double max = 0.0;
};

struct DiagnosticsReport {
  std::string method;
  std::vector<ColumnSummary> params;
  Vector state_mean;
  Vector state_q_low;
  Vector state_q_high;
  // Correlations among window states; NaN where undefined (constant column).
  Matrix state_corr;
  // Lag-k autocorrelation of the state posterior, averaged over the window, k = 1..max_lag.
  Vector lag_autocorr;
  std::optional<ElboSummary> elbo;
  std::vector<std::pair<std::string, double>> timings;
};

// Sample quantile by linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::vector<double> values, double p);

// Pearson correlation; NaN when either column is constant.
double correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

ColumnSummary summarize_column(const std::string& name, const Eigen::Ref<const Vector>& column);

// Throws DomainError on empty draws or a window running past the end of the states.
DiagnosticsReport diagnostics(const DrawSet& params, const DrawSet* states, const DiagnosticsOptions& options = {});

ElboSummary summarize_elbo(const std::vector<double>& trace);

// JSON rendering; undefined values appear as null.
std::string report_to_json(const DiagnosticsReport& report);

}  // namespace evb
