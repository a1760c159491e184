#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evb/types.hpp"

namespace evb {

// Observed series, one row per time point and one column per series.
struct Dataset {
  Matrix y;                               // T x N
  std::vector<std::string> series_names;  // N
  std::vector<std::string> time_labels;   // T, may be empty
  Matrix covariates;                      // T x k exogenous regressors, may be empty

  int T() const { return static_cast<int>(y.rows()); }
  int N() const { return static_cast<int>(y.cols()); }

  // Throws DomainError on empty data, non-finite values or inconsistent sizes.
  void validate() const;
};

Dataset make_dataset(Matrix y, std::vector<std::string> names = {});

// CSV layout: header row with series names, then one row per time point.
// A leading column named "t" or "time" is kept as time labels.
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace evb
