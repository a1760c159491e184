#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evb/types.hpp"

namespace evb {

// Posterior draws with named columns, one row per draw.
struct DrawSet {
  std::vector<std::string> names;
  Matrix values;

  int draws() const { return static_cast<int>(values.rows()); }
  int columns() const { return static_cast<int>(values.cols()); }
};

void write_drawset_csv(const std::filesystem::path& path, const DrawSet& draws);
DrawSet read_drawset_csv(const std::filesystem::path& path);

// Column names x1..xT (one state) or x<t>_<i> (several states per time).
std::vector<std::string> state_column_names(int T, int dim_state);

}  // namespace evb
