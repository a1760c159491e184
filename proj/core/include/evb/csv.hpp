#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace evb {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Plain comma-separated values; no quoting support (numeric data only).
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(const std::string& field);

// Shortest representation that round-trips exactly; "nan"/"inf" for non-finite.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& fields);
  void write_values(const std::vector<double>& values);

 private:
  std::ofstream out_;
};

}  // namespace evb
