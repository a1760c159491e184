#include "evb/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "evb/csv.hpp"

namespace evb {

void Dataset::validate() const {
  if (y.rows() < 1 || y.cols() < 1) throw DomainError("dataset: need T >= 1 and N >= 1");
  if (!y.allFinite()) throw DomainError("dataset: missing or non-finite observations");
  if (!series_names.empty() && static_cast<Eigen::Index>(series_names.size()) != y.cols())
    throw DomainError("dataset: series name count does not match columns");
  if (!time_labels.empty() && static_cast<Eigen::Index>(time_labels.size()) != y.rows())
    throw DomainError("dataset: time label count does not match rows");
  if (covariates.size() > 0 && covariates.rows() != y.rows())
    throw DomainError("dataset: covariate rows do not match T");
}

Dataset make_dataset(Matrix y, std::vector<std::string> names) {
  Dataset d;
  d.y = std::move(y);
  if (names.empty()) {
    for (Eigen::Index i = 0; i < d.y.cols(); ++i) names.push_back("y" + std::to_string(i + 1));
  }
  d.series_names = std::move(names);
  d.validate();
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  if (table.header.empty()) throw DomainError("dataset: empty CSV header in " + path.string());
  std::size_t first = 0;
  Dataset d;
  if (table.header[0] == "t" || table.header[0] == "time") first = 1;
  if (table.header.size() <= first) throw DomainError("dataset: no series columns in " + path.string());
  d.series_names.assign(table.header.begin() + static_cast<std::ptrdiff_t>(first), table.header.end());
  const auto T = static_cast<Eigen::Index>(table.rows.size());
  d.y.resize(T, static_cast<Eigen::Index>(d.series_names.size()));
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& row = table.rows[static_cast<std::size_t>(t)];
    if (row.size() != table.header.size())
      throw DomainError("dataset: ragged row " + std::to_string(t + 2) + " in " + path.string());
    if (first == 1) d.time_labels.push_back(row[0]);
    for (std::size_t j = first; j < row.size(); ++j) {
      d.y(t, static_cast<Eigen::Index>(j - first)) = parse_double(row[j]);
    }
  }
  d.validate();
  return d;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::vector<std::string> header;
  const bool labels = !data.time_labels.empty();
  if (labels) header.push_back("t");
  for (int i = 0; i < data.N(); ++i) {
    header.push_back(i < static_cast<int>(data.series_names.size()) ? data.series_names[i]
                                                                     : "y" + std::to_string(i + 1));
  }
  CsvWriter out(path, header);
  std::vector<std::string> row;
  for (int t = 0; t < data.T(); ++t) {
    row.clear();
    if (labels) row.push_back(data.time_labels[static_cast<std::size_t>(t)]);
    for (int i = 0; i < data.N(); ++i) row.push_back(format_double(data.y(t, i)));
    out.write_row(row);
  }
}

}  // namespace evb
