#include "evb/drawset.hpp"

#include "evb/csv.hpp"

namespace evb {

void write_drawset_csv(const std::filesystem::path& path, const DrawSet& draws) {
  if (static_cast<Eigen::Index>(draws.names.size()) != draws.values.cols())
    throw DomainError("drawset: name count does not match columns");
  CsvWriter out(path, draws.names);
  std::vector<double> row(static_cast<std::size_t>(draws.values.cols()));
  for (Eigen::Index r = 0; r < draws.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < draws.values.cols(); ++c) row[static_cast<std::size_t>(c)] = draws.values(r, c);
    out.write_values(row);
  }
}

DrawSet read_drawset_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  DrawSet d;
  d.names = table.header;
  d.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != d.names.size()) throw DomainError("drawset: ragged row in " + path.string());
    for (std::size_t c = 0; c < d.names.size(); ++c)
      d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(table.rows[r][c]);
  }
  return d;
}

std::vector<std::string> state_column_names(int T, int dim_state) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(T) * static_cast<std::size_t>(dim_state));
  for (int t = 1; t <= T; ++t)
    for (int i = 1; i <= dim_state; ++i)
      names.push_back(dim_state == 1 ? "x" + std::to_string(t) : "x" + std::to_string(t) + "_" + std::to_string(i));
  return names;
}

}  // namespace evb
