#include "evb/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "evb/types.hpp"

namespace evb {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  return table;
}

double parse_double(const std::string& field) {
  if (field == "nan" || field == "NaN" || field == "NA") return std::nan("");
  if (field == "inf") return HUGE_VAL;
  if (field == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* first = field.data();
  if (!field.empty() && field[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw DomainError("not a number: '" + field + "'");
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw Error("cannot write " + path.string());
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::write_values(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

}  // namespace evb
