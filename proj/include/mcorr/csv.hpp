#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcorr/data.hpp"

namespace mcorr {

namespace csv_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_number(std::string_view cell, std::size_t row, std::string_view column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::NonNumeric, "row " + std::to_string(row) + ", column '" + std::string(column) +
                                           "': '" + std::string(cell) + "' is not a number");
  }
  if (!std::isfinite(v))
    throw Error(ErrorKind::NonFinite, "row " + std::to_string(row) + ", column '" + std::string(column) + "'");
  return v;
}

}  // namespace csv_detail

/// Reads comma-separated numeric data with a header row. The column named
/// `response_column` becomes the response; every other column is a
/// predictor, in file order.
inline SampleTable read_csv(std::istream& in, std::string_view response_column = "y") {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedCsv, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header_views = csv_detail::split(line);
  std::vector<std::string> header(header_views.begin(), header_views.end());

  std::size_t response = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == response_column) response = c;
  if (response == header.size())
    throw Error(ErrorKind::MissingColumn, "no column named '" + std::string(response_column) + "'");
  if (header.size() < 2) throw Error(ErrorKind::MissingColumn, "need at least one predictor column");

  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (csv_detail::trim(line).empty()) continue;
    ++row;
    const auto cells = csv_detail::split(line);
    if (cells.size() != header.size())
      throw Error(ErrorKind::MalformedCsv, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                               " fields, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c)
      columns[c].push_back(csv_detail::parse_number(cells[c], row, header[c]));
  }

  std::vector<std::vector<double>> x;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == response) continue;
    x.push_back(std::move(columns[c]));
    names.push_back(header[c]);
  }
  return SampleTable(std::move(columns[response]), std::move(x), header[response], std::move(names));
}

inline SampleTable load_csv(const std::filesystem::path& path, std::string_view response_column = "y") {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open '" + path.string() + "'");
  return read_csv(in, response_column);
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Writes the response first, then the predictors. Values use the shortest
/// round-trip representation, so reading the output back is bit-exact.
inline void write_csv(std::ostream& out, const SampleTable& t) {
  out << t.response_name();
  for (const auto& name : t.predictor_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < t.n(); ++i) {
    out << format_number(t.y()[i]);
    for (std::size_t k = 0; k < t.p(); ++k) out << ',' << format_number(t.x(k)[i]);
    out << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const SampleTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write '" + path.string() + "'");
  write_csv(out, t);
}

/// Plot-data CSV for a fitted transform: header "input,output", one row per
/// knot in ascending input order.
inline void write_transform_csv(std::ostream& out, const EmpiricalTransform& t) {
  out << "input,output\n";
  for (const Knot& k : t.knots()) out << format_number(k.input) << ',' << format_number(k.output) << '\n';
}

inline void write_transform_csv(const std::filesystem::path& path, const EmpiricalTransform& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write '" + path.string() + "'");
  write_transform_csv(out, t);
}

}  // namespace mcorr
