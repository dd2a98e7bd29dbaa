#include "splitkit/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace splitkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in, std::string_view source) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw UsageError(fmt::format("{}:{}: empty column name", source, line_no));
        t.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw UsageError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                   t.header.size(), fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[c])) {
        throw UsageError(fmt::format("{}:{}: column {} ({}): non-numeric value '{}'", source,
                                     line_no, c + 1, t.header[c], f));
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw UsageError(fmt::format("{}: no header line", source));

  t.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", path));
  return read_csv(in, path);
}

Dataset dataset_from_table(const CsvTable& table, std::string_view response) {
  const auto it = std::find(table.header.begin(), table.header.end(), response);
  if (it == table.header.end()) {
    throw UsageError(fmt::format("response column '{}' not found", response));
  }
  if (table.header.size() < 2) throw UsageError("dataset needs at least one feature column");
  if (table.values.rows() < 2) throw UsageError("dataset needs at least two rows");
  const auto rc = static_cast<Eigen::Index>(it - table.header.begin());

  Dataset d;
  d.w = table.values.col(rc);
  d.u.resize(table.values.rows(), table.values.cols() - 1);
  Eigen::Index j = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c == rc) continue;
    d.u.col(j++) = table.values.col(c);
    d.features.push_back(table.header[static_cast<std::size_t>(c)]);
  }
  return d;
}

}  // namespace splitkit
