#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "splitkit/opcore.hpp"

namespace splitkit {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // one row per data line
};

/// Numeric CSV with a header line. Errors name the 1-based line and column.
[[nodiscard]] CsvTable read_csv(std::istream& in, std::string_view source = "<input>");
[[nodiscard]] CsvTable read_csv_file(const std::string& path);

struct Dataset {
  Matrix u;
  Vector w;
  std::vector<std::string> features;
};

// Splits off the response column; the remaining columns form the design.
[[nodiscard]] Dataset dataset_from_table(const CsvTable& table, std::string_view response);

}  // namespace splitkit
