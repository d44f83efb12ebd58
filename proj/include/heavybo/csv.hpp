#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "heavybo/linalg.hpp"

namespace heavybo {

/// Splits one CSV line on commas and trims surrounding whitespace. No quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

struct NumericTable {
  std::vector<std::string> header;  // empty when the file had no header row
  Matrix values;                    // rows = records, cols = fields
};

/// Reads a rectangular numeric CSV. The first row is treated as a header
/// when any of its fields fails to parse as a number. Empty fields read as NaN.
/// Throws DataError on ragged rows, bad numbers or an unreadable file.
NumericTable read_numeric_csv(const std::filesystem::path& path);

/// Shortest decimal form that reads back to the same double.
std::string format_exact(double v);

}  // namespace heavybo
