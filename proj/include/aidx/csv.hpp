#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aidx::csv {

/// One parsed row; fields are unescaped.
using Row = std::vector<std::string>;

/// Reads a whole CSV file. Handles RFC-4180 double-quoted fields (used by
/// the bundled ETF reference table, whose fund names contain commas); all
/// files this toolkit writes are quote-free. CRLF and LF both accepted.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Splits a single line (no embedded newlines inside quotes).
Row split_line(std::string_view line);

/// Formats a double with 12 significant digits ("%.12g"), the precision all
/// artifact files are written with. Negative zero is normalized to "0".
std::string format_g12(double v);

/// Parses a double, throwing DataError with `context` on failure.
double parse_double(std::string_view field, const std::string& context);

/// Parses a non-negative integer, throwing DataError with `context` on failure.
long parse_long(std::string_view field, const std::string& context);

}  // namespace aidx::csv
