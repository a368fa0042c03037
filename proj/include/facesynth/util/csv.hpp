#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace facesynth::util {

using CsvRow = std::vector<std::string>;

/**
 * RFC 4180 style parsing: comma separated, double-quoted fields may contain
 * commas, doubled quotes and line breaks; LF and CRLF endings are accepted.
 * Blank lines are skipped. Throws invalid_input on an unterminated quote.
 */
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv(const std::string& path);

/// Quotes a field only when it contains a comma, quote or line break.
std::string format_csv_row(const CsvRow& row);

} // namespace facesynth::util
