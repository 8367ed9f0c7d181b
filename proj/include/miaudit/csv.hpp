#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace miaudit::csv {

using Row = std::vector<std::string>;

// RFC-4180 style parser for comma- or tab-separated text. Handles quoted
// fields with embedded delimiters, doubled quotes, and embedded newlines.
// Records whose first unquoted character is '#' are treated as comment
// lines and skipped (our own exports carry a "# schema: ..." first line).
std::vector<Row> parse(std::string_view source, char delim = ',');

// Quotes a field when needed. Fields starting with '#' are always quoted
// so data rows can never be mistaken for comment lines.
std::string escape_field(std::string_view field, char delim);

std::string format_row(const Row& row, char delim);

}  // namespace miaudit::csv
