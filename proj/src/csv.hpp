#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moralstat::csv {

using Row = std::vector<std::string>;

// Splits one line on commas; double-quoted fields may contain commas and "" escapes.
Row split_line(std::string_view line);

// Reads all non-blank lines (CRLF tolerated, UTF-8 BOM stripped from the first line).
std::vector<Row> read_all(std::istream& in);

std::optional<double> parse_number(std::string_view cell);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

std::string quote_if_needed(std::string_view field);

}  // namespace moralstat::csv
