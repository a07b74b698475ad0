#pragma once

#include <string>
#include <vector>

namespace edckit {

// Minimal RFC-4180 CSV: comma separator, double-quote quoting with doubled
// quotes, fields may contain commas/quotes/newlines. Rows end with LF.
std::string csv_escape(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);

// Parses a whole document into rows of fields. Handles quoted newlines and
// CRLF input. Throws Error on a dangling quote.
std::vector<std::vector<std::string>> csv_parse(const std::string& text);

} // namespace edckit
