#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabsynth::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, embedded separators and
// newlines, CRLF or LF line ends. Throws DataError with the line number on
// an unterminated quote. Blank trailing lines are ignored.
std::vector<Row> parse(std::string_view text);

// Quotes a field when it contains a separator, quote or newline.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace tabsynth::csv
