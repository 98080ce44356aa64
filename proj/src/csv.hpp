#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gapdecomp::csv {

using Row = std::vector<std::string>;

// RFC 4180: comma separated, optional double-quoted fields with "" escapes,
// CRLF or LF line endings. A trailing empty line is ignored.
std::vector<Row> parse(std::string_view text);

std::string quote(std::string_view field);

std::string_view trim(std::string_view s);

}  // namespace gapdecomp::csv
