#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mohin::text {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);

// Splits on a single separator character. A space separator splits on runs of
// blanks/tabs instead.
std::vector<std::string_view> split(std::string_view line, char sep);

std::optional<double> parse_double(std::string_view s);
std::optional<unsigned long long> parse_unsigned(std::string_view s);

}  // namespace mohin::text
