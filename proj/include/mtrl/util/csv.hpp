#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mtrl::util {

// RFC 4180 quoting: fields with commas, quotes or newlines are quoted.
std::string csv_field(std::string_view s);
std::string csv_number(double v);
std::vector<std::string> csv_split(std::string_view line);

}  // namespace mtrl::util
