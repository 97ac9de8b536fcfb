#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semidecay::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Strict decimal parse; throws Parse naming `what` on junk.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);
std::vector<double> split_numbers(std::string_view s, const std::string& what);

}  // namespace semidecay::text
