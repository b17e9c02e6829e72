#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pireg::detail {

// 17 significant digits; round-trips every finite double.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::string& path);
// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

std::string sha256_file(const std::string& path);

}  // namespace pireg::detail
