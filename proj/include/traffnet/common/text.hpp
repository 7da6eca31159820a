#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace traffnet {

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

double parse_double(std::string_view text, std::size_t line, const std::string& field);
long long parse_int(std::string_view text, std::size_t line, const std::string& field);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace traffnet
