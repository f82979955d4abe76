#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace edcr_spike::csv {

// Unquoted comma-separated fields; surrounding whitespace and a trailing '\r' are trimmed.
std::vector<std::string> split_line(std::string_view line);

std::string_view trim(std::string_view s);

// All non-empty lines of a text file. Throws IoError when unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes `content` verbatim, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

// Shortest representation that round-trips ("%.17g" fallback).
std::string format_double(double v);

// Fixed-point with `decimals` digits.
std::string format_fixed(double v, int decimals);

}  // namespace edcr_spike::csv
