#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adoptminer {

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
bool is_identifier_start(char c);
bool is_identifier_char(char c);
bool is_identifier(std::string_view s);

/// Shortest round-trip representation in plain (non-exponent) decimal.
std::string format_decimal(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace adoptminer
