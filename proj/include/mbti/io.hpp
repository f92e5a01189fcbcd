#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mbti::io {

std::string read_file(const std::filesystem::path& path);
/// Writes atomically-enough for our purposes: temp file then rename.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// RFC 4180 quoting when the field needs it.
std::string csv_escape(std::string_view field);
/// Splits one CSV record. Quoted fields may not span lines.
std::vector<std::string> csv_split(std::string_view line);

/// Non-empty lines of a text file with trailing '\r' removed.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace mbti::io
