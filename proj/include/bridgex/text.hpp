#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers and writers.
namespace bridgex::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);
std::size_t parse_size(std::string_view s, std::string_view what);

/// A header line of the form "#<magic>\tkey=value\tkey=value...".
struct Header {
  std::string magic;
  std::map<std::string, std::string> fields;

  const std::string& require(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
};

std::string format_header(const Header& header);
/// Throws FormatError when `line` is not a header with the expected magic.
Header parse_header(std::string_view line, std::string_view expected_magic);

std::string read_file(const std::filesystem::path& path);
/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// RFC-4180 style quoting for a single CSV field.
std::string csv_field(std::string_view s);
/// Splits one CSV line honoring double-quoted fields.
std::vector<std::string> parse_csv_line(std::string_view line);

/// 64-bit FNV-1a digest as 16 lowercase hex characters.
std::string fnv1a_hex(std::string_view data);

}  // namespace bridgex::text
