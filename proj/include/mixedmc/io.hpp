#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mixedmc/layout.hpp"
#include "mixedmc/matnorm.hpp"

namespace mixedmc::io {

/// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format_double(double value);
/// Whole-string parses; ConfigError on trailing text or overflow.
double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so the
/// target is either absent or complete.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Dense numeric CSV without header. Errors name the 1-based row and column.
Matrix parse_csv_matrix(std::string_view text);
Matrix read_csv_matrix(const std::filesystem::path& path);
std::string format_csv_matrix(const Matrix& m);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

ObservationMask parse_mask(std::string_view text);
ObservationMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);

/// Flat `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace mixedmc::io
