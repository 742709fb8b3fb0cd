#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bemseval {

// Splits one CSV line on commas. The formats handled here never quote fields.
std::vector<std::string> split_csv_line(std::string_view line);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Fixed-precision text, used for human-facing report columns.
std::string format_fixed(double value, int digits);

std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Maximal runs of non-whitespace characters.
std::size_t count_words(std::string_view text);

std::string trim(std::string_view text);

// First balanced {...} span in free text, honoring JSON string escapes.
std::optional<std::string_view> first_json_object(std::string_view text);

}  // namespace bemseval
