#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hmog {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

/// Comma-separated fields without quoting; every row must match the header width.
CsvTable read_csv(const std::filesystem::path& path);
std::string csv_line(const std::vector<std::string>& fields);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hmog
