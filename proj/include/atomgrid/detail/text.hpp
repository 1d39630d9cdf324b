#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace atomgrid::detail {

std::string_view trim(std::string_view s);

/// Splits one comma-separated line. Quoting is not supported.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Parses a full string as a double; throws ValidationError naming `what`.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// A parsed CSV file: header names plus data rows, blank lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::filesystem::path source;

    /// Index of a required column; throws ValidationError if absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace atomgrid::detail
