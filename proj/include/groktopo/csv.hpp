#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace groktopo::csv {

/// Shortest representation that parses back to the identical double.
std::string format(double v);

/// Inverse of format(); also accepts "inf", "-inf" and "nan".
double parse(const std::string& text);

/// Empty string for nullopt, format(v) otherwise.
std::string format_optional(const std::optional<double>& v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws a Config error naming the file if absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/// Comma-separated, no quoting (fields never contain commas or newlines).
Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);

std::string join(const std::vector<std::string>& fields, char sep = ',');
std::vector<std::string> split(const std::string& line, char sep = ',');

}  // namespace groktopo::csv
