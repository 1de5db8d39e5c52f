#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace circtz::csv {

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Line-oriented reader over plain or gzip-compressed files (zlib reads both transparently).
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// Next line without the trailing newline / carriage return. nullopt at EOF.
    std::optional<std::string> next();
    std::size_t line_number() const { return line_no_; }

private:
    void* handle_ = nullptr;
    std::size_t line_no_ = 0;
    std::vector<char> buf_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    /// Column index by name, throws DataError naming the file when absent.
    std::size_t column(std::string_view name, const std::filesystem::path& origin) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Reads a whole CSV with a required header row. Blank lines are skipped.
Table read_table(const std::filesystem::path& path);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

std::int64_t parse_int(std::string_view field, std::string_view what);
double parse_double(std::string_view field, std::string_view what);

std::string quote_if_needed(std::string_view field);

/// Writes a CSV file, creating parent directories.
class Writer {
public:
    explicit Writer(const std::filesystem::path& path);
    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace circtz::csv
