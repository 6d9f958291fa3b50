#pragma once

// Small helpers for the delimiter-separated text formats used by every file
// this library reads or writes.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace constance::text {

// Tab if the header contains one, comma otherwise.
char detect_delimiter(std::string_view header) noexcept;

std::vector<std::string_view> split(std::string_view line, char delimiter);

std::string_view trim(std::string_view s) noexcept;

// Strict parsers: the whole field must be consumed.
bool parse_double(std::string_view field, double& out) noexcept;
bool parse_size(std::string_view field, std::size_t& out) noexcept;
bool parse_int64(std::string_view field, long long& out) noexcept;

// Shortest text that reads back to the same double, at most 17 significant digits.
std::string format_double(double value);

// Always 17 significant digits, for formats that pin the precision.
std::string format_double17(double value);

// Line-oriented reader that tracks the 1-based row number and strips '\r'.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);

    bool next(std::string& line);
    std::size_t row() const noexcept { return row_; }
    const std::string& source() const noexcept { return source_; }

private:
    std::ifstream in_;
    std::string source_;
    std::size_t row_ = 0;
};

// Opens a file for writing or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace constance::text
