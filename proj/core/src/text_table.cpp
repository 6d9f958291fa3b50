#include "constance/text_table.hpp"

#include <charconv>
#include <cmath>

#include "constance/errors.hpp"

namespace constance::text {

char detect_delimiter(std::string_view header) noexcept {
    return header.find('\t') != std::string_view::npos ? '\t' : ',';
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view field, double& out) noexcept {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool parse_size(std::string_view field, std::size_t& out) noexcept {
    field = trim(field);
    if (field.empty()) return false;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

bool parse_int64(std::string_view field, long long& out) noexcept {
    field = trim(field);
    if (field.empty()) return false;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string format_double17(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

LineReader::LineReader(const std::filesystem::path& path) : in_(path), source_(path.string()) {
    if (!in_) throw IoError("cannot open " + source_);
}

bool LineReader::next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++row_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace constance::text
