#include "constance/label.hpp"

#include <charconv>

namespace constance {

std::optional<Label> label_from_int(long value) noexcept {
    if (value < -1 || value > 1) return std::nullopt;
    return static_cast<Label>(static_cast<int>(value));
}

std::optional<Label> parse_label(std::string_view text) noexcept {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    long value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
    return label_from_int(value);
}

std::string_view label_literal(Label label) noexcept {
    switch (label) {
        case Label::Negative: return "-1";
        case Label::Neutral: return "0";
        case Label::Positive: return "1";
    }
    return "?";
}

}  // namespace constance
