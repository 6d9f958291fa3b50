#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace constance {

// Ternary stance label. Underlying values match the annotation literals.
enum class Label : int { Negative = -1, Neutral = 0, Positive = 1 };

inline constexpr std::size_t kNumLabels = 3;

// Canonical row/column order for every matrix and probability vector: (-1, 0, 1).
inline constexpr std::array<Label, kNumLabels> kAllLabels = {Label::Negative, Label::Neutral,
                                                             Label::Positive};

// Probability vector over kAllLabels.
using LabelDist = std::array<double, kNumLabels>;

constexpr std::size_t label_index(Label label) noexcept {
    return static_cast<std::size_t>(static_cast<int>(label) + 1);
}

constexpr Label label_from_index(std::size_t index) noexcept {
    return static_cast<Label>(static_cast<int>(index) - 1);
}

constexpr int label_value(Label label) noexcept { return static_cast<int>(label); }

// Returns nullopt unless value is one of -1, 0, 1.
std::optional<Label> label_from_int(long value) noexcept;

// Parses the literal forms "-1", "0", "1" (surrounding blanks tolerated).
std::optional<Label> parse_label(std::string_view text) noexcept;

std::string_view label_literal(Label label) noexcept;

inline constexpr LabelDist kUniformDist = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

}  // namespace constance
