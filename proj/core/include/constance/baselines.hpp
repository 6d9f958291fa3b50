#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "constance/dataset.hpp"
#include "constance/label.hpp"

namespace constance {

struct VoteResult {
    std::string item_id;
    Label winner = Label::Neutral;
    std::array<std::size_t, kNumLabels> counts{};  // kAllLabels order
    bool full_agreement = false;

    std::size_t total() const noexcept { return counts[0] + counts[1] + counts[2]; }
    std::size_t majority_count() const noexcept { return counts[label_index(winner)]; }
};

// Most frequent label. Ties go to Neutral if it is among the tied labels,
// otherwise to -1. Throws ValidationError on an empty list.
VoteResult majority_vote(std::span<const Label> labels);

// Majority vote per item over one context's annotations, or over all of them
// when context is nullopt. Items without annotations in scope are omitted.
// Throws ValidationError for an unknown context.
std::vector<VoteResult> per_context_labels(const Dataset& dataset,
                                           const std::optional<std::string>& context);

inline constexpr std::string_view kMaskedContextId = "masked-context";
inline constexpr std::string_view kMaskedAnnotatorId = "masked-annotator";

// Every annotation moved to a single context; all else unchanged.
Dataset mask_contexts(const Dataset& dataset);
// Every annotation attributed to a single annotator; all else unchanged.
Dataset mask_annotators(const Dataset& dataset);
// Keeps one context's annotations and drops items left without any.
Dataset filter_context(const Dataset& dataset, std::string_view context);

// item_id,label,n_votes,n_majority,full_agreement
void write_votes(std::span<const VoteResult> votes, const std::filesystem::path& path);

}  // namespace constance
