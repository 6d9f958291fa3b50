#include "constance/baselines.hpp"

#include "constance/errors.hpp"
#include "constance/text_table.hpp"

namespace constance {

VoteResult majority_vote(std::span<const Label> labels) {
    if (labels.empty()) throw ValidationError("majority vote over an empty list");
    VoteResult result;
    for (Label l : labels) ++result.counts[label_index(l)];
    constexpr std::array<Label, kNumLabels> preference = {Label::Neutral, Label::Negative,
                                                          Label::Positive};
    result.winner = preference[0];
    for (Label l : preference)
        if (result.counts[label_index(l)] > result.counts[label_index(result.winner)])
            result.winner = l;
    result.full_agreement = result.majority_count() == labels.size();
    return result;
}

std::vector<VoteResult> per_context_labels(const Dataset& dataset,
                                           const std::optional<std::string>& context) {
    std::optional<std::size_t> context_index;
    if (context) {
        context_index = dataset.contexts().find(*context);
        if (!context_index) throw ValidationError("unknown context " + *context);
    }
    std::vector<std::vector<Label>> per_item(dataset.num_items());
    for (const auto& a : dataset.indexed_annotations())
        if (!context_index || a.context == *context_index) per_item[a.item].push_back(a.label);

    std::vector<VoteResult> votes;
    for (std::size_t i = 0; i < per_item.size(); ++i) {
        if (per_item[i].empty()) continue;
        auto vote = majority_vote(per_item[i]);
        vote.item_id = dataset.items()[i].id;
        votes.push_back(std::move(vote));
    }
    return votes;
}

Dataset mask_contexts(const Dataset& dataset) {
    auto annotations = dataset.annotations();
    for (auto& a : annotations) a.context_id = kMaskedContextId;
    return Dataset(dataset.items(), std::move(annotations), dataset.layout());
}

Dataset mask_annotators(const Dataset& dataset) {
    auto annotations = dataset.annotations();
    for (auto& a : annotations) a.annotator_id = kMaskedAnnotatorId;
    return Dataset(dataset.items(), std::move(annotations), dataset.layout());
}

Dataset filter_context(const Dataset& dataset, std::string_view context) {
    const auto index = dataset.contexts().find(context);
    if (!index) throw ValidationError("unknown context " + std::string(context));
    std::vector<AnnotationRecord> kept;
    std::vector<bool> has_annotation(dataset.num_items(), false);
    const auto indexed = dataset.indexed_annotations();
    for (std::size_t k = 0; k < indexed.size(); ++k) {
        if (indexed[k].context != *index) continue;
        kept.push_back(dataset.annotations()[k]);
        has_annotation[indexed[k].item] = true;
    }
    std::vector<Item> items;
    for (std::size_t i = 0; i < dataset.num_items(); ++i)
        if (has_annotation[i]) items.push_back(dataset.items()[i]);
    return Dataset(std::move(items), std::move(kept), dataset.layout());
}

void write_votes(std::span<const VoteResult> votes, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << "item_id,label,n_votes,n_majority,full_agreement\n";
    for (const auto& v : votes)
        out << v.item_id << ',' << label_literal(v.winner) << ',' << v.total() << ','
            << v.majority_count() << ',' << (v.full_agreement ? "true" : "false") << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace constance
