#include <constance/baselines.hpp>
#include <constance/classifier.hpp>
#include <constance/em.hpp>
#include <constance/errors.hpp>

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"

using namespace constance;
using namespace constance::testing;

namespace {

std::vector<Label> labels(std::initializer_list<int> values) {
    std::vector<Label> out;
    for (int v : values) out.push_back(*label_from_int(v));
    return out;
}

// One item, six contexts with three annotators each; context winners 1,1,1,-1,-1,0.
Dataset cross_context_fixture() {
    const int votes[] = {1, 1, 1, -1, -1, 0};
    std::vector<AnnotationRecord> records;
    for (int c = 0; c < 6; ++c)
        for (int a = 0; a < 3; ++a)
            records.push_back(ann("t", "c" + std::to_string(c), "a" + std::to_string(a),
                                  a == 2 && c < 3 ? 0 : votes[c]));
    return Dataset({make_item("t", {0})}, records);
}

Dataset six_context_dataset(std::size_t n_items) {
    std::mt19937_64 rng(6);
    std::vector<Item> items;
    std::vector<AnnotationRecord> records;
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::string id = "t" + std::to_string(i);
        items.push_back(make_item(id, {static_cast<double>(i % 3) - 1.0}));
        for (int c = 0; c < 6; ++c)
            for (int a = 0; a < 3; ++a)
                records.push_back(ann(id, "c" + std::to_string(c), "a" + std::to_string((i + a + c) % 8),
                                      label_value(random_label(rng))));
    }
    return Dataset(items, records);
}

SoftmaxTrainer fast_trainer() {
    SoftmaxOptions opts;
    opts.max_epochs = 200;
    return SoftmaxTrainer(opts);
}

}  // namespace

TEST(MajorityVote, Examples) {
    auto v = majority_vote(labels({1, 1, 0}));
    EXPECT_EQ(v.winner, Label::Positive);
    EXPECT_FALSE(v.full_agreement);
    EXPECT_EQ(v.counts, (std::array<std::size_t, 3>{0, 1, 2}));
    EXPECT_EQ(v.total(), 3u);
    EXPECT_EQ(v.majority_count(), 2u);

    v = majority_vote(labels({1, -1}));
    EXPECT_EQ(v.winner, Label::Negative);

    v = majority_vote(labels({0, 0, 0}));
    EXPECT_EQ(v.winner, Label::Neutral);
    EXPECT_TRUE(v.full_agreement);

    EXPECT_EQ(majority_vote(labels({1, 0, -1})).winner, Label::Neutral);
    EXPECT_EQ(majority_vote(labels({1, 1, 0, 0})).winner, Label::Neutral);
    EXPECT_THROW(majority_vote(std::vector<Label>{}), ValidationError);
}

TEST(MajorityVote, PermutationInvariant) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Label> votes(1 + rng() % 9);
        for (auto& l : votes) l = random_label(rng);
        const auto reference = majority_vote(votes);
        std::shuffle(votes.begin(), votes.end(), rng);
        const auto shuffled = majority_vote(votes);
        EXPECT_EQ(shuffled.winner, reference.winner);
        EXPECT_EQ(shuffled.counts, reference.counts);
        const auto top = *std::max_element(reference.counts.begin(), reference.counts.end());
        EXPECT_EQ(reference.majority_count(), top);
        EXPECT_EQ(reference.full_agreement, top == votes.size());
    }
}

TEST(PerContextLabels, AllCombinedCoversEveryAnnotation) {
    const auto d = six_context_dataset(20);
    const auto votes = per_context_labels(d, std::nullopt);
    ASSERT_EQ(votes.size(), 20u);
    for (const auto& v : votes) EXPECT_EQ(v.total(), 18u);
    EXPECT_THROW(per_context_labels(d, std::string("nope")), ValidationError);
}

TEST(PerContextLabels, SingleContextEqualsDirectVote) {
    const Dataset d({make_item("x", {0}), make_item("y", {0})},
                    {ann("x", "c", "a", 1), ann("x", "c", "b", -1), ann("y", "c", "a", 0),
                     ann("x", "c", "d", -1)});
    const auto votes = per_context_labels(d, std::string("c"));
    ASSERT_EQ(votes.size(), 2u);
    EXPECT_EQ(votes[0].winner, majority_vote(labels({1, -1, -1})).winner);
    EXPECT_EQ(votes[0].counts, majority_vote(labels({1, -1, -1})).counts);
    EXPECT_EQ(votes[1].winner, Label::Neutral);
}

TEST(PerContextLabels, CrossContextDisagreement) {
    const auto d = cross_context_fixture();
    const std::array<Label, 6> per_context = {Label::Positive, Label::Positive, Label::Positive,
                                              Label::Negative, Label::Negative, Label::Neutral};
    for (int c = 0; c < 6; ++c) {
        const auto v = per_context_labels(d, "c" + std::to_string(c));
        ASSERT_EQ(v.size(), 1u);
        EXPECT_EQ(v[0].winner, per_context[c]);
    }
    const auto all = per_context_labels(d, std::nullopt);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].counts, (std::array<std::size_t, 3>{6, 6, 6}));
    EXPECT_EQ(all[0].winner, Label::Neutral);
}

TEST(PerContextLabels, OmitsItemsOutsideContext) {
    const Dataset d({make_item("x", {0}), make_item("y", {0})},
                    {ann("x", "c1", "a", 1), ann("y", "c2", "a", 0)});
    const auto votes = per_context_labels(d, std::string("c1"));
    ASSERT_EQ(votes.size(), 1u);
    EXPECT_EQ(votes[0].item_id, "x");
}

TEST(MaskContexts, CollapsesToOneSentinel) {
    const auto d = six_context_dataset(10);
    const auto masked = mask_contexts(d);
    EXPECT_EQ(masked.contexts().size(), 1u);
    EXPECT_EQ(masked.contexts().name(0), kMaskedContextId);
    EXPECT_EQ(masked.annotations().size(), d.annotations().size());
    EXPECT_EQ(masked.items(), d.items());
    EXPECT_EQ(masked.annotators().names(), d.annotators().names());
    for (std::size_t k = 0; k < d.annotations().size(); ++k) {
        EXPECT_EQ(masked.annotations()[k].annotator_id, d.annotations()[k].annotator_id);
        EXPECT_EQ(masked.annotations()[k].label, d.annotations()[k].label);
    }
    const auto twice = mask_contexts(masked);
    EXPECT_EQ(twice, masked);
}

TEST(MaskAnnotators, CollapsesToOneSentinel) {
    std::vector<AnnotationRecord> records;
    for (int a = 0; a < 50; ++a) records.push_back(ann("t", "c" + std::to_string(a % 2), "a" + std::to_string(a), a % 3 - 1));
    const Dataset d({make_item("t", {0})}, records);
    const auto masked = mask_annotators(d);
    EXPECT_EQ(d.annotators().size(), 50u);
    EXPECT_EQ(masked.annotators().size(), 1u);
    EXPECT_EQ(masked.annotators().name(0), kMaskedAnnotatorId);
    EXPECT_EQ(masked.annotations().size(), 50u);
    EXPECT_EQ(masked.contexts().names(), d.contexts().names());
    const auto both = mask_contexts(mask_annotators(d));
    EXPECT_EQ(both.contexts().size(), 1u);
    EXPECT_EQ(both.annotators().size(), 1u);
}

TEST(FilterContext, KeepsOneContext) {
    const auto d = six_context_dataset(12);
    const auto filtered = filter_context(d, "c2");
    EXPECT_EQ(filtered.annotations().size() * 6, d.annotations().size());
    EXPECT_EQ(filtered.contexts().size(), 1u);
    EXPECT_THROW(filter_context(d, "c9"), ValidationError);
    const auto masked = mask_contexts(filtered);
    ASSERT_EQ(masked.annotations().size(), filtered.annotations().size());
    for (std::size_t k = 0; k < masked.annotations().size(); ++k) {
        auto a = masked.annotations()[k];
        a.context_id = "c2";
        EXPECT_EQ(a, filtered.annotations()[k]);
    }
}

TEST(FilterContext, DropsItemsWithoutAnnotations) {
    const Dataset d({make_item("x", {0}), make_item("y", {1})},
                    {ann("x", "c1", "a", 1), ann("y", "c2", "a", 0), ann("x", "c2", "b", 0)});
    const auto filtered = filter_context(d, "c1");
    ASSERT_EQ(filtered.num_items(), 1u);
    EXPECT_EQ(filtered.items()[0].id, "x");
}

TEST(Ablations, FittedParameterMapSizes) {
    const auto d = six_context_dataset(24);
    FitConfig config;
    config.label_prior = kAblationLabelPrior;
    config.max_iterations = 5;
    const auto trainer = fast_trainer();

    const auto masked_ctx = fit(FitView(mask_contexts(d)), trainer, config);
    EXPECT_EQ(masked_ctx.params.gamma.size(), 1u);
    EXPECT_EQ(masked_ctx.params.alpha.size(), d.annotators().size());

    const auto masked_ann = fit(FitView(mask_annotators(d)), trainer, config);
    EXPECT_EQ(masked_ann.params.gamma.size(), d.contexts().size());
    EXPECT_EQ(masked_ann.params.alpha.size(), 1u);

    const auto filtered = fit(FitView(filter_context(d, "c0")), trainer, config);
    EXPECT_EQ(filtered.params.gamma.size(), 1u);
    EXPECT_EQ(filtered.params.gamma.ids()[0], "c0");
}

TEST(WriteVotes, Format) {
    TempDir dir;
    const std::vector<VoteResult> votes = {
        {"a", Label::Positive, {0, 1, 2}, false}, {"b", Label::Negative, {3, 0, 0}, true}};
    write_votes(votes, dir / "v.csv");
    EXPECT_EQ(read_file(dir / "v.csv"),
              "item_id,label,n_votes,n_majority,full_agreement\na,1,3,2,false\nb,-1,3,3,true\n");
}
