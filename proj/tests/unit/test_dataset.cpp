#include <constance/dataset.hpp>
#include <constance/errors.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace constance;
using namespace constance::testing;

TEST(FeatureVector, DenseDropsZeros) {
    const std::vector<double> x = {0.0, 2.0, 0.0, -1.5};
    const auto v = FeatureVector::dense(x);
    EXPECT_EQ(v.dim(), 4u);
    EXPECT_EQ(v.nnz(), 2u);
    EXPECT_EQ(v.at(1), 2.0);
    EXPECT_EQ(v.at(2), 0.0);
    EXPECT_EQ(v.to_dense(), x);
    EXPECT_DOUBLE_EQ(v.squared_norm(), 4.0 + 2.25);
}

TEST(FeatureVector, SparseSortsAndValidates) {
    const auto v = FeatureVector::sparse(5, {{3, 1.0}, {0, 2.0}, {4, 0.0}});
    ASSERT_EQ(v.nnz(), 2u);
    EXPECT_EQ(v.indices()[0], 0u);
    EXPECT_EQ(v.indices()[1], 3u);
    EXPECT_EQ(v, FeatureVector::dense(std::vector<double>{2, 0, 0, 1, 0}));
    EXPECT_THROW(FeatureVector::sparse(3, {{3, 1.0}}), ValidationError);
    EXPECT_THROW(FeatureVector::sparse(3, {{1, 1.0}, {1, 2.0}}), ValidationError);
    EXPECT_THROW(v.at(5), ValidationError);
}

TEST(FeatureVector, DotMatchesDense) {
    const auto v = FeatureVector::sparse(4, {{1, 2.0}, {3, -1.0}});
    const std::vector<double> w = {10, 20, 30, 40};
    EXPECT_DOUBLE_EQ(v.dot(w), 40.0 - 40.0 + 0.0);
}

TEST(Dataset, ValidatesInvariants) {
    EXPECT_THROW(Dataset({}, {}), ValidationError);
    EXPECT_THROW(Dataset({make_item("a", {1}), make_item("a", {2})}, {ann("a", "c", "x", 1)}),
                 ValidationError);
    EXPECT_THROW(Dataset({make_item("a", {1}), make_item("b", {1, 2})},
                         {ann("a", "c", "x", 1), ann("b", "c", "x", 1)}),
                 ValidationError);
    EXPECT_THROW(Dataset({make_item("a", {1})}, {ann("b", "c", "x", 1)}), ValidationError);
    EXPECT_THROW(Dataset({make_item("a", {1}), make_item("b", {1})}, {ann("a", "c", "x", 1)}),
                 ValidationError);
}

TEST(Dataset, IdsIndexedInFirstSeenOrder) {
    Dataset d({make_item("i1", {0}), make_item("i2", {1})},
              {ann("i2", "cB", "x", 0), ann("i1", "cA", "y", 1), ann("i1", "cB", "x", -1)});
    EXPECT_EQ(d.contexts().names(), (std::vector<std::string>{"cB", "cA"}));
    EXPECT_EQ(d.annotators().names(), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(d.item_index("i2"), 1u);
    EXPECT_FALSE(d.item_index("nope"));
    const auto idx = d.indexed_annotations();
    ASSERT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx[1].item, 0u);
    EXPECT_EQ(idx[1].context, 1u);
    EXPECT_EQ(idx[1].annotator, 1u);
}

TEST(Dataset, DuplicateAnnotationsAreKept) {
    Dataset d({make_item("i", {0})}, {ann("i", "c", "x", 1), ann("i", "c", "x", 1)});
    EXPECT_EQ(d.annotations().size(), 2u);
}

TEST(LoadDataset, ThreeRowFileWithOneItem) {
    TempDir dir;
    write_file(dir / "a.csv",
               "item_id,context_id,annotator_id,label\nt1,c1,a1,-1\nt1,c2,a2,0\nt1,c3,a3,1\n");
    write_file(dir / "f.csv", "item_id,f0\nt1,0.5\n");
    const auto d = load_dataset(dir / "a.csv", dir / "f.csv");
    EXPECT_EQ(d.num_items(), 1u);
    EXPECT_EQ(d.feature_dim(), 1u);
    EXPECT_LE(d.contexts().size(), 3u);
    EXPECT_LE(d.annotators().size(), 3u);
    EXPECT_FALSE(d.has_gold());
}

TEST(LoadDataset, RejectsBadLabelWithRowNumber) {
    TempDir dir;
    write_file(dir / "a.csv",
               "item_id,context_id,annotator_id,label\nt1,c1,a1,1\nt1,c1,a2,2\n");
    write_file(dir / "f.csv", "item_id,f0\nt1,0.5\n");
    try {
        load_dataset(dir / "a.csv", dir / "f.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
}

TEST(LoadDataset, RejectsUnknownItem) {
    TempDir dir;
    write_file(dir / "a.csv", "item_id,context_id,annotator_id,label\nt1,c,a,1\nzz,c,a,1\n");
    write_file(dir / "f.csv", "item_id,f0\nt1,0.5\n");
    try {
        load_dataset(dir / "a.csv", dir / "f.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
    }
}

TEST(LoadDataset, RejectsDimensionMismatch) {
    TempDir dir;
    write_file(dir / "a.csv", "item_id,context_id,annotator_id,label\nt1,c,a,1\n");
    write_file(dir / "f.csv", "item_id,f0,f1\nt1,0.5,1\nt2,0.5\n");
    EXPECT_THROW(load_dataset(dir / "a.csv", dir / "f.csv"), ParseError);
}

TEST(LoadDataset, RejectsBadGoldAndMalformedRows) {
    TempDir dir;
    write_file(dir / "a.csv", "item_id,context_id,annotator_id,label\nt1,c,a,1\n");
    write_file(dir / "f.csv", "item_id,f0\nt1,0.5\n");
    write_file(dir / "g.csv", "item_id,label\nt1,7\n");
    EXPECT_THROW(load_dataset(dir / "a.csv", dir / "f.csv", dir / "g.csv"), ParseError);
    write_file(dir / "bad.csv", "item_id,context_id,annotator_id,label\nt1,c,1\n");
    EXPECT_THROW(load_dataset(dir / "bad.csv", dir / "f.csv"), ParseError);
    write_file(dir / "nf.csv", "item_id,f0\nt1,abc\n");
    EXPECT_THROW(load_dataset(dir / "a.csv", dir / "nf.csv"), ParseError);
}

TEST(LoadDataset, TabDelimitedAndSparseAutoDetected) {
    TempDir dir;
    write_file(dir / "a.tsv", "item_id\tcontext_id\tannotator_id\tlabel\nt1\tc\ta\t1\nt2\tc\ta\t-1\n");
    write_file(dir / "f.tsv", "item_id\tfeature_index\tvalue\nt1\t4\t2.5\nt2\t0\t1\n");
    write_file(dir / "g.tsv", "item_id\tlabel\nt1\t1\n");
    const auto d = load_dataset(dir / "a.tsv", dir / "f.tsv", dir / "g.tsv");
    EXPECT_EQ(d.layout(), FeatureLayout::Sparse);
    EXPECT_EQ(d.feature_dim(), 5u);
    EXPECT_EQ(d.items()[0].features.at(4), 2.5);
    EXPECT_EQ(d.items()[0].gold, Label::Positive);
    EXPECT_FALSE(d.items()[1].gold);
}

TEST(LoadDataset, FullScaleShapedDataset) {
    std::vector<Item> items;
    std::vector<AnnotationRecord> records;
    for (int i = 0; i < 562; ++i) {
        const std::string id = "t" + std::to_string(i);
        items.push_back(make_item(id, {static_cast<double>(i)}));
        for (int c = 0; c < 6; ++c)
            for (int a = 0; a < 3; ++a)
                records.push_back(ann(id, "c" + std::to_string(c),
                                      "a" + std::to_string((i + a) % 40), (i + c + a) % 3 - 1));
    }
    TempDir dir;
    save_dataset(Dataset(items, records), dir / "a.csv", dir / "f.csv");
    const auto d = load_dataset(dir / "a.csv", dir / "f.csv");
    EXPECT_EQ(d.num_items(), 562u);
    EXPECT_EQ(d.contexts().size(), 6u);
    const FitView view(d);
    for (const auto& item : view.items()) {
        ASSERT_EQ(item.observations.size(), 6u);
        for (const auto& obs : item.observations) EXPECT_GE(obs.labels.size(), 3u);
    }
}

class DatasetRoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(DatasetRoundTrip, SaveThenLoadIsIdentical) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
    auto base = random_micro_dataset(rng, 12, 4, 3, 5, 6);
    std::vector<Item> items = base.items();
    std::normal_distribution<double> gauss;
    for (auto& item : items) {
        auto dense = item.features.to_dense();
        for (auto& v : dense)
            if (rng() % 3 == 0) v = 0.0; else v = gauss(rng) * 1e3;
        item.features = FeatureVector::dense(dense);
        if (rng() % 2 == 0) item.gold = random_label(rng);
    }
    const auto layout = GetParam() % 2 ? FeatureLayout::Sparse : FeatureLayout::Dense;
    const Dataset original(items, base.annotations(), layout);
    TempDir dir;
    save_dataset(original, dir / "a.csv", dir / "f.csv", dir / "g.csv");
    const auto loaded = load_dataset(dir / "a.csv", dir / "f.csv", dir / "g.csv");
    EXPECT_EQ(loaded, original);
    EXPECT_EQ(loaded.layout(), layout);
    EXPECT_EQ(loaded.feature_dim(), original.feature_dim());
}

INSTANTIATE_TEST_SUITE_P(Random, DatasetRoundTrip, ::testing::Range(0, 30));

TEST(DatasetRoundTrip, SparseWithTrailingZeroDimensions) {
    const Dataset original({Item{"a", FeatureVector::sparse(10, {{2, 1.0}}), std::nullopt},
                            Item{"b", FeatureVector(10), std::nullopt}},
                           {ann("a", "c", "x", 1), ann("b", "c", "x", 0)}, FeatureLayout::Sparse);
    TempDir dir;
    save_dataset(original, dir / "a.csv", dir / "f.csv");
    const auto loaded = load_dataset(dir / "a.csv", dir / "f.csv");
    EXPECT_EQ(loaded, original);
    EXPECT_EQ(loaded.feature_dim(), 10u);
}

TEST(GroupAnnotations, GroupsByItemAndContext) {
    Dataset d({make_item("i1", {0})},
              {ann("i1", "c1", "a", 1), ann("i1", "c2", "b", 0), ann("i1", "c1", "b", -1)});
    const auto grouped = group_annotations(d);
    ASSERT_EQ(grouped.groups().size(), 2u);
    EXPECT_EQ(grouped.groups()[0].labels.size(), 2u);
    EXPECT_EQ(grouped.groups()[1].labels.size(), 1u);
    const auto* g = grouped.find("i1", "c1");
    ASSERT_NE(g, nullptr);
    EXPECT_EQ(g->labels[0].label, Label::Positive);
    EXPECT_EQ(g->labels[1].label, Label::Negative);
    EXPECT_EQ(grouped.find("i1", "c3"), nullptr);
    EXPECT_EQ(grouped.total_annotations(), 3u);
}

TEST(GroupAnnotations, FullScaleGroupCount) {
    std::vector<Item> items;
    std::vector<AnnotationRecord> records;
    for (int i = 0; i < 562; ++i) {
        const std::string id = "t" + std::to_string(i);
        items.push_back(make_item(id, {1.0}));
        for (int c = 0; c < 6; ++c)
            for (int a = 0; a < 3; ++a)
                records.push_back(ann(id, "c" + std::to_string(c), "a" + std::to_string(a), 0));
    }
    const auto grouped = group_annotations(Dataset(items, records));
    EXPECT_EQ(grouped.groups().size(), 3372u);
    for (const auto& g : grouped.groups()) EXPECT_GE(g.labels.size(), 3u);
}

TEST(GroupAnnotations, SizesSumToTotalOnRandomData) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const auto d = random_micro_dataset(rng, 10, 4, 4, 6);
        const auto grouped = group_annotations(d);
        std::size_t sum = 0;
        for (const auto& g : grouped.groups()) sum += g.labels.size();
        EXPECT_EQ(sum, d.annotations().size());
    }
}

TEST(FitView, CarriesNoGoldAndPreservesObservations) {
    Dataset d({make_item("i1", {0}, Label::Positive), make_item("i2", {1}, Label::Negative)},
              {ann("i1", "c1", "a", 1), ann("i2", "c2", "b", 0), ann("i1", "c2", "b", -1)});
    const FitView view(d);
    ASSERT_EQ(view.items().size(), 2u);
    EXPECT_EQ(view.num_contexts(), 2u);
    EXPECT_EQ(view.num_annotators(), 2u);
    const auto& first = view.items()[0];
    ASSERT_EQ(first.observations.size(), 2u);
    EXPECT_EQ(first.observations[0].context, 0u);
    EXPECT_EQ(first.observations[1].context, 1u);
    EXPECT_EQ(first.observations[1].labels[0].label, Label::Negative);
    EXPECT_EQ(view.find_item("i2"), 1u);
}
