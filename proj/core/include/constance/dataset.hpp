#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "constance/label.hpp"

namespace constance {

// Real-valued feature vector stored sparsely; absent entries are 0.
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::size_t dim) : dim_(dim) {}

    static FeatureVector dense(std::span<const double> values);
    // Entries may come in any order. Zero values are dropped; a repeated or
    // out-of-range index throws ValidationError.
    static FeatureVector sparse(std::size_t dim,
                                std::vector<std::pair<std::uint32_t, double>> entries);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nnz() const noexcept { return indices_.size(); }
    std::span<const std::uint32_t> indices() const noexcept { return indices_; }
    std::span<const double> values() const noexcept { return values_; }

    double at(std::size_t index) const;
    std::vector<double> to_dense() const;

    // Sum of w[j] * x[j] over stored entries; w must have at least dim() elements.
    double dot(std::span<const double> w) const noexcept;
    double squared_norm() const noexcept;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<std::uint32_t> indices_;
    std::vector<double> values_;
};

enum class FeatureLayout { Dense, Sparse };

struct Item {
    std::string id;
    FeatureVector features;
    std::optional<Label> gold;  // evaluation only

    friend bool operator==(const Item&, const Item&) = default;
};

struct AnnotationRecord {
    std::string item_id;
    std::string context_id;
    std::string annotator_id;
    Label label = Label::Neutral;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// Opaque string ids mapped to dense indices in first-seen order.
class IdIndex {
public:
    std::size_t intern(std::string_view id);
    std::optional<std::size_t> find(std::string_view id) const;
    const std::string& name(std::size_t index) const { return names_.at(index); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

    friend bool operator==(const IdIndex& a, const IdIndex& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

struct IndexedAnnotation {
    std::uint32_t item = 0;
    std::uint32_t context = 0;
    std::uint32_t annotator = 0;
    Label label = Label::Neutral;
};

// Validated, immutable collection of items and their annotations.
class Dataset {
public:
    // Throws ValidationError when an invariant is violated: no items, repeated
    // item ids, mixed feature dimensionality, an annotation on an unknown item,
    // or an item without annotations.
    Dataset(std::vector<Item> items, std::vector<AnnotationRecord> annotations,
            FeatureLayout layout = FeatureLayout::Dense);

    const std::vector<Item>& items() const noexcept { return items_; }
    const std::vector<AnnotationRecord>& annotations() const noexcept { return annotations_; }
    std::span<const IndexedAnnotation> indexed_annotations() const noexcept { return indexed_; }
    const IdIndex& contexts() const noexcept { return contexts_; }
    const IdIndex& annotators() const noexcept { return annotators_; }

    std::size_t num_items() const noexcept { return items_.size(); }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    FeatureLayout layout() const noexcept { return layout_; }
    std::optional<std::size_t> item_index(std::string_view id) const;
    bool has_gold() const noexcept;

    // Layout is a serialization hint and does not take part in equality.
    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.items_ == b.items_ && a.annotations_ == b.annotations_;
    }

private:
    std::vector<Item> items_;
    std::vector<AnnotationRecord> annotations_;
    std::vector<IndexedAnnotation> indexed_;
    IdIndex item_ids_;
    IdIndex contexts_;
    IdIndex annotators_;
    std::size_t feature_dim_ = 0;
    FeatureLayout layout_ = FeatureLayout::Dense;
};

// Reads the three text formats. Header rows are required.
//   annotations: item_id,context_id,annotator_id,label
//   features:    item_id,f0,f1,... (dense) or item_id,feature_index,value (sparse)
//   gold:        item_id,label
// Tab or comma delimited, detected from the header.
Dataset load_dataset(const std::filesystem::path& annotations_path,
                     const std::filesystem::path& features_path,
                     const std::optional<std::filesystem::path>& gold_path = std::nullopt);

// Loads items (features plus optional gold) without requiring annotations.
// Used for held-out evaluation sets.
std::vector<Item> load_items(const std::filesystem::path& features_path,
                             const std::optional<std::filesystem::path>& gold_path = std::nullopt,
                             FeatureLayout* layout = nullptr);

void save_dataset(const Dataset& dataset, const std::filesystem::path& annotations_path,
                  const std::filesystem::path& features_path,
                  const std::optional<std::filesystem::path>& gold_path = std::nullopt);

void write_annotations(std::span<const AnnotationRecord> annotations,
                       const std::filesystem::path& path);
void write_features(std::span<const Item> items, FeatureLayout layout,
                    const std::filesystem::path& path);
// Items without a gold label are skipped.
void write_gold(std::span<const Item> items, const std::filesystem::path& path);

struct AnnotatorLabel {
    std::uint32_t annotator = 0;
    Label label = Label::Neutral;

    friend bool operator==(const AnnotatorLabel&, const AnnotatorLabel&) = default;
};

struct AnnotationGroup {
    std::uint32_t item = 0;
    std::uint32_t context = 0;
    std::vector<AnnotatorLabel> labels;  // input order
};

// Annotations keyed by (item, context), groups in first-seen order.
class GroupedAnnotations {
public:
    explicit GroupedAnnotations(const Dataset& dataset);

    const std::vector<AnnotationGroup>& groups() const noexcept { return groups_; }
    const AnnotationGroup* find(std::string_view item_id, std::string_view context_id) const;
    std::size_t total_annotations() const noexcept;

private:
    const Dataset* dataset_;
    std::vector<AnnotationGroup> groups_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

GroupedAnnotations group_annotations(const Dataset& dataset);

struct ContextObservation {
    std::uint32_t context = 0;
    std::vector<AnnotatorLabel> labels;
};

struct FitItem {
    std::string id;
    FeatureVector features;
    std::vector<ContextObservation> observations;  // one per context the item was seen in
};

// Gold-free copy of a Dataset. Everything the EM engine and the classifier
// trainer see goes through this type, so gold labels cannot leak into a fit.
class FitView {
public:
    explicit FitView(const Dataset& dataset);

    const std::vector<FitItem>& items() const noexcept { return items_; }
    const std::vector<std::string>& context_ids() const noexcept { return context_ids_; }
    const std::vector<std::string>& annotator_ids() const noexcept { return annotator_ids_; }
    std::size_t num_contexts() const noexcept { return context_ids_.size(); }
    std::size_t num_annotators() const noexcept { return annotator_ids_.size(); }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    std::optional<std::size_t> find_item(std::string_view id) const;

private:
    std::vector<FitItem> items_;
    std::vector<std::string> context_ids_;
    std::vector<std::string> annotator_ids_;
    std::unordered_map<std::string, std::size_t> item_lookup_;
    std::size_t feature_dim_ = 0;
};

}  // namespace constance
