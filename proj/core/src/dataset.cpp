#include "constance/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "constance/errors.hpp"
#include "constance/text_table.hpp"

namespace constance {

namespace {

constexpr std::string_view kAnnotationsHeader[] = {"item_id", "context_id", "annotator_id",
                                                   "label"};

bool is_sparse_header(const std::vector<std::string_view>& header) {
    return header.size() == 3 && text::trim(header[0]) == "item_id" &&
           text::trim(header[1]) == "feature_index" && text::trim(header[2]) == "value";
}

std::uint64_t group_key(std::uint32_t item, std::uint32_t context) {
    return (static_cast<std::uint64_t>(item) << 32) | context;
}

}  // namespace

FeatureVector FeatureVector::dense(std::span<const double> values) {
    FeatureVector v(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (values[j] != 0.0) {
            v.indices_.push_back(static_cast<std::uint32_t>(j));
            v.values_.push_back(values[j]);
        }
    }
    return v;
}

FeatureVector FeatureVector::sparse(std::size_t dim,
                                    std::vector<std::pair<std::uint32_t, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    FeatureVector v(dim);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto [index, value] = entries[k];
        if (index >= dim)
            throw ValidationError("feature index " + std::to_string(index) +
                                  " out of range for dimension " + std::to_string(dim));
        if (k > 0 && entries[k - 1].first == index)
            throw ValidationError("feature index " + std::to_string(index) + " repeated");
        if (value != 0.0) {
            v.indices_.push_back(index);
            v.values_.push_back(value);
        }
    }
    return v;
}

double FeatureVector::at(std::size_t index) const {
    if (index >= dim_) throw ValidationError("feature index out of range");
    auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
    if (it == indices_.end() || *it != index) return 0.0;
    return values_[static_cast<std::size_t>(it - indices_.begin())];
}

std::vector<double> FeatureVector::to_dense() const {
    std::vector<double> out(dim_, 0.0);
    for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
    return out;
}

double FeatureVector::dot(std::span<const double> w) const noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < indices_.size(); ++k) acc += w[indices_[k]] * values_[k];
    return acc;
}

double FeatureVector::squared_norm() const noexcept {
    double acc = 0.0;
    for (double v : values_) acc += v * v;
    return acc;
}

std::size_t IdIndex::intern(std::string_view id) {
    auto it = lookup_.find(std::string(id));
    if (it != lookup_.end()) return it->second;
    const std::size_t index = names_.size();
    names_.emplace_back(id);
    lookup_.emplace(names_.back(), index);
    return index;
}

std::optional<std::size_t> IdIndex::find(std::string_view id) const {
    auto it = lookup_.find(std::string(id));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Dataset::Dataset(std::vector<Item> items, std::vector<AnnotationRecord> annotations,
                 FeatureLayout layout)
    : items_(std::move(items)), annotations_(std::move(annotations)), layout_(layout) {
    if (items_.empty()) throw ValidationError("dataset has no items");
    feature_dim_ = items_.front().features.dim();
    for (const auto& item : items_) {
        if (item_ids_.find(item.id)) throw ValidationError("item id repeated: " + item.id);
        item_ids_.intern(item.id);
        if (item.features.dim() != feature_dim_)
            throw ValidationError("item " + item.id + " has feature dimension " +
                                  std::to_string(item.features.dim()) + ", expected " +
                                  std::to_string(feature_dim_));
    }
    std::vector<std::size_t> per_item(items_.size(), 0);
    indexed_.reserve(annotations_.size());
    for (const auto& record : annotations_) {
        const auto item = item_ids_.find(record.item_id);
        if (!item) throw ValidationError("annotation references unknown item " + record.item_id);
        ++per_item[*item];
        indexed_.push_back({static_cast<std::uint32_t>(*item),
                            static_cast<std::uint32_t>(contexts_.intern(record.context_id)),
                            static_cast<std::uint32_t>(annotators_.intern(record.annotator_id)),
                            record.label});
    }
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (per_item[i] == 0) throw ValidationError("item " + items_[i].id + " has no annotations");
}

std::optional<std::size_t> Dataset::item_index(std::string_view id) const {
    return item_ids_.find(id);
}

bool Dataset::has_gold() const noexcept {
    return std::any_of(items_.begin(), items_.end(),
                       [](const Item& item) { return item.gold.has_value(); });
}

namespace {

std::vector<Item> read_features(const std::filesystem::path& path, FeatureLayout& layout) {
    text::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.source(), 1, "missing header");
    const char delim = text::detect_delimiter(line);
    const auto header = text::split(line, delim);
    if (header.empty() || text::trim(header[0]) != "item_id")
        throw ParseError(reader.source(), 1, "header must start with item_id");

    std::vector<Item> items;
    std::unordered_map<std::string, std::size_t> index;

    if (is_sparse_header(header)) {
        layout = FeatureLayout::Sparse;
        std::vector<std::vector<std::pair<std::uint32_t, double>>> entries;
        std::vector<std::unordered_set<std::uint32_t>> seen;
        std::size_t dim = 0;
        while (reader.next(line)) {
            if (text::trim(line).empty()) continue;
            const auto fields = text::split(line, delim);
            if (fields.size() != 3)
                throw ParseError(reader.source(), reader.row(), "expected 3 fields");
            const std::string id(text::trim(fields[0]));
            std::size_t feature = 0;
            double value = 0;
            if (id.empty()) throw ParseError(reader.source(), reader.row(), "empty item_id");
            if (!text::parse_size(fields[1], feature) || feature > UINT32_MAX)
                throw ParseError(reader.source(), reader.row(), "bad feature_index");
            if (!text::parse_double(fields[2], value))
                throw ParseError(reader.source(), reader.row(), "bad feature value");
            auto [it, inserted] = index.emplace(id, items.size());
            if (inserted) {
                items.push_back({id, {}, std::nullopt});
                entries.emplace_back();
                seen.emplace_back();
            }
            const auto f = static_cast<std::uint32_t>(feature);
            if (!seen[it->second].insert(f).second)
                throw ParseError(reader.source(), reader.row(),
                                 "feature " + std::to_string(f) + " repeated for item " + id);
            entries[it->second].emplace_back(f, value);
            dim = std::max(dim, feature + 1);
        }
        for (std::size_t i = 0; i < items.size(); ++i)
            items[i].features = FeatureVector::sparse(dim, std::move(entries[i]));
    } else {
        layout = FeatureLayout::Dense;
        const std::size_t dim = header.size() - 1;
        std::vector<double> values(dim);
        while (reader.next(line)) {
            if (text::trim(line).empty()) continue;
            const auto fields = text::split(line, delim);
            if (fields.size() != dim + 1)
                throw ParseError(reader.source(), reader.row(),
                                 "expected " + std::to_string(dim + 1) + " fields, got " +
                                     std::to_string(fields.size()));
            const std::string id(text::trim(fields[0]));
            if (id.empty()) throw ParseError(reader.source(), reader.row(), "empty item_id");
            for (std::size_t j = 0; j < dim; ++j)
                if (!text::parse_double(fields[j + 1], values[j]))
                    throw ParseError(reader.source(), reader.row(),
                                     "bad value in column " + std::to_string(j + 1));
            if (!index.emplace(id, items.size()).second)
                throw ParseError(reader.source(), reader.row(), "item repeated: " + id);
            items.push_back({id, FeatureVector::dense(values), std::nullopt});
        }
    }
    if (items.empty()) throw ParseError(reader.source(), reader.row(), "no items");
    return items;
}

void attach_gold(std::vector<Item>& items, const std::filesystem::path& path) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < items.size(); ++i) index.emplace(items[i].id, i);
    text::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.source(), 1, "missing header");
    const char delim = text::detect_delimiter(line);
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, delim);
        if (fields.size() != 2) throw ParseError(reader.source(), reader.row(), "expected 2 fields");
        const auto it = index.find(std::string(text::trim(fields[0])));
        if (it == index.end())
            throw ParseError(reader.source(), reader.row(),
                             "unknown item " + std::string(text::trim(fields[0])));
        const auto label = parse_label(fields[1]);
        if (!label) throw ParseError(reader.source(), reader.row(), "label must be -1, 0 or 1");
        items[it->second].gold = *label;
    }
}

}  // namespace

std::vector<Item> load_items(const std::filesystem::path& features_path,
                             const std::optional<std::filesystem::path>& gold_path,
                             FeatureLayout* layout) {
    FeatureLayout detected = FeatureLayout::Dense;
    auto items = read_features(features_path, detected);
    if (gold_path) attach_gold(items, *gold_path);
    if (layout) *layout = detected;
    return items;
}

Dataset load_dataset(const std::filesystem::path& annotations_path,
                     const std::filesystem::path& features_path,
                     const std::optional<std::filesystem::path>& gold_path) {
    FeatureLayout layout = FeatureLayout::Dense;
    auto items = load_items(features_path, gold_path, &layout);
    std::unordered_set<std::string> known;
    for (const auto& item : items) known.insert(item.id);

    text::LineReader reader(annotations_path);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.source(), 1, "missing header");
    const char delim = text::detect_delimiter(line);
    const auto header = text::split(line, delim);
    bool header_ok = header.size() == 4;
    for (std::size_t k = 0; header_ok && k < 4; ++k)
        header_ok = text::trim(header[k]) == kAnnotationsHeader[k];
    if (!header_ok)
        throw ParseError(reader.source(), 1,
                         "header must be item_id,context_id,annotator_id,label");

    std::vector<AnnotationRecord> records;
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, delim);
        if (fields.size() != 4) throw ParseError(reader.source(), reader.row(), "expected 4 fields");
        AnnotationRecord record{std::string(text::trim(fields[0])),
                                std::string(text::trim(fields[1])),
                                std::string(text::trim(fields[2])), Label::Neutral};
        if (record.item_id.empty() || record.context_id.empty() || record.annotator_id.empty())
            throw ParseError(reader.source(), reader.row(), "empty identifier");
        const auto label = parse_label(fields[3]);
        if (!label) throw ParseError(reader.source(), reader.row(), "label must be -1, 0 or 1");
        record.label = *label;
        if (!known.contains(record.item_id))
            throw ParseError(reader.source(), reader.row(), "unknown item " + record.item_id);
        records.push_back(std::move(record));
    }
    return Dataset(std::move(items), std::move(records), layout);
}

void write_annotations(std::span<const AnnotationRecord> annotations,
                       const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << "item_id,context_id,annotator_id,label\n";
    for (const auto& r : annotations)
        out << r.item_id << ',' << r.context_id << ',' << r.annotator_id << ','
            << label_literal(r.label) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void write_features(std::span<const Item> items, FeatureLayout layout,
                    const std::filesystem::path& path) {
    auto out = text::open_output(path);
    const std::size_t dim = items.empty() ? 0 : items.front().features.dim();
    if (dim == 0) layout = FeatureLayout::Dense;
    if (layout == FeatureLayout::Dense) {
        out << "item_id";
        for (std::size_t j = 0; j < dim; ++j) out << ",f" << j;
        out << '\n';
        for (const auto& item : items) {
            out << item.id;
            const auto dense = item.features.to_dense();
            for (double v : dense) out << ',' << text::format_double(v);
            out << '\n';
        }
    } else {
        out << "item_id,feature_index,value\n";
        std::size_t max_index = 0;
        for (const auto& item : items) {
            const auto idx = item.features.indices();
            const auto val = item.features.values();
            // Explicit zeros keep items without entries and pin the dimension.
            if (idx.empty()) out << item.id << ",0,0\n";
            for (std::size_t k = 0; k < idx.size(); ++k) {
                out << item.id << ',' << idx[k] << ',' << text::format_double(val[k]) << '\n';
                max_index = std::max<std::size_t>(max_index, idx[k]);
            }
        }
        if (max_index + 1 < dim) out << items.back().id << ',' << dim - 1 << ",0\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_gold(std::span<const Item> items, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << "item_id,label\n";
    for (const auto& item : items)
        if (item.gold) out << item.id << ',' << label_literal(*item.gold) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& annotations_path,
                  const std::filesystem::path& features_path,
                  const std::optional<std::filesystem::path>& gold_path) {
    write_annotations(dataset.annotations(), annotations_path);
    write_features(dataset.items(), dataset.layout(), features_path);
    if (gold_path) write_gold(dataset.items(), *gold_path);
}

GroupedAnnotations::GroupedAnnotations(const Dataset& dataset) : dataset_(&dataset) {
    for (const auto& a : dataset.indexed_annotations()) {
        const auto key = group_key(a.item, a.context);
        auto [it, inserted] = lookup_.emplace(key, groups_.size());
        if (inserted) groups_.push_back({a.item, a.context, {}});
        groups_[it->second].labels.push_back({a.annotator, a.label});
    }
}

const AnnotationGroup* GroupedAnnotations::find(std::string_view item_id,
                                                std::string_view context_id) const {
    const auto item = dataset_->item_index(item_id);
    const auto context = dataset_->contexts().find(context_id);
    if (!item || !context) return nullptr;
    auto it = lookup_.find(group_key(static_cast<std::uint32_t>(*item),
                                     static_cast<std::uint32_t>(*context)));
    return it == lookup_.end() ? nullptr : &groups_[it->second];
}

std::size_t GroupedAnnotations::total_annotations() const noexcept {
    std::size_t total = 0;
    for (const auto& g : groups_) total += g.labels.size();
    return total;
}

GroupedAnnotations group_annotations(const Dataset& dataset) { return GroupedAnnotations(dataset); }

FitView::FitView(const Dataset& dataset)
    : context_ids_(dataset.contexts().names()),
      annotator_ids_(dataset.annotators().names()),
      feature_dim_(dataset.feature_dim()) {
    items_.reserve(dataset.num_items());
    for (const auto& item : dataset.items()) {
        items_.push_back({item.id, item.features, {}});
        item_lookup_.emplace(item.id, items_.size() - 1);
    }
    // Per item, contexts appear in the order first seen in the annotation list.
    std::vector<std::map<std::uint32_t, std::size_t>> slot(items_.size());
    for (const auto& a : dataset.indexed_annotations()) {
        auto& obs = items_[a.item].observations;
        auto [it, inserted] = slot[a.item].emplace(a.context, obs.size());
        if (inserted) obs.push_back({a.context, {}});
        obs[it->second].labels.push_back({a.annotator, a.label});
    }
}

std::optional<std::size_t> FitView::find_item(std::string_view id) const {
    auto it = item_lookup_.find(std::string(id));
    if (it == item_lookup_.end()) return std::nullopt;
    return it->second;
}

}  // namespace constance
