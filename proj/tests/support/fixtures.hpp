#pragma once

#include <constance/dataset.hpp>
#include <constance/noise_model.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace constance::testing {

class TempDir {
public:
    TempDir() {
        static std::size_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("constance-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Item make_item(std::string id, std::vector<double> features,
                      std::optional<Label> gold = std::nullopt) {
    return Item{std::move(id), FeatureVector::dense(features), gold};
}

inline AnnotationRecord ann(std::string item, std::string context, std::string annotator, int label) {
    return AnnotationRecord{std::move(item), std::move(context), std::move(annotator),
                            *label_from_int(label)};
}

inline Label random_label(std::mt19937_64& rng) {
    return label_from_index(std::uniform_int_distribution<std::size_t>(0, 2)(rng));
}

inline LabelDist random_dist(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    LabelDist p{u(rng), u(rng), u(rng)};
    const double sum = p[0] + p[1] + p[2];
    for (auto& v : p) v /= sum;
    return p;
}

inline TransitionMatrix random_transition(std::mt19937_64& rng) {
    TransitionMatrix::Rows rows;
    for (auto& row : rows) {
        const auto p = random_dist(rng);
        std::copy(p.begin(), p.end(), row.begin());
    }
    return TransitionMatrix(rows);
}

// Up to max_items items, each annotated in a random non-empty subset of the
// contexts by 1..max_per_context annotators drawn from a pool.
inline Dataset random_micro_dataset(std::mt19937_64& rng, std::size_t max_items,
                                    std::size_t max_contexts, std::size_t max_per_context,
                                    std::size_t pool = 3, std::size_t dim = 2) {
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    std::normal_distribution<double> gauss;
    const std::size_t n_items = pick(1, max_items);
    const std::size_t n_contexts = pick(1, max_contexts);
    std::vector<Item> items;
    std::vector<AnnotationRecord> records;
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::string id = "item" + std::to_string(i);
        std::vector<double> x(dim);
        for (auto& v : x) v = gauss(rng);
        items.push_back(make_item(id, x));
        bool any = false;
        for (std::size_t c = 0; c < n_contexts; ++c) {
            if (any && pick(0, 3) == 0) continue;
            any = true;
            const std::size_t n_annotators = pick(1, max_per_context);
            for (std::size_t a = 0; a < n_annotators; ++a)
                records.push_back(ann(id, "ctx" + std::to_string(c),
                                      "ann" + std::to_string(pick(0, pool - 1)),
                                      label_value(random_label(rng))));
        }
    }
    return Dataset(std::move(items), std::move(records));
}

}  // namespace constance::testing
