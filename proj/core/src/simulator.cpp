#include "constance/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "constance/errors.hpp"
#include "constance/rng.hpp"

namespace constance {

namespace {

std::string numbered(const char* prefix, std::size_t k, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, k);
    return buf;
}

int width_for(std::size_t n) {
    int w = 1;
    while (n >= 10) {
        n /= 10;
        ++w;
    }
    return w;
}

TransitionMatrix random_matrix(std::mt19937_64& engine, std::pair<double, double> diag) {
    TransitionMatrix::Rows rows{};
    for (std::size_t r = 0; r < kNumLabels; ++r) {
        const double d = diag.first + (diag.second - diag.first) * uniform01(engine);
        const double split = uniform01(engine);
        const double rest = 1.0 - d;
        std::size_t first = r == 0 ? 1 : 0;
        std::size_t second = r == 2 ? 1 : 2;
        rows[r][r] = d;
        rows[r][first] = rest * split;
        rows[r][second] = rest - rest * split;
    }
    return TransitionMatrix(rows);
}

}  // namespace

void SimulationSpec::validate() const {
    if (n_items == 0) throw ValidationError("n_items must be >= 1");
    if (contexts.empty()) throw ValidationError("at least one context is required");
    if (annotators.empty()) throw ValidationError("at least one annotator is required");
    if (annotators_per_context == 0 || annotators_per_context > annotators.size())
        throw ValidationError("annotators_per_context must be in [1, number of annotators]");
    double sum = 0.0;
    for (double p : true_label_distribution) {
        if (!(p >= 0.0)) throw ValidationError("label distribution entries must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("label distribution must sum to 1");
    const std::size_t dim = feature_model.dim();
    for (const auto& mean : feature_model.class_means)
        if (mean.size() != dim) throw ValidationError("class means differ in dimension");
    if (!(feature_model.noise_scale >= 0.0)) throw ValidationError("noise_scale must be >= 0");
}

SimulationResult simulate(const SimulationSpec& spec) {
    spec.validate();
    std::mt19937_64 engine(spec.rng_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto& fm = spec.feature_model;
    const std::size_t dim = fm.dim();
    const std::size_t total = spec.n_items + spec.n_holdout_items;
    const int width = width_for(total == 0 ? 0 : total - 1);

    auto draw_features = [&](Label y) {
        std::vector<double> x(dim);
        const auto& mean = fm.class_means[label_index(y)];
        for (std::size_t j = 0; j < dim; ++j) x[j] = mean[j] + fm.noise_scale * noise(engine);
        return FeatureVector::dense(x);
    };

    std::vector<Item> items;
    std::vector<AnnotationRecord> annotations;
    items.reserve(spec.n_items);
    annotations.reserve(spec.n_items * spec.contexts.size() * spec.annotators_per_context);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < spec.n_items; ++i) {
        const Label y = label_from_index(sample_index(engine, spec.true_label_distribution));
        Item item{numbered("item", i, width), draw_features(y), y};
        for (std::size_t c = 0; c < spec.contexts.size(); ++c) {
            const auto& gamma_row = spec.contexts[c].rows()[label_index(y)];
            const Label s = label_from_index(sample_index(engine, gamma_row));
            for (std::size_t k = 0; k < spec.annotators_per_context; ++k) {
                const std::size_t a = cursor++ % spec.annotators.size();
                const auto& alpha_row = spec.annotators[a].rows()[label_index(s)];
                const Label r = label_from_index(sample_index(engine, alpha_row));
                annotations.push_back({item.id, spec.contexts.ids()[c], spec.annotators.ids()[a], r});
            }
        }
        items.push_back(std::move(item));
    }

    std::vector<Item> holdout;
    holdout.reserve(spec.n_holdout_items);
    for (std::size_t h = 0; h < spec.n_holdout_items; ++h) {
        const Label y = label_from_index(sample_index(engine, spec.true_label_distribution));
        holdout.push_back({numbered("item", spec.n_items + h, width), draw_features(y), y});
    }

    return SimulationResult{Dataset(std::move(items), std::move(annotations), FeatureLayout::Dense),
                            spec.contexts, spec.annotators, spec.true_label_distribution,
                            std::move(holdout)};
}

double recovery_error(const MatrixSet& truth, const MatrixSet& estimated) {
    if (truth.size() != estimated.size()) throw ValidationError("matrix key sets differ");
    if (truth.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const auto* est = estimated.find(truth.ids()[k]);
        if (!est) throw ValidationError("matrix key sets differ at " + truth.ids()[k]);
        for (std::size_t r = 0; r < kNumLabels; ++r)
            for (std::size_t c = 0; c < kNumLabels; ++c)
                total += std::abs(truth[k].at(r, c) - est->at(r, c));
    }
    return total / static_cast<double>(truth.size() * kNumLabels * kNumLabels);
}

SimulationSpec random_simulation_spec(const RandomSpecOptions& options, std::uint64_t seed) {
    std::mt19937_64 engine(mix_seed(seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    SimulationSpec spec;
    spec.n_items = options.n_items;
    spec.annotators_per_context = options.annotators_per_context;
    spec.true_label_distribution = options.true_label_distribution;
    spec.n_holdout_items = options.n_holdout_items;
    spec.rng_seed = mix_seed(seed, 1);
    const int cw = width_for(options.n_contexts == 0 ? 0 : options.n_contexts - 1);
    for (std::size_t c = 0; c < options.n_contexts; ++c)
        spec.contexts.insert(numbered("ctx", c, cw), random_matrix(engine, options.gamma_diag));
    const int aw = width_for(options.n_annotators == 0 ? 0 : options.n_annotators - 1);
    for (std::size_t a = 0; a < options.n_annotators; ++a)
        spec.annotators.insert(numbered("ann", a, aw), random_matrix(engine, options.alpha_diag));
    for (auto& mean : spec.feature_model.class_means) {
        mean.resize(options.feature_dim);
        for (auto& v : mean) v = options.class_separation * normal(engine);
    }
    spec.feature_model.noise_scale = options.noise_scale;
    return spec;
}

}  // namespace constance
