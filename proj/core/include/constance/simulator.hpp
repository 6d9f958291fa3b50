#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "constance/dataset.hpp"
#include "constance/label.hpp"
#include "constance/noise_model.hpp"

namespace constance {

// Spherical Gaussian noise around one mean vector per true label.
struct FeatureModel {
    std::array<std::vector<double>, kNumLabels> class_means;
    double noise_scale = 1.0;

    std::size_t dim() const noexcept { return class_means[0].size(); }
};

struct SimulationSpec {
    std::size_t n_items = 562;
    MatrixSet contexts;    // true gamma per context id
    MatrixSet annotators;  // true alpha per annotator id
    std::size_t annotators_per_context = 3;
    LabelDist true_label_distribution = kUniformDist;
    FeatureModel feature_model;
    std::uint64_t rng_seed = 0;
    // Extra items drawn from the same model with features and gold only.
    std::size_t n_holdout_items = 0;

    void validate() const;
};

struct SimulationResult {
    Dataset dataset;  // gold label attached to every item
    MatrixSet true_gamma;
    MatrixSet true_alpha;
    LabelDist true_label_distribution{};
    std::vector<Item> holdout;
};

// Draws Y, features, S^c ~ gamma^c[Y] for every context and R ~ alpha^a[S^c]
// for annotators_per_context annotators per (item, context). Annotators are
// assigned round-robin over the pool. Deterministic in rng_seed.
SimulationResult simulate(const SimulationSpec& spec);

// Mean over matrices and entries of |true - estimated|. Key sets must match.
double recovery_error(const MatrixSet& truth, const MatrixSet& estimated);

struct RandomSpecOptions {
    std::size_t n_items = 562;
    std::size_t n_contexts = 6;
    std::size_t n_annotators = 30;
    std::size_t annotators_per_context = 3;
    std::size_t feature_dim = 10;
    std::pair<double, double> gamma_diag{0.55, 0.95};
    std::pair<double, double> alpha_diag{0.6, 0.95};
    LabelDist true_label_distribution = {0.4, 0.2, 0.4};
    double class_separation = 1.0;  // std-dev of class mean coordinates
    double noise_scale = 1.0;
    std::size_t n_holdout_items = 0;
};

// Random heterogeneous matrices and class means: each row puts a uniform draw
// from the diag range on the diagonal and splits the rest at random.
SimulationSpec random_simulation_spec(const RandomSpecOptions& options, std::uint64_t seed);

}  // namespace constance
