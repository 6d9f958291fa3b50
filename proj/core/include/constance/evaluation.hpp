#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "constance/dataset.hpp"
#include "constance/label.hpp"

namespace constance {

inline constexpr double kLogLossClip = 1e-15;

struct LogLoss {
    double mean = 0.0;
    std::vector<double> per_item;
};

// -log p(gold) per item, with p clipped below at kLogLossClip.
LogLoss log_loss(std::span<const LabelDist> probs, std::span<const Label> gold);

// Mean of the F1 scores of classes -1 and 1. Neutral counts as an error class
// but is not averaged. Undefined precision or recall is taken as 0.
double avg_f1(std::span<const Label> predictions, std::span<const Label> gold);

// Per item, the fraction of in-scope annotations equal to the majority vote;
// averaged over items with at least one in-scope annotation. context nullopt
// means all contexts. Throws ValidationError if nothing is in scope.
double agreement(const Dataset& dataset, const std::optional<std::string>& context);

struct BootstrapResult {
    double observed_diff = 0.0;  // avg_f1(A) - avg_f1(B) on the full sample
    double mean_diff = 0.0;      // mean over resamples
    double ci_low = 0.0;         // 2.5th percentile
    double ci_high = 0.0;        // 97.5th percentile
    bool significant = false;    // CI excludes 0
};

// Resample b draws its indices from std::mt19937_64(mix_seed(seed, b)) via
// uniform01 * n. Percentiles interpolate linearly between order statistics.
BootstrapResult bootstrap_f1_diff(std::span<const Label> predictions_a,
                                  std::span<const Label> predictions_b,
                                  std::span<const Label> gold, std::size_t iterations,
                                  std::uint64_t seed);

// Linear-interpolation percentile of sorted data, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);

struct MannWhitney {
    double u = 0.0;  // U of sample A: rank sum of A minus nA(nA + 1)/2
    double p_value = 1.0;
    bool exact = false;
};

inline constexpr std::size_t kMannWhitneyExactLimit = 20;

// Two-sided test with midranks for ties. When both samples have fewer than
// kMannWhitneyExactLimit values, p is the exact permutation probability of a
// U at least as far from its mean; otherwise a normal approximation with tie
// correction and continuity correction.
MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct EvalReport {
    double avg_f1 = 0.0;
    double log_loss = 0.0;
    std::vector<double> per_item_losses;
    std::size_t n_items = 0;
};

// Predictions are argmax_label of each probability vector.
EvalReport evaluate(std::span<const LabelDist> probs, std::span<const Label> gold);

}  // namespace constance
