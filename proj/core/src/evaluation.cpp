#include "constance/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "constance/baselines.hpp"
#include "constance/classifier.hpp"
#include "constance/errors.hpp"
#include "constance/rng.hpp"

namespace constance {

LogLoss log_loss(std::span<const LabelDist> probs, std::span<const Label> gold) {
    if (probs.size() != gold.size()) throw ValidationError("log_loss: length mismatch");
    LogLoss out;
    out.per_item.reserve(gold.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const double p = std::max(probs[i][label_index(gold[i])], kLogLossClip);
        out.per_item.push_back(-std::log(p));
        sum += out.per_item.back();
    }
    out.mean = gold.empty() ? 0.0 : sum / static_cast<double>(gold.size());
    return out;
}

double avg_f1(std::span<const Label> predictions, std::span<const Label> gold) {
    if (predictions.size() != gold.size()) throw ValidationError("avg_f1: length mismatch");
    auto f1 = [&](Label cls) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool predicted = predictions[i] == cls;
            const bool actual = gold[i] == cls;
            tp += predicted && actual;
            fp += predicted && !actual;
            fn += !predicted && actual;
        }
        const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
        const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
        return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    };
    return 0.5 * (f1(Label::Negative) + f1(Label::Positive));
}

double agreement(const Dataset& dataset, const std::optional<std::string>& context) {
    const auto votes = per_context_labels(dataset, context);
    if (votes.empty()) throw ValidationError("agreement: no annotations in scope");
    double sum = 0.0;
    for (const auto& v : votes)
        sum += static_cast<double>(v.majority_count()) / static_cast<double>(v.total());
    return sum / static_cast<double>(votes.size());
}

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ValidationError("percentile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_f1_diff(std::span<const Label> predictions_a,
                                  std::span<const Label> predictions_b,
                                  std::span<const Label> gold, std::size_t iterations,
                                  std::uint64_t seed) {
    if (predictions_a.size() != gold.size() || predictions_b.size() != gold.size())
        throw ValidationError("bootstrap: length mismatch");
    if (iterations == 0) throw ValidationError("bootstrap: iterations must be >= 1");
    if (gold.empty()) throw ValidationError("bootstrap: empty sample");
    const std::size_t n = gold.size();
    BootstrapResult out;
    out.observed_diff = avg_f1(predictions_a, gold) - avg_f1(predictions_b, gold);

    std::vector<double> diffs;
    diffs.reserve(iterations);
    std::vector<Label> ra(n), rb(n), rg(n);
    for (std::size_t b = 0; b < iterations; ++b) {
        std::mt19937_64 engine(mix_seed(seed, b));
        for (std::size_t k = 0; k < n; ++k) {
            const auto idx = std::min(n - 1, static_cast<std::size_t>(uniform01(engine) * n));
            ra[k] = predictions_a[idx];
            rb[k] = predictions_b[idx];
            rg[k] = gold[idx];
        }
        diffs.push_back(avg_f1(ra, rg) - avg_f1(rb, rg));
    }
    double sum = 0.0;
    for (double d : diffs) sum += d;
    out.mean_diff = sum / static_cast<double>(iterations);
    std::sort(diffs.begin(), diffs.end());
    out.ci_low = percentile_sorted(diffs, 0.025);
    out.ci_high = percentile_sorted(diffs, 0.975);
    out.significant = out.ci_low > 0.0 || out.ci_high < 0.0;
    return out;
}

namespace {

// Midranks of the pooled sample, doubled so they are integers.
std::vector<long long> doubled_midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<long long> ranks(n);
    std::size_t k = 0;
    while (k < n) {
        std::size_t j = k;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[k]]) ++j;
        // Positions k..j (0-based) share rank ((k+1) + (j+1)) / 2.
        const auto doubled = static_cast<long long>(k + j + 2);
        for (std::size_t t = k; t <= j; ++t) ranks[order[t]] = doubled;
        k = j + 1;
    }
    return ranks;
}

}  // namespace

MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: empty sample");
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = doubled_midranks(pooled);

    long long rank_sum_a2 = 0;
    for (std::size_t k = 0; k < na; ++k) rank_sum_a2 += ranks[k];
    const auto offset2 = static_cast<long long>(na * (na + 1));
    const long long u2 = rank_sum_a2 - offset2;  // 2U
    const auto mean2 = static_cast<long long>(na * nb);  // 2 E[U]

    MannWhitney out;
    out.u = static_cast<double>(u2) / 2.0;

    if (na < kMannWhitneyExactLimit && nb < kMannWhitneyExactLimit) {
        out.exact = true;
        // ways[j][s]: subsets of size j with doubled rank sum s.
        long long max_sum = 0;
        for (auto r : ranks) max_sum += r;
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(max_sum + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            const long long r = ranks[t];
            for (std::size_t j = std::min(na, t + 1); j-- > 0;)
                for (long long s = max_sum - r; s >= 0; --s)
                    if (ways[j][s] != 0.0) ways[j + 1][s + r] += ways[j][s];
        }
        const long long observed = std::llabs(u2 - mean2);
        double extreme = 0.0;
        double total = 0.0;
        for (long long s = 0; s <= max_sum; ++s) {
            const double w = ways[na][s];
            if (w == 0.0) continue;
            total += w;
            if (std::llabs(s - offset2 - mean2) >= observed) extreme += w;
        }
        out.p_value = std::min(1.0, extreme / total);
        return out;
    }

    // Tie correction: sum over tie groups of t^3 - t.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t k = 0; k < n;) {
        std::size_t j = k;
        while (j < n && sorted[j] == sorted[k]) ++j;
        const double t = static_cast<double>(j - k);
        tie_term += t * t * t - t;
        k = j;
    }
    const double dna = static_cast<double>(na);
    const double dnb = static_cast<double>(nb);
    const double dn = static_cast<double>(n);
    const double variance = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (!(variance > 0.0)) {
        out.p_value = 1.0;
        return out;
    }
    const double deviation = std::max(0.0, std::abs(out.u - dna * dnb / 2.0) - 0.5);
    const double z = deviation / std::sqrt(variance);
    out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return out;
}

EvalReport evaluate(std::span<const LabelDist> probs, std::span<const Label> gold) {
    auto loss = log_loss(probs, gold);
    std::vector<Label> predictions;
    predictions.reserve(probs.size());
    for (const auto& p : probs) predictions.push_back(argmax_label(p));
    EvalReport report;
    report.avg_f1 = avg_f1(predictions, gold);
    report.log_loss = loss.mean;
    report.per_item_losses = std::move(loss.per_item);
    report.n_items = gold.size();
    return report;
}

}  // namespace constance
