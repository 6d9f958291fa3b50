#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "constance/classifier.hpp"
#include "constance/dataset.hpp"
#include "constance/label.hpp"
#include "constance/noise_model.hpp"

namespace constance {

inline constexpr LabelDist kDefaultLabelPrior = {0.495, 0.01, 0.495};
inline constexpr LabelDist kAblationLabelPrior = {0.45, 0.10, 0.45};

struct FitConfig {
    std::size_t max_iterations = 100;
    double rel_tolerance = 1e-6;
    std::size_t samples_per_item = 10;
    LabelDist label_prior = kDefaultLabelPrior;
    std::uint64_t rng_seed = 0;
    double smoothing = 1e-6;
    double init_diag_mass = 0.8;
    // Allowed log-likelihood decrease between iterations before fit() fails.
    double monotonicity_slack = 1e-8;
    // Over-relaxed updates of gamma and alpha, kept only when they beat the
    // plain EM update. Off gives textbook block EM.
    bool overrelaxation = true;

    void validate() const;
};

// Joint assignment (y, s^1..s^C) of one item's latent labels; s follows the
// item's context order in FitItem::observations.
struct LatentConfiguration {
    Label y = Label::Neutral;
    std::vector<Label> s;

    friend bool operator==(const LatentConfiguration&, const LatentConfiguration&) = default;
};

// Upper bound on contexts per item; the table has |V|^(contexts + 1) rows.
inline constexpr std::size_t kMaxContextsPerItem = 12;

// Posterior tau over every latent configuration of every item.
//
// Configuration index: y is the most significant base-3 digit, followed by
// s for each of the item's contexts in order.
class PosteriorTable {
public:
    struct ItemPosterior {
        std::string item_id;
        std::vector<std::uint32_t> contexts;
        std::vector<double> tau;
    };

    static std::size_t num_configurations(std::size_t num_contexts);
    static std::size_t encode(const LatentConfiguration& config);
    static LatentConfiguration decode(std::size_t index, std::size_t num_contexts);

    void add(ItemPosterior item);
    std::size_t size() const noexcept { return items_.size(); }
    const ItemPosterior& item(std::size_t index) const { return items_.at(index); }
    const std::vector<ItemPosterior>& items() const noexcept { return items_; }
    // Throws ValidationError for an unknown id.
    std::size_t index_of(std::string_view item_id) const;

private:
    std::vector<ItemPosterior> items_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

// Posterior over the true label: sum of tau over every s for each y.
LabelDist marginal_y(const PosteriorTable& posterior, std::string_view item_id);
LabelDist marginal_y(const PosteriorTable::ItemPosterior& item);

// Joint posterior of (y, s^c) for each of the item's contexts, in context order.
std::vector<CountMatrix> pairwise_marginals(const PosteriorTable::ItemPosterior& item);

// Elementwise product renormalized to 1. Throws NumericError on zero mass.
LabelDist apply_label_prior(const LabelDist& probs, const LabelDist& prior);

// p(y | x_i) used by the E-step: classifier output with the label prior applied.
std::vector<LabelDist> item_label_priors(const FitView& view, const ModelParameters& params);

// Seeds the first E-step before any classifier exists: per-context majority
// votes counted per item, smoothed with the label prior as one pseudo-vote.
std::vector<LabelDist> cold_start_priors(const FitView& view, const LabelDist& label_prior);

// M_y(x_i) * prod_c gamma^c[y][s_c] * prod_a alpha^a[s_c][r] for one configuration.
double joint_config_likelihood(const FitView& view, std::size_t item,
                               const LatentConfiguration& config, const ModelParameters& params);
double joint_config_likelihood(const FitView& view, std::size_t item,
                               const LatentConfiguration& config, const LabelDist& item_prior,
                               const MatrixSet& gamma, const MatrixSet& alpha);

// sum_i log sum_{y,s} joint_config_likelihood. Throws NumericError if any item
// has zero total mass.
double incomplete_data_log_likelihood(const FitView& view, const ModelParameters& params);
double incomplete_data_log_likelihood(const FitView& view, std::span<const LabelDist> item_priors,
                                      const MatrixSet& gamma, const MatrixSet& alpha);

PosteriorTable e_step(const FitView& view, const ModelParameters& params);
PosteriorTable e_step(const FitView& view, std::span<const LabelDist> item_priors,
                      const MatrixSet& gamma, const MatrixSet& alpha);

MatrixSet m_step_gamma(const FitView& view, const PosteriorTable& posterior, double smoothing);
MatrixSet m_step_alpha(const FitView& view, const PosteriorTable& posterior, double smoothing);

using LabelCounts = std::array<std::uint32_t, kNumLabels>;

// Draws samples_per_item labels per item from its marginal.
std::vector<LabelCounts> sample_training_labels(std::span<const LabelDist> marginals,
                                                std::size_t samples_per_item,
                                                std::uint64_t rng_seed);

// One weighted row per (item, sampled label), weight = number of draws.
TrainSet build_train_set(const FitView& view, std::span<const LabelCounts> counts);

struct FitResult {
    ModelParameters params;
    PosteriorTable posterior;
    std::vector<double> log_likelihood_trace;  // one entry per iteration
    std::size_t iterations = 0;
    bool converged = false;
    // Iterations whose retrained classifier was kept; on the others the
    // previous classifier gave the higher likelihood.
    std::size_t classifier_updates = 0;
    // Iterations where the over-relaxed gamma/alpha step was accepted.
    std::size_t overrelaxed_steps = 0;
};

// Block EM. Each iteration runs the E-step, updates gamma and alpha in closed
// form, and retrains the classifier on labels sampled from the posterior
// marginals. From the second iteration on, the retrained classifier replaces
// the previous one only if it does not lower the incomplete-data likelihood.
// With overrelaxation on, gamma and alpha then take a geometric step further
// along the EM direction by an adaptive factor, kept only if the
// likelihood beats the plain update. Both rules keep the trace non-decreasing.
// Stops when the relative change falls below rel_tolerance or after
// max_iterations. Throws NumericError if the likelihood drops by more than
// monotonicity_slack.
FitResult fit(const FitView& view, const ClassifierTrainer& trainer, const FitConfig& config);

// item_id,p_neg1,p_0,p_1
void write_posterior_dump(const PosteriorTable& posterior, const std::filesystem::path& path);
void write_probability_dump(std::span<const std::pair<std::string, LabelDist>> rows,
                            const std::filesystem::path& path);
std::vector<std::pair<std::string, LabelDist>> read_probability_dump(
    const std::filesystem::path& path);

// One value per line.
void write_trace(std::span<const double> trace, const std::filesystem::path& path);

}  // namespace constance
