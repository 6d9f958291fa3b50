#include "constance/em.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "constance/baselines.hpp"
#include "constance/errors.hpp"
#include "constance/rng.hpp"
#include "constance/text_table.hpp"

namespace constance {

namespace {

// Matrices resolved to the view's dense context/annotator indices.
struct BoundMatrices {
    std::vector<const TransitionMatrix*> gamma;
    std::vector<const TransitionMatrix*> alpha;
};

BoundMatrices bind(const FitView& view, const MatrixSet& gamma, const MatrixSet& alpha) {
    BoundMatrices bound;
    bound.gamma.reserve(view.num_contexts());
    for (const auto& id : view.context_ids()) {
        const auto* m = gamma.find(id);
        if (!m) throw ValidationError("no gamma matrix for context " + id);
        bound.gamma.push_back(m);
    }
    bound.alpha.reserve(view.num_annotators());
    for (const auto& id : view.annotator_ids()) {
        const auto* m = alpha.find(id);
        if (!m) throw ValidationError("no alpha matrix for annotator " + id);
        bound.alpha.push_back(m);
    }
    return bound;
}

// prod_a alpha^a[s][r] for each s, rescaled so the largest entry is 1.
struct ContextEvidence {
    std::array<double, kNumLabels> lik{};
    double log_scale = 0.0;
};

ContextEvidence context_evidence(const ContextObservation& obs, const BoundMatrices& bound) {
    ContextEvidence ev;
    ev.lik.fill(1.0);
    for (const auto& [annotator, label] : obs.labels) {
        const auto& a = *bound.alpha[annotator];
        const std::size_t r = label_index(label);
        for (std::size_t s = 0; s < kNumLabels; ++s) ev.lik[s] *= a.at(s, r);
        const double top = *std::max_element(ev.lik.begin(), ev.lik.end());
        if (top > 0.0 && (top < 1e-100 || top > 1e100)) {
            for (auto& v : ev.lik) v /= top;
            ev.log_scale += std::log(top);
        }
    }
    const double top = *std::max_element(ev.lik.begin(), ev.lik.end());
    if (top > 0.0) {
        for (auto& v : ev.lik) v /= top;
        ev.log_scale += std::log(top);
    }
    return ev;
}

void check_context_count(const FitItem& item) {
    if (item.observations.size() > kMaxContextsPerItem)
        throw ValidationError("item " + item.id + " is annotated in " +
                              std::to_string(item.observations.size()) +
                              " contexts; at most " + std::to_string(kMaxContextsPerItem) +
                              " are supported");
}

PosteriorTable::ItemPosterior item_posterior(const FitItem& item, const LabelDist& prior,
                                             const BoundMatrices& bound) {
    check_context_count(item);
    const std::size_t num_ctx = item.observations.size();
    std::vector<ContextEvidence> evidence;
    evidence.reserve(num_ctx);
    PosteriorTable::ItemPosterior out;
    out.item_id = item.id;
    for (const auto& obs : item.observations) {
        evidence.push_back(context_evidence(obs, bound));
        out.contexts.push_back(obs.context);
    }
    out.tau.assign(PosteriorTable::num_configurations(num_ctx), 0.0);

    // Depth-first fill; s digits after y, first context most significant.
    std::size_t cursor = 0;
    auto fill = [&](auto&& self, std::size_t level, std::size_t y, double partial) -> void {
        if (level == num_ctx) {
            out.tau[cursor++] = partial;
            return;
        }
        const auto& g = *bound.gamma[item.observations[level].context];
        for (std::size_t s = 0; s < kNumLabels; ++s)
            self(self, level + 1, y, partial * g.at(y, s) * evidence[level].lik[s]);
    };
    for (std::size_t y = 0; y < kNumLabels; ++y) fill(fill, 0, y, prior[y]);

    double total = 0.0;
    for (double v : out.tau) total += v;
    if (!(total > 0.0) || !std::isfinite(total))
        throw NumericError("item " + item.id + " has zero posterior mass");
    for (auto& v : out.tau) v /= total;
    return out;
}

double item_log_likelihood(const FitItem& item, const LabelDist& prior, const BoundMatrices& bound) {
    check_context_count(item);
    std::array<double, kNumLabels> per_y = prior;
    double log_scale = 0.0;
    for (const auto& obs : item.observations) {
        const auto ev = context_evidence(obs, bound);
        log_scale += ev.log_scale;
        const auto& g = *bound.gamma[obs.context];
        for (std::size_t y = 0; y < kNumLabels; ++y) {
            double m = 0.0;
            for (std::size_t s = 0; s < kNumLabels; ++s) m += g.at(y, s) * ev.lik[s];
            per_y[y] *= m;
        }
        const double top = *std::max_element(per_y.begin(), per_y.end());
        if (top > 0.0) {
            for (auto& v : per_y) v /= top;
            log_scale += std::log(top);
        }
    }
    const double total = per_y[0] + per_y[1] + per_y[2];
    if (!(total > 0.0)) throw NumericError("item " + item.id + " has zero likelihood");
    return log_scale + std::log(total);
}

// previous + factor * (update - previous), entries floored at a tiny
// positive value and rows renormalized.
// Geometric step per row, floored at the smoothing mass.
MatrixSet extrapolate(const MatrixSet& previous, const MatrixSet& update, double factor, double floor) {
    MatrixSet out;
    for (std::size_t k = 0; k < update.size(); ++k) {
        const auto& before = previous.at(update.ids()[k]);
        TransitionMatrix::Rows rows;
        for (std::size_t r = 0; r < kNumLabels; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < kNumLabels; ++c) {
                const double b = std::max(floor, before.at(r, c));
                const double u = std::max(floor, update[k].at(r, c));
                rows[r][c] = std::max(floor, b * std::pow(u / b, factor));
                sum += rows[r][c];
            }
            for (auto& v : rows[r]) v /= sum;
        }
        out.insert(update.ids()[k], TransitionMatrix(rows));
    }
    return out;
}

}  // namespace

void FitConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (!(rel_tolerance > 0.0)) throw ValidationError("rel_tolerance must be > 0");
    if (samples_per_item < 1) throw ValidationError("samples_per_item must be >= 1");
    if (!(smoothing >= 0.0)) throw ValidationError("smoothing must be >= 0");
    if (!(monotonicity_slack >= 0.0)) throw ValidationError("monotonicity_slack must be >= 0");
    validate_label_prior(label_prior);
    (void)init_transition(init_diag_mass);
}

std::size_t PosteriorTable::num_configurations(std::size_t num_contexts) {
    std::size_t n = kNumLabels;
    for (std::size_t c = 0; c < num_contexts; ++c) n *= kNumLabels;
    return n;
}

std::size_t PosteriorTable::encode(const LatentConfiguration& config) {
    std::size_t index = label_index(config.y);
    for (Label s : config.s) index = index * kNumLabels + label_index(s);
    return index;
}

LatentConfiguration PosteriorTable::decode(std::size_t index, std::size_t num_contexts) {
    if (index >= num_configurations(num_contexts))
        throw ValidationError("configuration index out of range");
    LatentConfiguration config;
    config.s.resize(num_contexts);
    for (std::size_t c = num_contexts; c-- > 0;) {
        config.s[c] = label_from_index(index % kNumLabels);
        index /= kNumLabels;
    }
    config.y = label_from_index(index);
    return config;
}

void PosteriorTable::add(ItemPosterior item) {
    if (item.tau.size() != num_configurations(item.contexts.size()))
        throw ValidationError("posterior size does not match context count");
    if (!lookup_.emplace(item.item_id, items_.size()).second)
        throw ValidationError("duplicate posterior item " + item.item_id);
    items_.push_back(std::move(item));
}

std::size_t PosteriorTable::index_of(std::string_view item_id) const {
    auto it = lookup_.find(std::string(item_id));
    if (it == lookup_.end()) throw ValidationError("no posterior for item " + std::string(item_id));
    return it->second;
}

LabelDist marginal_y(const PosteriorTable::ItemPosterior& item) {
    const std::size_t block = item.tau.size() / kNumLabels;
    LabelDist out{};
    for (std::size_t y = 0; y < kNumLabels; ++y)
        for (std::size_t k = 0; k < block; ++k) out[y] += item.tau[y * block + k];
    return out;
}

LabelDist marginal_y(const PosteriorTable& posterior, std::string_view item_id) {
    return marginal_y(posterior.item(posterior.index_of(item_id)));
}

std::vector<CountMatrix> pairwise_marginals(const PosteriorTable::ItemPosterior& item) {
    const std::size_t num_ctx = item.contexts.size();
    std::vector<CountMatrix> pairs(num_ctx, CountMatrix{});
    std::vector<std::size_t> digits(num_ctx + 1, 0);  // digits[0] = y
    for (std::size_t idx = 0; idx < item.tau.size(); ++idx) {
        const double t = item.tau[idx];
        for (std::size_t c = 0; c < num_ctx; ++c) pairs[c][digits[0]][digits[c + 1]] += t;
        for (std::size_t d = num_ctx + 1; d-- > 0;) {
            if (++digits[d] < kNumLabels) break;
            digits[d] = 0;
        }
    }
    return pairs;
}

LabelDist apply_label_prior(const LabelDist& probs, const LabelDist& prior) {
    LabelDist out{};
    double total = 0.0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
        out[k] = probs[k] * prior[k];
        total += out[k];
    }
    if (!(total > 0.0)) throw NumericError("label prior leaves zero probability mass");
    for (auto& v : out) v /= total;
    return out;
}

std::vector<LabelDist> item_label_priors(const FitView& view, const ModelParameters& params) {
    if (!params.classifier) throw ValidationError("model parameters have no classifier");
    std::vector<LabelDist> out;
    out.reserve(view.items().size());
    for (const auto& item : view.items())
        out.push_back(apply_label_prior(params.classifier->predict_proba(item.features),
                                        params.label_prior));
    return out;
}

std::vector<LabelDist> cold_start_priors(const FitView& view, const LabelDist& label_prior) {
    std::vector<LabelDist> out;
    out.reserve(view.items().size());
    std::vector<Label> labels;
    for (const auto& item : view.items()) {
        LabelDist counts{};
        for (const auto& obs : item.observations) {
            labels.clear();
            for (const auto& al : obs.labels) labels.push_back(al.label);
            counts[label_index(majority_vote(labels).winner)] += 1.0;
        }
        const double n = static_cast<double>(item.observations.size());
        LabelDist p{};
        for (std::size_t k = 0; k < kNumLabels; ++k) p[k] = (counts[k] + label_prior[k]) / (n + 1.0);
        out.push_back(p);
    }
    return out;
}

double joint_config_likelihood(const FitView& view, std::size_t item,
                               const LatentConfiguration& config, const LabelDist& item_prior,
                               const MatrixSet& gamma, const MatrixSet& alpha) {
    const auto& fit_item = view.items().at(item);
    if (config.s.size() != fit_item.observations.size())
        throw ValidationError("configuration length does not match the item's context count");
    const auto bound = bind(view, gamma, alpha);
    double value = item_prior[label_index(config.y)];
    for (std::size_t c = 0; c < config.s.size(); ++c) {
        const auto& obs = fit_item.observations[c];
        value *= (*bound.gamma[obs.context])(config.y, config.s[c]);
        for (const auto& al : obs.labels) value *= (*bound.alpha[al.annotator])(config.s[c], al.label);
    }
    return value;
}

double joint_config_likelihood(const FitView& view, std::size_t item,
                               const LatentConfiguration& config, const ModelParameters& params) {
    if (!params.classifier) throw ValidationError("model parameters have no classifier");
    const auto prior = apply_label_prior(
        params.classifier->predict_proba(view.items().at(item).features), params.label_prior);
    return joint_config_likelihood(view, item, config, prior, params.gamma, params.alpha);
}

double incomplete_data_log_likelihood(const FitView& view, std::span<const LabelDist> item_priors,
                                      const MatrixSet& gamma, const MatrixSet& alpha) {
    if (item_priors.size() != view.items().size())
        throw ValidationError("one label prior per item is required");
    const auto bound = bind(view, gamma, alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < view.items().size(); ++i)
        total += item_log_likelihood(view.items()[i], item_priors[i], bound);
    return total;
}

double incomplete_data_log_likelihood(const FitView& view, const ModelParameters& params) {
    const auto priors = item_label_priors(view, params);
    return incomplete_data_log_likelihood(view, priors, params.gamma, params.alpha);
}

PosteriorTable e_step(const FitView& view, std::span<const LabelDist> item_priors,
                      const MatrixSet& gamma, const MatrixSet& alpha) {
    if (item_priors.size() != view.items().size())
        throw ValidationError("one label prior per item is required");
    const auto bound = bind(view, gamma, alpha);
    PosteriorTable table;
    for (std::size_t i = 0; i < view.items().size(); ++i)
        table.add(item_posterior(view.items()[i], item_priors[i], bound));
    return table;
}

PosteriorTable e_step(const FitView& view, const ModelParameters& params) {
    const auto priors = item_label_priors(view, params);
    return e_step(view, priors, params.gamma, params.alpha);
}

MatrixSet m_step_gamma(const FitView& view, const PosteriorTable& posterior, double smoothing) {
    std::vector<CountMatrix> counts(view.num_contexts(), CountMatrix{});
    for (const auto& item : view.items()) {
        const auto& post = posterior.item(posterior.index_of(item.id));
        const auto pairs = pairwise_marginals(post);
        for (std::size_t c = 0; c < pairs.size(); ++c)
            for (std::size_t y = 0; y < kNumLabels; ++y)
                for (std::size_t s = 0; s < kNumLabels; ++s)
                    counts[post.contexts[c]][y][s] += pairs[c][y][s];
    }
    MatrixSet out;
    for (std::size_t c = 0; c < view.num_contexts(); ++c)
        out.insert(view.context_ids()[c], renormalize_rows(counts[c], smoothing));
    return out;
}

MatrixSet m_step_alpha(const FitView& view, const PosteriorTable& posterior, double smoothing) {
    std::vector<CountMatrix> counts(view.num_annotators(), CountMatrix{});
    for (const auto& item : view.items()) {
        const auto& post = posterior.item(posterior.index_of(item.id));
        const auto pairs = pairwise_marginals(post);
        for (std::size_t c = 0; c < item.observations.size(); ++c) {
            std::array<double, kNumLabels> s_marginal{};
            for (std::size_t y = 0; y < kNumLabels; ++y)
                for (std::size_t s = 0; s < kNumLabels; ++s) s_marginal[s] += pairs[c][y][s];
            for (const auto& al : item.observations[c].labels) {
                const std::size_t r = label_index(al.label);
                for (std::size_t s = 0; s < kNumLabels; ++s)
                    counts[al.annotator][s][r] += s_marginal[s];
            }
        }
    }
    MatrixSet out;
    for (std::size_t a = 0; a < view.num_annotators(); ++a)
        out.insert(view.annotator_ids()[a], renormalize_rows(counts[a], smoothing));
    return out;
}

std::vector<LabelCounts> sample_training_labels(std::span<const LabelDist> marginals,
                                                std::size_t samples_per_item,
                                                std::uint64_t rng_seed) {
    std::mt19937_64 engine(rng_seed);
    std::vector<LabelCounts> out;
    out.reserve(marginals.size());
    for (const auto& p : marginals) {
        LabelCounts counts{};
        for (std::size_t n = 0; n < samples_per_item; ++n) ++counts[sample_index(engine, p)];
        out.push_back(counts);
    }
    return out;
}

TrainSet build_train_set(const FitView& view, std::span<const LabelCounts> counts) {
    if (counts.size() != view.items().size())
        throw ValidationError("one label count per item is required");
    TrainSet set;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t k = 0; k < kNumLabels; ++k)
            if (counts[i][k] > 0)
                set.add(view.items()[i].features, label_from_index(k),
                        static_cast<double>(counts[i][k]));
    return set;
}

FitResult fit(const FitView& view, const ClassifierTrainer& trainer, const FitConfig& config) {
    config.validate();
    if (view.items().empty()) throw ValidationError("nothing to fit");

    const auto initial = init_transition(config.init_diag_mass);
    ModelParameters params;
    params.gamma = MatrixSet::filled(view.context_ids(), initial);
    params.alpha = MatrixSet::filled(view.annotator_ids(), initial);
    params.label_prior = config.label_prior;

    FitResult result;
    auto priors = cold_start_priors(view, config.label_prior);
    constexpr double kInitialRelaxation = 1.5;
    constexpr double kMaxRelaxation = 8.0;
    double relaxation = kInitialRelaxation;

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        const auto posterior = e_step(view, priors, params.gamma, params.alpha);

        ModelParameters next;
        next.gamma = m_step_gamma(view, posterior, config.smoothing);
        next.alpha = m_step_alpha(view, posterior, config.smoothing);
        next.label_prior = config.label_prior;

        std::vector<LabelDist> marginals;
        marginals.reserve(posterior.size());
        for (const auto& item : posterior.items()) marginals.push_back(marginal_y(item));
        // Same stream every iteration: sampled labels only change where the
        // marginals moved.
        const auto counts =
            sample_training_labels(marginals, config.samples_per_item, mix_seed(config.rng_seed, 0));
        const auto train_set = build_train_set(view, counts);
        next.classifier = trainer.train(train_set, mix_seed(config.rng_seed, it),
                                        params.classifier.get());

        auto next_priors = item_label_priors(view, next);
        double ll = incomplete_data_log_likelihood(view, next_priors, next.gamma, next.alpha);
        bool updated = true;
        if (params.classifier) {
            ModelParameters kept = next;
            kept.classifier = params.classifier;
            auto kept_priors = item_label_priors(view, kept);
            const double kept_ll =
                incomplete_data_log_likelihood(view, kept_priors, kept.gamma, kept.alpha);
            if (kept_ll > ll) {
                next = std::move(kept);
                next_priors = std::move(kept_priors);
                ll = kept_ll;
                updated = false;
            }
        }
        if (updated) ++result.classifier_updates;

        if (config.overrelaxation) {
            const double floor = std::max(config.smoothing, 1e-12);
            auto gamma = extrapolate(params.gamma, next.gamma, relaxation, floor);
            auto alpha = extrapolate(params.alpha, next.alpha, relaxation, floor);
            const double relaxed_ll = incomplete_data_log_likelihood(view, next_priors, gamma, alpha);
            if (relaxed_ll > ll) {
                next.gamma = std::move(gamma);
                next.alpha = std::move(alpha);
                ll = relaxed_ll;
                relaxation = std::min(2.0 * relaxation, kMaxRelaxation);
                ++result.overrelaxed_steps;
            } else {
                relaxation = kInitialRelaxation;
            }
        }

        if (!result.log_likelihood_trace.empty()) {
            const double previous = result.log_likelihood_trace.back();
            if (ll < previous - config.monotonicity_slack)
                throw NumericError("log-likelihood decreased at iteration " + std::to_string(it) +
                                   ": " + text::format_double17(previous) + " -> " +
                                   text::format_double17(ll));
        }
        result.log_likelihood_trace.push_back(ll);
        params = std::move(next);
        priors = std::move(next_priors);
        result.iterations = it;

        const auto& trace = result.log_likelihood_trace;
        if (trace.size() >= 2) {
            const double prev = trace[trace.size() - 2];
            if (std::abs(ll - prev) <= config.rel_tolerance * std::abs(prev)) {
                result.converged = true;
                break;
            }
        }
    }
    result.posterior = e_step(view, priors, params.gamma, params.alpha);
    result.params = std::move(params);
    return result;
}

void write_probability_dump(std::span<const std::pair<std::string, LabelDist>> rows,
                            const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << "item_id,p_neg1,p_0,p_1\n";
    for (const auto& [id, p] : rows)
        out << id << ',' << text::format_double17(p[0]) << ',' << text::format_double17(p[1])
            << ',' << text::format_double17(p[2]) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void write_posterior_dump(const PosteriorTable& posterior, const std::filesystem::path& path) {
    std::vector<std::pair<std::string, LabelDist>> rows;
    rows.reserve(posterior.size());
    for (const auto& item : posterior.items()) rows.emplace_back(item.item_id, marginal_y(item));
    write_probability_dump(rows, path);
}

std::vector<std::pair<std::string, LabelDist>> read_probability_dump(
    const std::filesystem::path& path) {
    text::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.source(), 1, "missing header");
    const char delim = text::detect_delimiter(line);
    std::vector<std::pair<std::string, LabelDist>> rows;
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, delim);
        if (fields.size() != 4) throw ParseError(reader.source(), reader.row(), "expected 4 fields");
        LabelDist p{};
        for (std::size_t k = 0; k < kNumLabels; ++k)
            if (!text::parse_double(fields[k + 1], p[k]) || p[k] < 0.0)
                throw ParseError(reader.source(), reader.row(), "bad probability");
        rows.emplace_back(std::string(text::trim(fields[0])), p);
    }
    return rows;
}

void write_trace(std::span<const double> trace, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (double v : trace) out << text::format_double17(v) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace constance
