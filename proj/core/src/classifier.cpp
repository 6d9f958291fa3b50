#include "constance/classifier.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "constance/errors.hpp"
#include "constance/text_table.hpp"

namespace constance {

void TrainSet::add(FeatureVector x, Label y, double weight) {
    if (!weights.empty() || weight != 1.0) {
        if (weights.empty()) weights.assign(labels.size(), 1.0);
        weights.push_back(weight);
    }
    features.push_back(std::move(x));
    labels.push_back(y);
}

void TrainSet::validate() const {
    if (labels.empty()) throw ValidationError("training set is empty");
    if (features.size() != labels.size()) throw ValidationError("features/labels length mismatch");
    if (!weights.empty() && weights.size() != labels.size())
        throw ValidationError("weights/labels length mismatch");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("weights must be positive");
    const std::size_t dim = features.front().dim();
    for (const auto& x : features)
        if (x.dim() != dim) throw ValidationError("mixed feature dimensionality in training set");
}

SoftmaxModel::SoftmaxModel(std::size_t feature_dim, double regularization)
    : dim_(feature_dim), regularization_(regularization),
      weights_(kNumLabels * (feature_dim + 1), 0.0) {}

SoftmaxModel::SoftmaxModel(std::size_t feature_dim, double regularization,
                           std::vector<double> weights)
    : dim_(feature_dim), regularization_(regularization), weights_(std::move(weights)) {
    if (weights_.size() != kNumLabels * (dim_ + 1))
        throw ValidationError("softmax weight count does not match feature dimension");
}

std::array<double, kNumLabels> SoftmaxModel::scores(const FeatureVector& x) const {
    if (x.dim() != dim_)
        throw ValidationError("feature dimension " + std::to_string(x.dim()) +
                              " does not match model dimension " + std::to_string(dim_));
    std::array<double, kNumLabels> s{};
    const std::span<const double> w(weights_);
    for (std::size_t c = 0; c < kNumLabels; ++c) {
        const auto row = w.subspan(c * (dim_ + 1), dim_ + 1);
        s[c] = x.dot(row) + row[dim_];
    }
    return s;
}

LabelDist softmax(const std::array<double, kNumLabels>& scores) noexcept {
    const double top = *std::max_element(scores.begin(), scores.end());
    LabelDist p{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumLabels; ++c) {
        p[c] = std::exp(scores[c] - top);
        sum += p[c];
    }
    double clamped_sum = 0.0;
    for (auto& v : p) {
        v = std::max(v / sum, DBL_MIN);
        clamped_sum += v;
    }
    for (auto& v : p) v /= clamped_sum;
    return p;
}

LabelDist SoftmaxModel::predict_proba(const FeatureVector& x) const { return softmax(scores(x)); }

void SoftmaxModel::save(std::ostream& out) const {
    out << "softmax\n";
    out << "regularization " << text::format_double17(regularization_) << '\n';
    out << "classes " << kNumLabels << '\n';
    out << "features " << dim_ << '\n';
    for (std::size_t c = 0; c < kNumLabels; ++c) {
        for (std::size_t j = 0; j <= dim_; ++j) {
            if (j > 0) out << ' ';
            out << text::format_double17(weights_[c * (dim_ + 1) + j]);
        }
        out << '\n';
    }
}

SoftmaxModel SoftmaxModel::load(std::istream& in) {
    std::string tag;
    std::string key;
    double reg = 0;
    std::size_t classes = 0;
    std::size_t dim = 0;
    if (!(in >> tag) || tag != "softmax") throw ValidationError("not a softmax model dump");
    std::string value;
    if (!(in >> key >> value) || key != "regularization" || !text::parse_double(value, reg))
        throw ValidationError("bad regularization line");
    if (!(in >> key >> classes) || key != "classes" || classes != kNumLabels)
        throw ValidationError("bad classes line");
    if (!(in >> key >> dim) || key != "features") throw ValidationError("bad features line");
    std::vector<double> w(kNumLabels * (dim + 1));
    for (auto& v : w)
        if (!(in >> value) || !text::parse_double(value, v))
            throw ValidationError("truncated weight matrix");
    return SoftmaxModel(dim, reg, std::move(w));
}

LossGradient softmax_loss_gradient(std::span<const double> weights, std::size_t feature_dim,
                                   const TrainSet& data, double regularization) {
    const std::size_t stride = feature_dim + 1;
    LossGradient out;
    out.gradient.assign(weights.size(), 0.0);
    double total_weight = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) total_weight += data.weight(k);

    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& x = data.features[k];
        const double w = data.weight(k) / total_weight;
        std::array<double, kNumLabels> s{};
        for (std::size_t c = 0; c < kNumLabels; ++c) {
            const auto row = weights.subspan(c * stride, stride);
            s[c] = x.dot(row) + row[feature_dim];
        }
        const double top = *std::max_element(s.begin(), s.end());
        double z = 0.0;
        for (double v : s) z += std::exp(v - top);
        const double log_z = top + std::log(z);
        const std::size_t target = label_index(data.labels[k]);
        out.loss += w * (log_z - s[target]);
        const auto idx = x.indices();
        const auto val = x.values();
        for (std::size_t c = 0; c < kNumLabels; ++c) {
            const double residual = w * (std::exp(s[c] - log_z) - (c == target ? 1.0 : 0.0));
            double* g = out.gradient.data() + c * stride;
            for (std::size_t e = 0; e < idx.size(); ++e) g[idx[e]] += residual * val[e];
            g[feature_dim] += residual;
        }
    }
    for (std::size_t c = 0; c < kNumLabels; ++c) {
        for (std::size_t j = 0; j < feature_dim; ++j) {
            const double wj = weights[c * stride + j];
            out.loss += 0.5 * regularization * wj * wj;
            out.gradient[c * stride + j] += regularization * wj;
        }
    }
    return out;
}

SoftmaxModel train_softmax(const TrainSet& data, const SoftmaxOptions& options,
                           std::uint64_t /*seed*/, const SoftmaxModel* warm_start,
                           std::vector<double>* loss_history) {
    data.validate();
    if (!(options.regularization >= 0.0)) throw ValidationError("regularization must be >= 0");
    const std::size_t dim = data.features.front().dim();
    std::vector<double> w(kNumLabels * (dim + 1), 0.0);
    if (warm_start && warm_start->feature_dim() == dim)
        w.assign(warm_start->weights().begin(), warm_start->weights().end());

    // The cross-entropy Hessian is bounded by 1/2 * lambda_max(E_w[x x^T]) with
    // x = [features, 1], and the trace of that second moment bounds lambda_max.
    double total_weight = 0.0;
    double second_moment_trace = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        total_weight += data.weight(k);
        second_moment_trace += data.weight(k) * (data.features[k].squared_norm() + 1.0);
    }
    const double lipschitz = 0.5 * second_moment_trace / total_weight + options.regularization;
    const double step = 1.0 / lipschitz;

    const auto converged = [&](const std::vector<double>& g) {
        double norm2 = 0.0;
        for (double v : g) norm2 += v * v;
        return std::sqrt(norm2) <= options.gradient_tolerance;
    };

    // Nesterov momentum; a step that raises the loss is dropped and the momentum restarts.
    auto current = softmax_loss_gradient(w, dim, data, options.regularization);
    if (loss_history) loss_history->push_back(current.loss);
    std::vector<double> previous = w;
    std::vector<double> probe(w.size());
    double t = 1.0;
    for (std::size_t epoch = 0; epoch < options.max_epochs && !converged(current.gradient); ++epoch) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = t > 1.0 ? (t - 1.0) / t_next : 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) probe[k] = w[k] + momentum * (w[k] - previous[k]);
        const auto at_probe =
            momentum > 0.0 ? softmax_loss_gradient(probe, dim, data, options.regularization) : current;
        for (std::size_t k = 0; k < w.size(); ++k) probe[k] -= step * at_probe.gradient[k];
        auto candidate = softmax_loss_gradient(probe, dim, data, options.regularization);
        if (candidate.loss <= current.loss) {
            previous.swap(w);
            w = probe;
            current = std::move(candidate);
            t = t_next;
            if (loss_history) loss_history->push_back(current.loss);
        } else {
            previous = w;
            t = 1.0;
        }
    }
    return SoftmaxModel(dim, options.regularization, std::move(w));
}

std::shared_ptr<const Classifier> SoftmaxTrainer::train(const TrainSet& data, std::uint64_t seed,
                                                        const Classifier* warm_start) const {
    const auto* previous = dynamic_cast<const SoftmaxModel*>(warm_start);
    return std::make_shared<const SoftmaxModel>(train_softmax(data, options_, seed, previous));
}

Label argmax_label(const LabelDist& probs) noexcept {
    // Candidate order encodes the tie rule.
    constexpr std::array<Label, kNumLabels> order = {Label::Neutral, Label::Negative,
                                                     Label::Positive};
    Label best = order[0];
    for (Label l : order)
        if (probs[label_index(l)] > probs[label_index(best)]) best = l;
    return best;
}

}  // namespace constance
