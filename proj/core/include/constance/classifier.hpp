#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "constance/dataset.hpp"
#include "constance/label.hpp"

namespace constance {

// Labelled examples. weights may be empty (every example counts once);
// otherwise it is parallel to labels and holds positive multiplicities.
struct TrainSet {
    std::vector<FeatureVector> features;
    std::vector<Label> labels;
    std::vector<double> weights;

    void add(FeatureVector x, Label y, double weight = 1.0);
    std::size_t size() const noexcept { return labels.size(); }
    double weight(std::size_t k) const { return weights.empty() ? 1.0 : weights[k]; }
    // Throws ValidationError when empty or inconsistent.
    void validate() const;
};

// Probabilistic classifier M: feature vector -> distribution over labels.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual LabelDist predict_proba(const FeatureVector& x) const = 0;
    virtual std::size_t feature_dim() const noexcept = 0;
    virtual void save(std::ostream& out) const = 0;
};

// Retrains a classifier from labelled examples. warm_start is the previous
// model, if any; implementations may ignore it.
class ClassifierTrainer {
public:
    virtual ~ClassifierTrainer() = default;

    virtual std::shared_ptr<const Classifier> train(const TrainSet& data, std::uint64_t seed,
                                                    const Classifier* warm_start) const = 0;
};

// Multinomial logistic regression. Weights are |V| x (d + 1), row-major in
// kAllLabels order, bias in the last column.
class SoftmaxModel final : public Classifier {
public:
    SoftmaxModel(std::size_t feature_dim, double regularization);
    SoftmaxModel(std::size_t feature_dim, double regularization, std::vector<double> weights);

    LabelDist predict_proba(const FeatureVector& x) const override;
    std::size_t feature_dim() const noexcept override { return dim_; }
    void save(std::ostream& out) const override;
    static SoftmaxModel load(std::istream& in);

    std::array<double, kNumLabels> scores(const FeatureVector& x) const;
    double regularization() const noexcept { return regularization_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t row_stride() const noexcept { return dim_ + 1; }

private:
    std::size_t dim_;
    double regularization_;
    std::vector<double> weights_;
};

// Softmax of raw scores; every entry is clamped to at least DBL_MIN.
LabelDist softmax(const std::array<double, kNumLabels>& scores) noexcept;

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

// Weighted mean cross-entropy plus (regularization / 2) * ||W||^2 over the
// non-bias weights, and its gradient with respect to the flattened weights.
LossGradient softmax_loss_gradient(std::span<const double> weights, std::size_t feature_dim,
                                   const TrainSet& data, double regularization);

struct SoftmaxOptions {
    double regularization = 1e-2;
    std::size_t max_epochs = 5000;
    double gradient_tolerance = 1e-5;
};

// Full-batch accelerated gradient descent with step 1/L, where L bounds the
// curvature of the objective. A momentum step that raises the loss is dropped
// and the momentum restarts, so recorded losses never increase. Training is
// deterministic; the seed is accepted for interface symmetry with stochastic
// trainers. If loss_history is given it receives the loss after every
// accepted step.
SoftmaxModel train_softmax(const TrainSet& data, const SoftmaxOptions& options,
                           std::uint64_t seed, const SoftmaxModel* warm_start = nullptr,
                           std::vector<double>* loss_history = nullptr);

class SoftmaxTrainer final : public ClassifierTrainer {
public:
    explicit SoftmaxTrainer(SoftmaxOptions options = {}) : options_(options) {}

    std::shared_ptr<const Classifier> train(const TrainSet& data, std::uint64_t seed,
                                            const Classifier* warm_start) const override;

    const SoftmaxOptions& options() const noexcept { return options_; }

private:
    SoftmaxOptions options_;
};

// Most probable label; exact ties prefer Neutral, then Negative.
Label argmax_label(const LabelDist& probs) noexcept;

}  // namespace constance
