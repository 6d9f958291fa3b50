#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "constance/classifier.hpp"
#include "constance/label.hpp"

namespace constance {

// Unnormalized non-negative |V| x |V| weights, rows and columns in kAllLabels order.
using CountMatrix = std::array<std::array<double, kNumLabels>, kNumLabels>;

// Row-stochastic |V| x |V| matrix. Entry (y, s) is p(observe s | true y).
// Used both for context noise (gamma) and annotator noise (alpha).
class TransitionMatrix {
public:
    using Rows = CountMatrix;

    static constexpr double kRowSumTolerance = 1e-9;

    TransitionMatrix();  // identity

    // Throws ValidationError unless every entry is in [0, 1] and every row
    // sums to 1 within kRowSumTolerance.
    explicit TransitionMatrix(const Rows& rows);

    static TransitionMatrix identity() { return TransitionMatrix(); }
    static TransitionMatrix uniform();

    double operator()(Label from, Label to) const noexcept {
        return rows_[label_index(from)][label_index(to)];
    }
    double at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
    const Rows& rows() const noexcept { return rows_; }

    friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

private:
    Rows rows_{};
};

// Diagonal diag_mass, off-diagonal (1 - diag_mass) / (|V| - 1).
// diag_mass must lie in (1/|V|, 1].
TransitionMatrix init_transition(double diag_mass);

// Adds smoothing to every entry and divides each row by its sum. Throws
// NumericError if a row sums to zero, ValidationError on negative input.
TransitionMatrix renormalize_rows(const CountMatrix& weights, double smoothing);

// Matrices keyed by opaque id, in insertion order. Insertion order matches
// the dense index order of the dataset the set was built for.
class MatrixSet {
public:
    MatrixSet() = default;
    MatrixSet(std::vector<std::string> ids, std::vector<TransitionMatrix> matrices);

    // Constructs every id with the same matrix.
    static MatrixSet filled(const std::vector<std::string>& ids, const TransitionMatrix& m);

    void insert(std::string id, TransitionMatrix matrix);

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<TransitionMatrix>& matrices() const noexcept { return matrices_; }
    const TransitionMatrix& operator[](std::size_t index) const { return matrices_.at(index); }

    const TransitionMatrix* find(std::string_view id) const;
    // Throws ValidationError for an unknown id.
    const TransitionMatrix& at(std::string_view id) const;

    friend bool operator==(const MatrixSet& a, const MatrixSet& b) {
        return a.ids_ == b.ids_ && a.matrices_ == b.matrices_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<TransitionMatrix> matrices_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

// theta: the classifier, one gamma per context, one alpha per annotator, and
// the prior over true labels. Replaced wholesale between EM iterations.
struct ModelParameters {
    MatrixSet gamma;
    MatrixSet alpha;
    std::shared_ptr<const Classifier> classifier;
    LabelDist label_prior = kUniformDist;
};

// Throws ValidationError unless entries are > 0 and sum to 1 within 1e-9.
void validate_label_prior(const LabelDist& prior);

// Text blocks "[gamma <id>]" / "[alpha <id>]", each followed by three rows of
// three reals at 17 significant digits, rows ordered (-1, 0, 1).
void export_matrices(const MatrixSet& gamma, const MatrixSet& alpha,
                     const std::filesystem::path& path);
void export_matrices(const ModelParameters& params, const std::filesystem::path& path);

struct MatrixExport {
    MatrixSet gamma;
    MatrixSet alpha;
};

MatrixExport import_matrices(const std::filesystem::path& path);

}  // namespace constance
