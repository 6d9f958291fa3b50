#include "constance/noise_model.hpp"

#include <cmath>
#include <set>

#include "constance/errors.hpp"
#include "constance/text_table.hpp"

namespace constance {

TransitionMatrix::TransitionMatrix() {
    for (std::size_t k = 0; k < kNumLabels; ++k) rows_[k][k] = 1.0;
}

TransitionMatrix::TransitionMatrix(const Rows& rows) : rows_(rows) {
    for (const auto& row : rows_) {
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("transition matrix entry outside [0, 1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            throw ValidationError("transition matrix row does not sum to 1");
    }
}

TransitionMatrix TransitionMatrix::uniform() {
    Rows rows;
    for (auto& row : rows) row.fill(1.0 / kNumLabels);
    return TransitionMatrix(rows);
}

TransitionMatrix init_transition(double diag_mass) {
    if (!(diag_mass > 1.0 / kNumLabels && diag_mass <= 1.0))
        throw ValidationError("diag_mass must lie in (1/3, 1]");
    const double off = (1.0 - diag_mass) / (kNumLabels - 1);
    TransitionMatrix::Rows rows;
    for (std::size_t r = 0; r < kNumLabels; ++r)
        for (std::size_t c = 0; c < kNumLabels; ++c) rows[r][c] = r == c ? diag_mass : off;
    return TransitionMatrix(rows);
}

TransitionMatrix renormalize_rows(const CountMatrix& weights, double smoothing) {
    if (!(smoothing >= 0.0)) throw ValidationError("smoothing must be >= 0");
    TransitionMatrix::Rows rows;
    for (std::size_t r = 0; r < kNumLabels; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < kNumLabels; ++c) {
            if (!(weights[r][c] >= 0.0)) throw ValidationError("negative transition weight");
            rows[r][c] = weights[r][c] + smoothing;
            sum += rows[r][c];
        }
        if (!(sum > 0.0)) throw NumericError("cannot renormalize an all-zero row");
        for (auto& v : rows[r]) v /= sum;
    }
    return TransitionMatrix(rows);
}

MatrixSet::MatrixSet(std::vector<std::string> ids, std::vector<TransitionMatrix> matrices) {
    if (ids.size() != matrices.size()) throw ValidationError("id/matrix count mismatch");
    for (std::size_t k = 0; k < ids.size(); ++k) insert(std::move(ids[k]), matrices[k]);
}

MatrixSet MatrixSet::filled(const std::vector<std::string>& ids, const TransitionMatrix& m) {
    MatrixSet set;
    for (const auto& id : ids) set.insert(id, m);
    return set;
}

void MatrixSet::insert(std::string id, TransitionMatrix matrix) {
    if (lookup_.contains(id)) throw ValidationError("duplicate matrix id " + id);
    lookup_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    matrices_.push_back(matrix);
}

const TransitionMatrix* MatrixSet::find(std::string_view id) const {
    auto it = lookup_.find(std::string(id));
    return it == lookup_.end() ? nullptr : &matrices_[it->second];
}

const TransitionMatrix& MatrixSet::at(std::string_view id) const {
    const auto* m = find(id);
    if (!m) throw ValidationError("no matrix for id " + std::string(id));
    return *m;
}

void validate_label_prior(const LabelDist& prior) {
    double sum = 0.0;
    for (double p : prior) {
        if (!(p > 0.0)) throw ValidationError("label prior entries must be > 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("label prior must sum to 1");
}

namespace {

void write_block(std::ostream& out, std::string_view kind, const std::string& id,
                 const TransitionMatrix& m) {
    out << '[' << kind << ' ' << id << "]\n";
    for (const auto& row : m.rows()) {
        out << text::format_double17(row[0]) << ' ' << text::format_double17(row[1]) << ' '
            << text::format_double17(row[2]) << '\n';
    }
}

}  // namespace

void export_matrices(const MatrixSet& gamma, const MatrixSet& alpha,
                     const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (std::size_t k = 0; k < gamma.size(); ++k) write_block(out, "gamma", gamma.ids()[k], gamma[k]);
    for (std::size_t k = 0; k < alpha.size(); ++k) write_block(out, "alpha", alpha.ids()[k], alpha[k]);
    if (!out) throw IoError("failed writing " + path.string());
}

void export_matrices(const ModelParameters& params, const std::filesystem::path& path) {
    export_matrices(params.gamma, params.alpha, path);
}

MatrixExport import_matrices(const std::filesystem::path& path) {
    text::LineReader reader(path);
    MatrixExport result;
    std::string line;
    while (reader.next(line)) {
        const auto header = text::trim(line);
        if (header.empty()) continue;
        if (header.size() < 3 || header.front() != '[' || header.back() != ']')
            throw ParseError(reader.source(), reader.row(), "expected [gamma <id>] or [alpha <id>]");
        const auto body = header.substr(1, header.size() - 2);
        const auto space = body.find(' ');
        if (space == std::string_view::npos)
            throw ParseError(reader.source(), reader.row(), "block header needs an id");
        const std::string kind(body.substr(0, space));
        const std::string id(body.substr(space + 1));
        if (kind != "gamma" && kind != "alpha")
            throw ParseError(reader.source(), reader.row(), "unknown block kind");
        TransitionMatrix::Rows rows;
        for (std::size_t r = 0; r < kNumLabels; ++r) {
            if (!reader.next(line)) throw ParseError(reader.source(), reader.row(), "truncated block");
            std::vector<std::string_view> fields;
            for (auto f : text::split(text::trim(line), ' '))
                if (!f.empty()) fields.push_back(f);
            if (fields.size() != kNumLabels)
                throw ParseError(reader.source(), reader.row(), "expected 3 values");
            for (std::size_t c = 0; c < kNumLabels; ++c)
                if (!text::parse_double(fields[c], rows[r][c]))
                    throw ParseError(reader.source(), reader.row(), "bad matrix entry");
        }
        try {
            (kind == "gamma" ? result.gamma : result.alpha).insert(id, TransitionMatrix(rows));
        } catch (const ValidationError& e) {
            throw ParseError(reader.source(), reader.row(), e.what());
        }
    }
    return result;
}

}  // namespace constance
