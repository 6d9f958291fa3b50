#include "run_config.hpp"

#include <constance/errors.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace constance::cli {

namespace {

using nlohmann::json;

// Typed view of one JSON object that rejects keys nobody asked for.
class Section {
public:
    Section(const json& node, std::string name, const fs::path& base_dir)
        : node_(node), name_(std::move(name)), base_dir_(base_dir) {
        if (!node_.is_object()) fail("", "expected an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        if (const auto* v = find(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                fail(key, "wrong type");
            }
        }
    }

    template <class T>
    void read(const char* key, std::optional<T>& out) {
        T value{};
        if (find(key)) {
            read(key, value);
            out = value;
        }
    }

    void read_count(const char* key, std::size_t& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void read_seed(const char* key, std::uint64_t& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void read_dist(const char* key, LabelDist& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array() || v->size() != kNumLabels) fail(key, "expected three numbers");
            for (std::size_t k = 0; k < kNumLabels; ++k) {
                if (!(*v)[k].is_number()) fail(key, "expected three numbers");
                out[k] = (*v)[k].get<double>();
            }
        }
    }

    void read_range(const char* key, std::pair<double, double>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
                fail(key, "expected [low, high]");
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    void read_path(const char* key, std::optional<fs::path>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) fail(key, "expected a path string");
            out = resolve(v->get<std::string>());
        }
    }

    void read_paths(const char* key, std::vector<fs::path>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) fail(key, "expected a list of paths");
            out.clear();
            for (const auto& p : *v) {
                if (!p.is_string()) fail(key, "expected a list of paths");
                out.push_back(resolve(p.get<std::string>()));
            }
        }
    }

    std::optional<Section> child(const char* key) {
        if (const auto* v = find(key)) return Section(*v, name_ + key + ".", base_dir_);
        return std::nullopt;
    }

    void finish() const {
        for (const auto& [key, value] : node_.items())
            if (!seen_.count(key)) throw ValidationError("run config: unknown key '" + name_ + key + "'");
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    fs::path resolve(const std::string& raw) const {
        const fs::path p(raw);
        return p.is_absolute() ? p : base_dir_ / p;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw ValidationError("run config: '" + name_ + key + "': " + why);
    }

    const json& node_;
    std::string name_;
    fs::path base_dir_;
    std::set<std::string> seen_;
};

void read_fit(Section& s, FitConfig& c) {
    s.read_count("max_iterations", c.max_iterations);
    s.read("rel_tolerance", c.rel_tolerance);
    s.read_count("samples_per_item", c.samples_per_item);
    s.read_dist("label_prior", c.label_prior);
    s.read("smoothing", c.smoothing);
    s.read("init_diag_mass", c.init_diag_mass);
    s.read("monotonicity_slack", c.monotonicity_slack);
    s.read("overrelaxation", c.overrelaxation);
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("run config: ") + e.what());
    }

    RunConfig c;
    Section root(doc, "", base_dir);
    root.read_seed("seed", c.seed);
    std::optional<fs::path> out;
    root.read_path("out", out);
    if (out) c.out = *out;

    if (auto s = root.child("data")) {
        s->read_path("annotations", c.data.annotations);
        s->read_path("features", c.data.features);
        s->finish();
    }
    if (auto s = root.child("fit")) {
        s->read_path("predict", c.fit.predict);
        read_fit(*s, c.fit.em);
        s->finish();
    }
    if (auto s = root.child("classifier")) {
        s->read("regularization", c.fit.classifier.regularization);
        s->read_count("max_epochs", c.fit.classifier.max_epochs);
        s->read("gradient_tolerance", c.fit.classifier.gradient_tolerance);
        s->finish();
    }
    if (auto s = root.child("ablate")) {
        s->read("variant", c.ablate.variant);
        s->read("context", c.ablate.context);
        s->read_dist("label_prior", c.ablate.label_prior);
        s->finish();
    }
    if (auto s = root.child("simulate")) {
        auto& o = c.simulate.options;
        s->read_count("n_items", o.n_items);
        s->read_count("n_contexts", o.n_contexts);
        s->read_count("n_annotators", o.n_annotators);
        s->read_count("annotators_per_context", o.annotators_per_context);
        s->read_count("feature_dim", o.feature_dim);
        s->read_range("gamma_diag", o.gamma_diag);
        s->read_range("alpha_diag", o.alpha_diag);
        s->read_dist("true_label_distribution", o.true_label_distribution);
        s->read("class_separation", o.class_separation);
        s->read("noise_scale", o.noise_scale);
        s->read_count("n_holdout_items", o.n_holdout_items);
        s->read_path("truth", c.simulate.truth);
        s->finish();
    }
    if (auto s = root.child("evaluate")) {
        s->read_path("gold", c.evaluate.gold);
        s->read_paths("predictions", c.evaluate.predictions);
        s->read_count("bootstrap_iterations", c.evaluate.bootstrap_iterations);
        s->finish();
    }
    if (auto s = root.child("featurize")) {
        auto& n = c.featurize.ngrams;
        s->read_path("corpus", c.featurize.corpus);
        s->read_path("holdout_corpus", c.featurize.holdout_corpus);
        s->read_count("char_min", n.char_min);
        s->read_count("char_max", n.char_max);
        s->read_count("word_min", n.word_min);
        s->read_count("word_max", n.word_max);
        s->read_count("min_count", n.min_count);
        s->finish();
    }
    root.finish();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open run config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

}  // namespace constance::cli
