#include "commands.hpp"

#include <constance/baselines.hpp>
#include <constance/dataset.hpp>
#include <constance/errors.hpp>
#include <constance/evaluation.hpp>
#include <constance/text_table.hpp>

#include <nlohmann/json.hpp>

#include <ostream>
#include <unordered_map>

namespace constance::cli {

namespace {

using nlohmann::ordered_json;

const fs::path& require_input(const std::optional<fs::path>& path, const char* what) {
    if (!path) throw ValidationError(std::string("missing input: ") + what);
    if (!fs::is_regular_file(*path)) throw IoError(std::string(what) + " not found: " + path->string());
    return *path;
}

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_json(const ordered_json& doc, const fs::path& path) {
    auto out = text::open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_training_data(const RunConfig& config) {
    const auto& annotations = require_input(config.data.annotations, "annotations");
    const auto& features = require_input(config.data.features, "features");
    return load_dataset(annotations, features);
}

void run_fit(const Dataset& data, const RunConfig& config, const FitConfig& em,
             const std::string& prefix, std::ostream& log) {
    const auto& out = config.out;
    std::optional<std::vector<Item>> heldout;
    if (config.fit.predict) heldout = load_items(require_input(config.fit.predict, "held-out features"));
    prepare_output(out);

    const FitView view(data);
    const SoftmaxTrainer trainer(config.fit.classifier);
    const auto result = fit(view, trainer, em);

    export_matrices(result.params, out / (prefix + "matrices.txt"));
    write_posterior_dump(result.posterior, out / (prefix + "posteriors.csv"));
    write_trace(result.log_likelihood_trace, out / (prefix + "loglik.txt"));
    {
        auto model = text::open_output(out / (prefix + "classifier.txt"));
        result.params.classifier->save(model);
        if (!model) throw IoError("write failed: " + (out / (prefix + "classifier.txt")).string());
    }
    if (heldout) {
        std::vector<std::pair<std::string, LabelDist>> rows;
        rows.reserve(heldout->size());
        for (const auto& item : *heldout) {
            if (item.features.dim() != view.feature_dim())
                throw ValidationError("held-out item " + item.id + " has feature dimension " +
                                      std::to_string(item.features.dim()) + ", expected " +
                                      std::to_string(view.feature_dim()));
            rows.emplace_back(item.id, result.params.classifier->predict_proba(item.features));
        }
        write_probability_dump(rows, out / (prefix + "predictions.csv"));
    }

    ordered_json summary;
    summary["seed"] = em.rng_seed;
    summary["items"] = data.num_items();
    summary["contexts"] = result.params.gamma.size();
    summary["annotators"] = result.params.alpha.size();
    summary["label_prior"] = em.label_prior;
    summary["iterations"] = result.iterations;
    summary["converged"] = result.converged;
    summary["final_log_likelihood"] = result.log_likelihood_trace.back();
    summary["classifier_updates"] = result.classifier_updates;
    summary["overrelaxed_steps"] = result.overrelaxed_steps;
    write_json(summary, out / (prefix + "fit.json"));

    log << prefix << "fit: " << result.iterations << " iterations, "
        << (result.converged ? "converged" : "not converged") << ", log-likelihood "
        << text::format_double(result.log_likelihood_trace.back()) << '\n';
}

std::vector<std::pair<std::string, std::string>> read_corpus(const fs::path& path) {
    text::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.source(), 1, "empty corpus file");
    const char delim = text::detect_delimiter(line);
    const auto header = text::split(line, delim);
    if (header.size() != 2 || text::trim(header[0]) != "item_id" || text::trim(header[1]) != "text")
        throw ParseError(reader.source(), reader.row(), "expected header item_id" + std::string(1, delim) + "text");
    std::vector<std::pair<std::string, std::string>> docs;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto cut = line.find(delim);
        if (cut == std::string::npos) throw ParseError(reader.source(), reader.row(), "missing text field");
        const auto id = text::trim(std::string_view(line).substr(0, cut));
        if (id.empty()) throw ParseError(reader.source(), reader.row(), "empty item_id");
        docs.emplace_back(std::string(id), line.substr(cut + 1));
    }
    if (docs.empty()) throw ValidationError("corpus " + path.string() + " has no documents");
    return docs;
}

std::vector<Item> featurize_corpus(const Vocabulary& vocab,
                                   const std::vector<std::pair<std::string, std::string>>& docs) {
    std::vector<Item> items;
    items.reserve(docs.size());
    for (const auto& [id, body] : docs) items.push_back({id, featurize(vocab, body), std::nullopt});
    return items;
}

std::string scope_file_name(std::size_t index) { return "votes_" + std::to_string(index) + ".csv"; }

}  // namespace

void cmd_fit(const RunConfig& config, std::ostream& log) {
    const auto data = load_training_data(config);
    auto em = config.fit.em;
    em.rng_seed = config.seed;
    run_fit(data, config, em, "", log);
}

void cmd_ablate(const RunConfig& config, std::ostream& log) {
    if (!config.ablate.variant) throw ValidationError("ablate: variant is required (1, 2 or 3)");
    const int variant = *config.ablate.variant;
    if (variant < 1 || variant > 3)
        throw ValidationError("ablate: variant must be 1, 2 or 3, got " + std::to_string(variant));
    if (variant == 1 && !config.ablate.context) throw ValidationError("ablate: variant 1 needs a context id");

    const auto data = load_training_data(config);
    const Dataset transformed = variant == 1   ? filter_context(data, *config.ablate.context)
                                : variant == 2 ? mask_contexts(data)
                                               : mask_annotators(data);
    auto em = config.fit.em;
    em.rng_seed = config.seed;
    em.label_prior = config.ablate.label_prior;
    run_fit(transformed, config, em, "ablation" + std::to_string(variant) + "_", log);
}

void cmd_simulate(const RunConfig& config, std::ostream& log) {
    auto spec = random_simulation_spec(config.simulate.options, config.seed);
    if (config.simulate.truth) {
        auto truth = import_matrices(require_input(config.simulate.truth, "truth matrices"));
        spec.contexts = std::move(truth.gamma);
        spec.annotators = std::move(truth.alpha);
    }
    const auto sim = simulate(spec);
    const auto& out = config.out;
    prepare_output(out);

    save_dataset(sim.dataset, out / "annotations.csv", out / "features.csv", out / "gold.csv");
    export_matrices(sim.true_gamma, sim.true_alpha, out / "truth.txt");
    if (!sim.holdout.empty()) {
        write_features(sim.holdout, FeatureLayout::Dense, out / "holdout_features.csv");
        write_gold(sim.holdout, out / "holdout_gold.csv");
    }
    log << "simulate: " << sim.dataset.num_items() << " items, " << sim.dataset.annotations().size()
        << " annotations, " << sim.holdout.size() << " held-out items\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
    const auto& settings = config.evaluate;
    const auto& gold_path = require_input(settings.gold, "gold labels");
    if (settings.predictions.empty() || settings.predictions.size() > 2)
        throw ValidationError("evaluate: expected one or two prediction files, got " +
                              std::to_string(settings.predictions.size()));
    for (const auto& p : settings.predictions) require_input(p, "predictions");

    std::vector<std::string> ids;
    std::vector<Label> gold;
    {
        text::LineReader reader(gold_path);
        std::string line;
        if (!reader.next(line)) throw ParseError(reader.source(), 1, "empty gold file");
        const char delim = text::detect_delimiter(line);
        while (reader.next(line)) {
            if (line.empty()) continue;
            const auto fields = text::split(line, delim);
            long long raw = 0;
            std::optional<Label> label;
            if (fields.size() == 2 && text::parse_int64(text::trim(fields[1]), raw)) label = label_from_int(raw);
            if (!label) throw ParseError(reader.source(), reader.row(), "expected item_id,label with label in {-1,0,1}");
            ids.emplace_back(text::trim(fields[0]));
            gold.push_back(*label);
        }
    }
    if (gold.empty()) throw ValidationError("gold file " + gold_path.string() + " has no rows");

    std::vector<std::vector<LabelDist>> aligned;
    std::vector<EvalReport> reports;
    ordered_json report;
    report["n_items"] = gold.size();
    report["models"] = ordered_json::array();
    for (const auto& path : settings.predictions) {
        std::unordered_map<std::string, LabelDist> by_id;
        for (auto& [id, dist] : read_probability_dump(path)) by_id.emplace(std::move(id), dist);
        std::vector<LabelDist> probs;
        probs.reserve(ids.size());
        for (const auto& id : ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) throw ValidationError(path.string() + " has no prediction for item " + id);
            probs.push_back(it->second);
        }
        reports.push_back(evaluate(probs, gold));
        aligned.push_back(std::move(probs));
        ordered_json entry;
        entry["source"] = path.filename().string();
        entry["avg_f1"] = reports.back().avg_f1;
        entry["log_loss"] = reports.back().log_loss;
        report["models"].push_back(entry);
    }

    if (reports.size() == 2) {
        const auto predictions = [](const std::vector<LabelDist>& probs) {
            std::vector<Label> labels;
            labels.reserve(probs.size());
            for (const auto& p : probs) labels.push_back(argmax_label(p));
            return labels;
        };
        const auto pred_a = predictions(aligned[0]);
        const auto pred_b = predictions(aligned[1]);
        const auto boot = bootstrap_f1_diff(pred_a, pred_b, gold, settings.bootstrap_iterations, config.seed);
        const auto mw = mann_whitney_u(reports[0].per_item_losses, reports[1].per_item_losses);

        ordered_json cmp;
        cmp["bootstrap_f1_diff"] = {{"iterations", settings.bootstrap_iterations},
                                    {"seed", config.seed},
                                    {"observed_diff", boot.observed_diff},
                                    {"mean_diff", boot.mean_diff},
                                    {"ci_low", boot.ci_low},
                                    {"ci_high", boot.ci_high},
                                    {"significant", boot.significant}};
        cmp["mann_whitney_log_loss"] = {{"u", mw.u}, {"p_value", mw.p_value}, {"exact", mw.exact}};
        report["comparison"] = cmp;
    }

    prepare_output(config.out);
    write_json(report, config.out / "report.json");
    log << "evaluate: " << gold.size() << " items";
    for (const auto& r : reports) log << ", avg F1 " << text::format_double(r.avg_f1) << " log-loss "
                                      << text::format_double(r.log_loss);
    log << '\n';
}

void cmd_aggregate(const RunConfig& config, std::ostream& log) {
    const auto data = load_training_data(config);
    const auto& out = config.out;
    prepare_output(out);

    auto table = text::open_output(out / "agreement.csv");
    table << "scope,agreement,n_items,votes_file\n";
    const auto emit = [&](const std::optional<std::string>& scope, const std::string& file) {
        const auto votes = per_context_labels(data, scope);
        write_votes(votes, out / file);
        table << (scope ? *scope : std::string("ALL")) << ','
              << text::format_double(agreement(data, scope)) << ',' << votes.size() << ',' << file << '\n';
    };
    for (std::size_t c = 0; c < data.contexts().size(); ++c)
        emit(data.contexts().name(c), scope_file_name(c));
    emit(std::nullopt, "votes_all.csv");
    if (!table) throw IoError("write failed: " + (out / "agreement.csv").string());
    log << "aggregate: " << data.contexts().size() + 1 << " scopes\n";
}

void cmd_featurize(const RunConfig& config, std::ostream& log) {
    const auto& settings = config.featurize;
    const auto docs = read_corpus(require_input(settings.corpus, "corpus"));
    std::optional<std::vector<std::pair<std::string, std::string>>> holdout;
    if (settings.holdout_corpus) holdout = read_corpus(require_input(settings.holdout_corpus, "held-out corpus"));

    std::vector<std::string> bodies;
    bodies.reserve(docs.size());
    for (const auto& d : docs) bodies.push_back(d.second);
    const auto vocab = build_vocabulary(bodies, settings.ngrams);
    if (vocab.empty())
        log << "warning: no n-gram reaches min_count " << settings.ngrams.min_count
            << "; every feature vector is empty\n";

    const auto& out = config.out;
    prepare_output(out);
    write_vocabulary(vocab, out / "vocabulary.tsv");
    write_features(featurize_corpus(vocab, docs), FeatureLayout::Sparse, out / "features.csv");
    if (holdout)
        write_features(featurize_corpus(vocab, *holdout), FeatureLayout::Sparse, out / "holdout_features.csv");
    log << "featurize: " << docs.size() << " documents, " << vocab.size() << " n-grams\n";
}

}  // namespace constance::cli
