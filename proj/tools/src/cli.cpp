#include "cli.hpp"

#include "commands.hpp"

#include <constance/errors.hpp>

#include <CLI11.hpp>

#include <functional>
#include <ostream>

namespace constance::cli {

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int variant = 0;
    std::string context;
    std::string annotations;
    std::string features;
    std::string predict;
    std::string gold;
    std::vector<std::string> predictions;
    std::string corpus;
};

using Command = std::function<void(const RunConfig&, std::ostream&)>;

void add_common(CLI::App& sub, Flags& f) {
    sub.add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
    sub.add_option("--seed", f.seed, "RNG seed")->envname(kSeedEnv);
    sub.add_option("--out", f.out, "output directory")->envname(kOutEnv);
}

void add_data(CLI::App& sub, Flags& f) {
    sub.add_option("--annotations", f.annotations, "item_id,context_id,annotator_id,label file");
    sub.add_option("--features", f.features, "dense or sparse feature file");
}

RunConfig resolve(const CLI::App& sub, const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    const auto given = [&](const char* name) {
        const auto* opt = sub.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--seed")) c.seed = f.seed;
    if (given("--out")) c.out = f.out;
    if (given("--annotations")) c.data.annotations = f.annotations;
    if (given("--features")) c.data.features = f.features;
    if (given("--predict")) c.fit.predict = f.predict;
    if (given("--variant")) c.ablate.variant = f.variant;
    if (given("--context")) c.ablate.context = f.context;
    if (given("--gold")) c.evaluate.gold = f.gold;
    if (given("--predictions")) c.evaluate.predictions.assign(f.predictions.begin(), f.predictions.end());
    if (given("--corpus")) c.featurize.corpus = f.corpus;
    return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aggregates crowdsourced labels collected under several annotation contexts"};
    app.name(args.empty() ? "constance" : args.front());
    app.require_subcommand(1);
    Flags f;
    std::vector<std::pair<CLI::App*, Command>> commands;

    auto* fit = app.add_subcommand("fit", "fit the full model");
    add_common(*fit, f);
    add_data(*fit, f);
    fit->add_option("--predict", f.predict, "held-out features to score with the fitted classifier");
    commands.emplace_back(fit, cmd_fit);

    auto* ablate = app.add_subcommand("ablate", "fit an ablated model");
    add_common(*ablate, f);
    add_data(*ablate, f);
    ablate->add_option("--predict", f.predict, "held-out features to score with the fitted classifier");
    ablate->add_option("--variant", f.variant, "1: one context, 2: mask contexts, 3: mask annotators")
        ->check(CLI::Range(1, 3));
    ablate->add_option("--context", f.context, "context kept by variant 1");
    commands.emplace_back(ablate, cmd_ablate);

    auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset with known noise");
    add_common(*simulate, f);
    commands.emplace_back(simulate, cmd_simulate);

    auto* evaluate = app.add_subcommand("evaluate", "score probability dumps against gold labels");
    add_common(*evaluate, f);
    evaluate->add_option("--gold", f.gold, "item_id,label file");
    evaluate->add_option("--predictions", f.predictions, "one or two item_id,p_neg1,p_0,p_1 files")
        ->expected(1, 2);
    commands.emplace_back(evaluate, cmd_evaluate);

    auto* aggregate = app.add_subcommand("aggregate", "majority votes and agreement per context");
    add_common(*aggregate, f);
    add_data(*aggregate, f);
    commands.emplace_back(aggregate, cmd_aggregate);

    auto* featurize = app.add_subcommand("featurize", "n-gram tf-idf features from raw text");
    add_common(*featurize, f);
    featurize->add_option("--corpus", f.corpus, "item_id,text file");
    commands.emplace_back(featurize, cmd_featurize);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto chosen = app.get_subcommands();
        out << (chosen.empty() ? app.help() : chosen.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        err << app.get_name() << ": " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    for (const auto& [sub, cmd] : commands) {
        if (!sub->parsed()) continue;
        try {
            cmd(resolve(*sub, f), err);
            return 0;
        } catch (const Error& e) {
            err << app.get_name() << " " << sub->get_name() << ": " << e.what() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err << app.get_name() << " " << sub->get_name() << ": unexpected error: " << e.what() << '\n';
            return 1;
        }
    }
    return 2;
}

}  // namespace constance::cli
