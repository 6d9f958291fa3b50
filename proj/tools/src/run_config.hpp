#pragma once

// Parsed form of the JSON run file shared by every subcommand. Top-level keys:
// seed, out, data, fit, classifier, ablate, simulate, evaluate, featurize.
// Relative paths resolve against the directory holding the run file.

#include <constance/classifier.hpp>
#include <constance/em.hpp>
#include <constance/featurizer.hpp>
#include <constance/simulator.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace constance::cli {

namespace fs = std::filesystem;

struct DataPaths {
    std::optional<fs::path> annotations;
    std::optional<fs::path> features;
};

struct FitSettings {
    FitConfig em;
    SoftmaxOptions classifier;
    // Held-out features to score with the fitted classifier.
    std::optional<fs::path> predict;
};

struct AblateSettings {
    std::optional<int> variant;
    std::optional<std::string> context;
    LabelDist label_prior = kAblationLabelPrior;
};

struct SimulateSettings {
    RandomSpecOptions options;
    // Matrix export whose gamma/alpha blocks replace the random ones.
    std::optional<fs::path> truth;
};

struct EvaluateSettings {
    std::optional<fs::path> gold;
    std::vector<fs::path> predictions;
    std::size_t bootstrap_iterations = 1000;
};

struct FeaturizeSettings {
    std::optional<fs::path> corpus;
    std::optional<fs::path> holdout_corpus;
    NgramConfig ngrams;
};

struct RunConfig {
    std::uint64_t seed = 0;
    fs::path out = "constance-out";
    DataPaths data;
    FitSettings fit;
    AblateSettings ablate;
    SimulateSettings simulate;
    EvaluateSettings evaluate;
    FeaturizeSettings featurize;
};

// Throws ValidationError on malformed JSON, unknown keys or wrongly typed values.
RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& path);

}  // namespace constance::cli
