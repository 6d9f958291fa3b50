#pragma once

#include "run_config.hpp"

#include <iosfwd>

namespace constance::cli {

// Each command writes its artifacts under config.out and progress notes to log.
// Module errors propagate as constance::Error.

// matrices.txt, posteriors.csv, loglik.txt, classifier.txt, fit.json and,
// with fit.predict set, predictions.csv for the held-out items.
void cmd_fit(const RunConfig& config, std::ostream& log);

// Same artifacts as cmd_fit, each prefixed with "ablation<variant>_".
//   1: keep one context, 2: mask contexts, 3: mask annotators.
void cmd_ablate(const RunConfig& config, std::ostream& log);

// annotations.csv, features.csv, gold.csv, truth.txt and, when held-out items
// are requested, holdout_features.csv and holdout_gold.csv.
void cmd_simulate(const RunConfig& config, std::ostream& log);

// report.json for one or two probability dumps scored against a gold file.
void cmd_evaluate(const RunConfig& config, std::ostream& log);

// agreement.csv with one row per context plus ALL, and a vote file per row.
void cmd_aggregate(const RunConfig& config, std::ostream& log);

// vocabulary.tsv and features.csv (sparse) from an item_id,text corpus.
void cmd_featurize(const RunConfig& config, std::ostream& log);

}  // namespace constance::cli
