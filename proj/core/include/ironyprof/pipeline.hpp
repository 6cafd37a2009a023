#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ironyprof/eval.hpp"
#include "ironyprof/extractors.hpp"
#include "ironyprof/learn.hpp"

namespace ironyprof::pipeline {

namespace fs = std::filesystem;

/// Everything a run depends on. `jobs` only affects speed and is left out of
/// the hash.
struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t tweet_slots = 200;
  std::size_t folds = 5;
  bool stratified_folds = false;
  double train_ratio = 0.7;
  unsigned jobs = 1;
  /// Feature blocks to assemble; empty means every registry feature.
  std::vector<std::string> features;
  features::ExtractorOptions extractor;

  /// Stable `key=value` lines covering every field that affects results.
  std::string canonical() const;
  /// 16-hex-digit hash of canonical().
  std::string hash() const;
};

/// Paths written by featurize inside its output directory.
struct FeatureArtifacts {
  fs::path train_matrix;
  fs::path test_matrix;
  fs::path extractors;
  fs::path manifest;
  fs::path split;
  fs::path perplexity;

  static FeatureArtifacts in(const fs::path& dir);
};

struct IngestSummary {
  std::size_t authors = 0;
  std::size_t ironic = 0;
  std::size_t not_ironic = 0;
  std::size_t unlabeled = 0;
};

IngestSummary ingest(const fs::path& xml_dir, const std::optional<fs::path>& truth, const fs::path& out_jsonl);

/// Splits the corpus, fits extractors on the training authors only, and
/// writes train/test matrices, the fitted extractors, the split, a per-K
/// perplexity CSV and a manifest of every feature block.
FeatureArtifacts featurize(const fs::path& corpus_jsonl, const RunConfig& config, const fs::path& out_dir);

struct SelectionOutcome {
  learn::SelectionReport topic;
  learn::SelectionReport lexical;
  learn::SelectionReport sentiment;
  /// Union of the per-category best subsets in canonical order.
  std::vector<std::string> selected;
};

/// Runs the exhaustive topic/lexical searches and the stagewise sentiment
/// search on the training matrix; writes three CSVs and selection.json.
SelectionOutcome select(const fs::path& train_matrix, const RunConfig& config, const fs::path& out_dir);

/// Reads the "selected" list of a selection.json.
std::vector<std::string> read_selection(const fs::path& selection_json);

enum class GridFamily { RandomForest, LogisticRegression, LinearSvm };

/// Grid search on the training matrix restricted to `features` (all
/// columns when empty). Writes grid_<family>.csv and best_params.json.
learn::GridResult grid_search(const fs::path& train_matrix, GridFamily family,
                              const std::vector<std::string>& features, const RunConfig& config,
                              const fs::path& out_dir);

/// Model spec stored in a best_params.json.
learn::ModelSpec read_params(const fs::path& params_json);
void write_params(const fs::path& params_json, const learn::ModelSpec& spec, const RunConfig& config);

/// baseline-lr / baseline-rf use the TF-IDF block only; final-rf, final-lr
/// and final-svm use `features` (the default final set when empty).
enum class TrainTarget { BaselineLr, BaselineRf, FinalRf, FinalLr, FinalSvm };
TrainTarget parse_target(std::string_view text);
std::string_view to_string(TrainTarget target);

/// Default spec of a target; final-rf uses the selection classifier
/// parameters unless `params` overrides them.
learn::ModelSpec default_spec(TrainTarget target, const RunConfig& config);

learn::Classifier train(const fs::path& train_matrix, TrainTarget target, const std::vector<std::string>& features,
                        const std::optional<learn::ModelSpec>& params, const RunConfig& config,
                        const fs::path& out_model);

/// Scores a labelled matrix; writes metrics.json, roc.csv, confusion.csv
/// and predictions.csv.
eval::Metrics evaluate(const fs::path& model, const fs::path& test_matrix, const fs::path& out_dir);

/// Predicts authors of a matrix, or of a corpus featurized with saved
/// extractors. Writes `author_id,label,score` CSV.
learn::Prediction predict_matrix_file(const fs::path& model, const fs::path& matrix, const fs::path& out_csv);
learn::Prediction predict_corpus(const fs::path& model, const fs::path& extractors, const fs::path& corpus_jsonl,
                                 const fs::path& out_csv);

/// Writes descriptive reports: top TF-IDF terms per label, sparse TF-IDF
/// export, 2-PC projection of the TF-IDF rows, topic top words.
void report(const fs::path& features_dir, const fs::path& corpus_jsonl, const RunConfig& config,
            const fs::path& out_dir);

struct PipelineResult {
  FeatureArtifacts features;
  SelectionOutcome selection;
  eval::Metrics metrics;
};

/// featurize -> select -> train final-rf on the selected features ->
/// evaluate, all under `out_dir`.
PipelineResult run_pipeline(const fs::path& corpus_jsonl, const RunConfig& config, const fs::path& out_dir);

}  // namespace ironyprof::pipeline
