#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ironyprof/corpus.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/lexical.hpp"
#include "ironyprof/matrix.hpp"
#include "ironyprof/sentiment.hpp"
#include "ironyprof/topics.hpp"

namespace ironyprof::features {

struct ExtractorOptions {
  std::uint64_t seed = 0;

  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> tag_lexicon_path;
  std::optional<std::filesystem::path> suffix_rules_path;
  /// Ingested second-analyzer scores; plain lexicon shares when unset.
  std::optional<std::filesystem::path> secondary_scores_path;
  sentiment::RuleConfig rules;

  std::size_t k_min = 5;
  std::size_t k_max = 14;
  std::size_t lda_iterations = 200;
  std::size_t infer_iterations = 30;
  std::size_t lda_min_count = 2;
  double lda_beta = 0.01;
  double lda_alpha_numerator = 50.0;
  /// Fit LDA on one concatenated document per author instead of per tweet.
  bool lda_per_user = false;

  lexical::VocabOptions vocab;
  std::size_t clusters = 5;
};

/// Per-author feature blocks keyed by feature name.
using AuthorFeatures = std::map<std::string, std::vector<double>, std::less<>>;

/// Everything fitted on the training authors: disagreement standardization,
/// the topic model, the TF-IDF vocabulary and the k-means centroids.
class FittedExtractors {
 public:
  FittedExtractors() = default;

  static FittedExtractors fit(const corpus::Corpus& train, const ExtractorOptions& options);

  bool fitted() const noexcept { return fitted_; }
  const ExtractorOptions& options() const noexcept { return options_; }
  std::size_t tweet_slots() const noexcept { return tweet_slots_; }
  Shape shape() const;

  const sentiment::DisagreementStats& disagreement_stats() const noexcept { return stats_; }
  const topics::TopicModel& topic_model() const noexcept { return lda_; }
  const topics::SelectKResult& k_report() const noexcept { return k_report_; }
  const lexical::Vocabulary& vocabulary() const noexcept { return vocab_; }
  const Matrix& centroids() const noexcept { return centroids_; }

  /// Computes the named features for one author (all when names is empty).
  AuthorFeatures extract(const corpus::AuthorRecord& author,
                         std::span<const std::string> names = {}) const;

  std::string to_json() const;
  static FittedExtractors from_json(std::string_view json);

  void save(const std::filesystem::path& path) const;
  static FittedExtractors load(const std::filesystem::path& path);

 private:
  void build_analyzers();

  bool fitted_ = false;
  ExtractorOptions options_;
  std::size_t tweet_slots_ = 0;
  sentiment::RulesAnalyzer rules_;
  sentiment::SecondaryAnalyzer secondary_;
  // Scores trigram windows when the ingested table has no window rows.
  sentiment::SecondaryAnalyzer window_fallback_;
  std::optional<lexical::PosTagger> tagger_;
  sentiment::DisagreementStats stats_;
  topics::TopicModel lda_;
  topics::SelectKResult k_report_;
  lexical::Vocabulary vocab_;
  Matrix centroids_;
};

/// Builds the feature matrix for every author of `corpus`, columns in the
/// order of `names`. Throws UnknownFeature / UnfittedExtractor /
/// NonFiniteFeature.
FeatureMatrix assemble(const corpus::Corpus& corpus, const FittedExtractors& extractors,
                       std::span<const std::string> names);

}  // namespace ironyprof::features
