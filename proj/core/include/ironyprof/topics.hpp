#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ironyprof/matrix.hpp"

namespace ironyprof::topics {

using TokenDoc = std::vector<std::string>;

/// Fitted LDA state: word-topic counts plus the Dirichlet priors.
class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(std::size_t num_topics, double alpha, double beta, std::vector<std::string> vocabulary);

  std::size_t num_topics() const noexcept { return num_topics_; }
  std::size_t vocab_size() const noexcept { return vocabulary_.size(); }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

  std::optional<std::uint32_t> word_id(const std::string& token) const;
  /// Token ids of the in-vocabulary tokens, in order.
  std::vector<std::uint32_t> encode(std::span<const std::string> tokens) const;

  std::uint64_t count(std::size_t topic, std::size_t word) const {
    return word_topic_[topic * vocabulary_.size() + word];
  }
  std::uint64_t topic_total(std::size_t topic) const { return topic_totals_[topic]; }
  std::uint64_t total_tokens() const;

  /// Smoothed topic-word probability (count + beta) / (total + V * beta).
  double phi(std::size_t topic, std::size_t word) const;

  /// Top-n words of a topic by count, ties by word id.
  std::vector<std::string> top_words(std::size_t topic, std::size_t n) const;

  std::uint64_t seed = 0;
  std::size_t iterations = 0;

  std::string to_json() const;
  static TopicModel from_json(std::string_view json);

  /// Raw count tables; the sampler and artifact loader write through these.
  std::vector<std::uint64_t>& mutable_counts() noexcept { return word_topic_; }
  std::vector<std::uint64_t>& mutable_totals() noexcept { return topic_totals_; }

  bool operator==(const TopicModel&) const = default;

 private:
  std::size_t num_topics_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::uint64_t> word_topic_;  // K x V, row-major
  std::vector<std::uint64_t> topic_totals_;
};

struct LdaOptions {
  std::size_t num_topics = 5;
  /// Defaults to 50 / K when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
  /// Tokens seen fewer times than this across the docs are dropped.
  std::size_t min_count = 1;
  /// Called after every full sweep with the current model.
  std::function<void(std::size_t sweep, const TopicModel&)> on_sweep;
};

/// Collapsed Gibbs sampling from a seeded random initialization.
TopicModel fit_lda(const std::vector<TokenDoc>& docs, const LdaOptions& options);

struct TopicAssignment {
  std::vector<double> theta;
  std::size_t argmax_topic = 0;
  double max_probability = 0.0;
};

/// Gibbs inference of one document's topic mixture with word-topic counts
/// held fixed. Empty or all-OOV documents get the uniform mixture.
TopicAssignment infer(const TopicModel& model, std::span<const std::string> doc,
                      std::size_t iterations, std::uint64_t seed);

struct PerplexityOptions {
  std::size_t infer_iterations = 50;
  std::uint64_t seed = 0;
  /// Document completion: infer the mixture from even-position tokens and
  /// score only odd-position tokens, so the mixture never sees the words it
  /// is evaluated on.
  bool completion = false;
};

/// exp(-sum log p(w|d) / N) with p(w|d) = sum_k theta(d,k) phi(k,w); OOV
/// tokens are skipped.
double perplexity(const TopicModel& model, const std::vector<TokenDoc>& docs,
                  const PerplexityOptions& options = {});

struct SelectKOptions {
  std::size_t k_min = 5;
  std::size_t k_max = 14;
  double held_out_fraction = 0.1;
  /// alpha = alpha_numerator / K.
  double alpha_numerator = 50.0;
  double beta = 0.01;
  std::size_t iterations = 200;
  std::size_t infer_iterations = 50;
  std::size_t min_count = 1;
  std::uint64_t seed = 0;
};

struct SelectKResult {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, double>> perplexities;
};

/// Fits one model per K on a seeded train shard and picks the K with the
/// lowest held-out perplexity (ties to the smaller K).
SelectKResult select_k(const std::vector<TokenDoc>& docs, const SelectKOptions& options);

/// Mode of per-tweet argmax topics, ties to the lowest index.
std::size_t dominant_topic(std::span<const std::size_t> argmax_topics);

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

struct KMeansOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  /// Called after each assignment step with the inertia at that point.
  std::function<void(std::size_t iteration, double inertia)> on_iteration;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing. Requires at least k distinct rows.
ClusterAssignment kmeans(const Matrix& points, const KMeansOptions& options);

/// Index of the nearest centroid (squared Euclidean, ties to lowest index).
std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point);

}  // namespace ironyprof::topics
