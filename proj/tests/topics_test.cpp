#include "ironyprof/topics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "ironyprof/random.hpp"
#include "test_support.hpp"

namespace ironyprof::topics {
namespace {

// Docs drawn from one of two disjoint 10-word vocabularies.
std::vector<TokenDoc> two_topic_docs(std::size_t per_topic, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenDoc> docs;
  for (std::size_t d = 0; d < 2 * per_topic; ++d) {
    const char prefix = d % 2 == 0 ? 'a' : 'b';
    TokenDoc doc;
    for (std::size_t i = 0; i < len; ++i) {
      doc.push_back(std::string(1, prefix) + std::to_string(rng.below(10)));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

TEST(Lda, RecoversTwoDisjointTopics) {
  LdaOptions opt;
  opt.num_topics = 2;
  opt.alpha = 0.1;
  opt.iterations = 100;
  opt.seed = 3;
  auto model = fit_lda(two_topic_docs(40, 30, 1), opt);
  std::set<char> owners;
  for (std::size_t k = 0; k < 2; ++k) {
    auto top = model.top_words(k, 10);
    ASSERT_EQ(top.size(), 10u);
    std::map<char, int> votes;
    for (const auto& w : top) ++votes[w[0]];
    auto best = std::max_element(votes.begin(), votes.end(),
                                 [](auto& x, auto& y) { return x.second < y.second; });
    EXPECT_GE(best->second, 8) << "topic " << k;
    owners.insert(best->first);
  }
  EXPECT_EQ(owners.size(), 2u);
}

TEST(Lda, CountsAreConservedEverySweep) {
  auto docs = two_topic_docs(10, 12, 2);
  std::uint64_t n_tokens = 0;
  for (const auto& d : docs) n_tokens += d.size();
  LdaOptions opt;
  opt.num_topics = 3;
  opt.iterations = 15;
  std::size_t sweeps = 0;
  opt.on_sweep = [&](std::size_t, const TopicModel& m) {
    ++sweeps;
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < m.num_topics(); ++k) {
      std::uint64_t row = 0;
      for (std::size_t w = 0; w < m.vocab_size(); ++w) row += m.count(k, w);
      EXPECT_EQ(row, m.topic_total(k));
      total += row;
    }
    EXPECT_EQ(total, n_tokens);
  };
  fit_lda(docs, opt);
  EXPECT_EQ(sweeps, 15u);
}

TEST(Lda, SeededFitIsDeterministic) {
  auto docs = two_topic_docs(10, 12, 4);
  LdaOptions opt;
  opt.num_topics = 3;
  opt.iterations = 20;
  opt.seed = 11;
  EXPECT_EQ(fit_lda(docs, opt), fit_lda(docs, opt));
}

TEST(Lda, MinCountPrunesRareWords) {
  std::vector<TokenDoc> docs = {{"x", "x", "y"}, {"x", "z", "z"}};
  LdaOptions opt;
  opt.num_topics = 2;
  opt.iterations = 5;
  opt.min_count = 2;
  auto model = fit_lda(docs, opt);
  EXPECT_EQ(model.vocabulary(), (std::vector<std::string>{"x", "z"}));
}

TEST(Lda, JsonRoundTrip) {
  LdaOptions opt;
  opt.num_topics = 2;
  opt.iterations = 5;
  auto model = fit_lda(two_topic_docs(5, 8, 5), opt);
  EXPECT_EQ(TopicModel::from_json(model.to_json()), model);
}

TEST(Perplexity, UniformModelEqualsVocabSize) {
  std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
  TopicModel model(3, 1.0, 0.5, vocab);
  std::vector<TokenDoc> docs = {{"a", "b", "c"}, {"g", "g", "oov"}};
  EXPECT_NEAR(perplexity(model, docs), 7.0, 1e-9);
}

TEST(Perplexity, FittedModelIsAtLeastOne) {
  auto docs = two_topic_docs(10, 20, 6);
  LdaOptions opt;
  opt.num_topics = 2;
  opt.alpha = 0.1;
  opt.iterations = 50;
  auto model = fit_lda(docs, opt);
  double p = perplexity(model, docs);
  EXPECT_GE(p, 1.0);
  EXPECT_LT(p, 20.0);
  PerplexityOptions completion;
  completion.completion = true;
  EXPECT_GE(perplexity(model, docs, completion), 1.0);
}

TEST(SelectK, ReportsEveryCandidate) {
  auto docs = two_topic_docs(20, 15, 7);
  SelectKOptions opt;
  opt.k_min = 2;
  opt.k_max = 4;
  opt.iterations = 20;
  opt.infer_iterations = 10;
  auto r = select_k(docs, opt);
  ASSERT_EQ(r.perplexities.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.perplexities[i].first, i + 2);
  EXPECT_GE(r.best_k, 2u);
  EXPECT_LE(r.best_k, 4u);
  auto best = std::min_element(r.perplexities.begin(), r.perplexities.end(),
                               [](auto& a, auto& b) { return a.second < b.second; });
  EXPECT_EQ(best->first, r.best_k);
}

TEST(SelectK, SingleCandidate) {
  auto docs = two_topic_docs(10, 10, 8);
  SelectKOptions opt;
  opt.k_min = opt.k_max = 3;
  opt.iterations = 5;
  opt.infer_iterations = 5;
  auto r = select_k(docs, opt);
  EXPECT_EQ(r.best_k, 3u);
  EXPECT_EQ(r.perplexities.size(), 1u);
}

TEST(Infer, OutOfVocabularyGivesUniform) {
  TopicModel model(4, 0.5, 0.01, {"a", "b"});
  std::vector<std::string> doc = {"zzz", "yyy"};
  auto t = infer(model, doc, 20, 1);
  ASSERT_EQ(t.theta.size(), 4u);
  for (double v : t.theta) EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_EQ(t.argmax_topic, 0u);
  EXPECT_DOUBLE_EQ(t.max_probability, 0.25);
  EXPECT_EQ(infer(model, {}, 20, 1).theta, t.theta);
}

TEST(Infer, ThetaIsADistribution) {
  LdaOptions opt;
  opt.num_topics = 2;
  opt.alpha = 0.1;
  opt.iterations = 50;
  auto model = fit_lda(two_topic_docs(20, 20, 9), opt);
  std::vector<std::string> doc = {"a1", "a2", "a3", "a1", "a5"};
  auto t = infer(model, doc, 30, 2);
  EXPECT_NEAR(std::accumulate(t.theta.begin(), t.theta.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(t.max_probability, *std::max_element(t.theta.begin(), t.theta.end()));
  EXPECT_GT(t.max_probability, 0.7);
}

TEST(DominantTopic, ModeWithLowestIndexTies) {
  std::vector<std::size_t> a = {2, 1, 2, 1, 0};
  EXPECT_EQ(dominant_topic(a), 1u);
  std::vector<std::size_t> b = {3, 3, 0};
  EXPECT_EQ(dominant_topic(b), 3u);
}

TEST(KMeans, TwoPairs) {
  Matrix pts(4, 2, std::vector<double>{0, 0, 0, 1, 10, 0, 10, 1});
  KMeansOptions opt;
  opt.k = 2;
  auto r = kmeans(pts, opt);
  EXPECT_EQ(r.labels[0], r.labels[1]);
  EXPECT_EQ(r.labels[2], r.labels[3]);
  EXPECT_NE(r.labels[0], r.labels[2]);
  EXPECT_NEAR(r.inertia, 1.0, 1e-12);
  auto c = r.centroids.row(r.labels[0]);
  EXPECT_NEAR(c[0], 0.0, 1e-12);
  EXPECT_NEAR(c[1], 0.5, 1e-12);
}

TEST(KMeans, SeparatedBlobsArePerfectlyRecovered) {
  Rng rng(5);
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  Matrix pts(90, 2);
  for (std::size_t i = 0; i < 90; ++i) {
    pts(i, 0) = centers[i / 30][0] + 0.5 * rng.normal();
    pts(i, 1) = centers[i / 30][1] + 0.5 * rng.normal();
  }
  KMeansOptions opt;
  opt.k = 3;
  opt.seed = 1;
  std::vector<double> inertia;
  opt.on_iteration = [&](std::size_t, double v) { inertia.push_back(v); };
  auto r = kmeans(pts, opt);
  std::set<std::size_t> seen;
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t i = g * 30; i < g * 30 + 30; ++i) EXPECT_EQ(r.labels[i], r.labels[g * 30]);
    seen.insert(r.labels[g * 30]);
  }
  EXPECT_EQ(seen.size(), 3u);
  for (std::size_t i = 1; i < inertia.size(); ++i) EXPECT_LE(inertia[i], inertia[i - 1] + 1e-9);
  for (std::size_t i = 0; i < 90; ++i) EXPECT_EQ(nearest_centroid(r.centroids, pts.row(i)), r.labels[i]);
}

TEST(KMeans, NeedsKDistinctRows) {
  Matrix pts(4, 1, std::vector<double>{1, 1, 2, 2});
  KMeansOptions opt;
  opt.k = 3;
  EXPECT_ERROR_CODE(kmeans(pts, opt), TooFewPoints);
}

TEST(KMeans, NearestCentroidTiesToLowest) {
  Matrix c(2, 1, std::vector<double>{-1, 1});
  std::vector<double> p = {0.0};
  EXPECT_EQ(nearest_centroid(c, p), 0u);
}

}  // namespace
}  // namespace ironyprof::topics
