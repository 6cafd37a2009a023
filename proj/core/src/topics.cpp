#include "ironyprof/topics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::topics {

TopicModel::TopicModel(std::size_t num_topics, double alpha, double beta,
                       std::vector<std::string> vocabulary)
    : num_topics_(num_topics),
      alpha_(alpha),
      beta_(beta),
      vocabulary_(std::move(vocabulary)),
      word_topic_(num_topics * vocabulary_.size(), 0),
      topic_totals_(num_topics, 0) {
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    index_.emplace(vocabulary_[i], static_cast<std::uint32_t>(i));
  }
}

std::optional<std::uint32_t> TopicModel::word_id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> TopicModel::encode(std::span<const std::string> tokens) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = word_id(t)) ids.push_back(*id);
  }
  return ids;
}

std::uint64_t TopicModel::total_tokens() const {
  std::uint64_t total = 0;
  for (auto t : topic_totals_) total += t;
  return total;
}

double TopicModel::phi(std::size_t topic, std::size_t word) const {
  const double v = static_cast<double>(vocabulary_.size());
  return (static_cast<double>(count(topic, word)) + beta_) /
         (static_cast<double>(topic_totals_[topic]) + v * beta_);
}

std::vector<std::string> TopicModel::top_words(std::size_t topic, std::size_t n) const {
  std::vector<std::size_t> ids(vocabulary_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::stable_sort(ids.begin(), ids.end(),
                   [&](std::size_t a, std::size_t b) { return count(topic, a) > count(topic, b); });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, ids.size()); ++i) out.push_back(vocabulary_[ids[i]]);
  return out;
}

std::string TopicModel::to_json() const {
  nlohmann::ordered_json j;
  j["num_topics"] = num_topics_;
  j["alpha"] = alpha_;
  j["beta"] = beta_;
  j["seed"] = seed;
  j["iterations"] = iterations;
  j["vocabulary"] = vocabulary_;
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < num_topics_; ++k) {
    rows.push_back(std::vector<std::uint64_t>(
        word_topic_.begin() + static_cast<std::ptrdiff_t>(k * vocabulary_.size()),
        word_topic_.begin() + static_cast<std::ptrdiff_t>((k + 1) * vocabulary_.size())));
  }
  j["word_topic_counts"] = std::move(rows);
  j["topic_totals"] = topic_totals_;
  return j.dump();
}

TopicModel TopicModel::from_json(std::string_view json) {
  try {
    auto j = nlohmann::json::parse(json);
    TopicModel m(j.at("num_topics").get<std::size_t>(), j.at("alpha").get<double>(),
                 j.at("beta").get<double>(), j.at("vocabulary").get<std::vector<std::string>>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<std::size_t>();
    const auto& rows = j.at("word_topic_counts");
    if (rows.size() != m.num_topics_) throw Error(ErrorCode::CorruptArtifact, "topic row count");
    for (std::size_t k = 0; k < m.num_topics_; ++k) {
      auto row = rows[k].get<std::vector<std::uint64_t>>();
      if (row.size() != m.vocab_size()) throw Error(ErrorCode::CorruptArtifact, "topic row width");
      std::copy(row.begin(), row.end(),
                m.word_topic_.begin() + static_cast<std::ptrdiff_t>(k * m.vocab_size()));
    }
    m.topic_totals_ = j.at("topic_totals").get<std::vector<std::uint64_t>>();
    if (m.topic_totals_.size() != m.num_topics_) {
      throw Error(ErrorCode::CorruptArtifact, "topic totals length");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, std::string("topic model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Gibbs sampling

namespace {

std::vector<std::string> build_vocabulary(const std::vector<TokenDoc>& docs, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d) ++counts[t];
  }
  std::vector<std::string> vocab;
  for (const auto& [token, n] : counts) {
    if (n >= std::max<std::size_t>(min_count, 1)) vocab.push_back(token);
  }
  return vocab;
}

}  // namespace

TopicModel fit_lda(const std::vector<TokenDoc>& docs, const LdaOptions& options) {
  const std::size_t k_topics = options.num_topics;
  if (k_topics < 2) throw Error(ErrorCode::InvalidArgument, "LDA needs K >= 2");
  std::vector<std::string> vocab = build_vocabulary(docs, options.min_count);
  if (vocab.empty()) throw Error(ErrorCode::EmptyCorpus, "no tokens survive vocabulary filtering");
  if (vocab.size() < k_topics) {
    throw Error(ErrorCode::DegenerateVocab, "vocabulary of " + std::to_string(vocab.size()) +
                                                " words is smaller than K = " +
                                                std::to_string(k_topics));
  }
  const double alpha = options.alpha.value_or(50.0 / static_cast<double>(k_topics));
  const double beta = options.beta;
  TopicModel model(k_topics, alpha, beta, std::move(vocab));
  model.seed = options.seed;
  model.iterations = options.iterations;
  const std::size_t v_size = model.vocab_size();

  std::vector<std::vector<std::uint32_t>> words;
  words.reserve(docs.size());
  for (const auto& d : docs) {
    auto ids = model.encode(d);
    if (!ids.empty()) words.push_back(std::move(ids));
  }
  if (words.empty()) throw Error(ErrorCode::EmptyCorpus, "every document is empty");

  // Word-major count layout keeps a token's K counters contiguous.
  std::vector<std::uint32_t> n_wk(v_size * k_topics, 0);
  std::vector<std::uint32_t> n_k(k_topics, 0);
  std::vector<std::vector<std::uint32_t>> n_dk(words.size(), std::vector<std::uint32_t>(k_topics, 0));
  std::vector<std::vector<std::uint32_t>> z(words.size());

  Rng rng(options.seed);
  for (std::size_t d = 0; d < words.size(); ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      auto topic = static_cast<std::uint32_t>(rng.below(k_topics));
      z[d][i] = topic;
      ++n_wk[words[d][i] * k_topics + topic];
      ++n_k[topic];
      ++n_dk[d][topic];
    }
  }

  auto publish = [&] {
    auto& counts = model.mutable_counts();
    for (std::size_t w = 0; w < v_size; ++w) {
      for (std::size_t k = 0; k < k_topics; ++k) counts[k * v_size + w] = n_wk[w * k_topics + k];
    }
    auto& totals = model.mutable_totals();
    for (std::size_t k = 0; k < k_topics; ++k) totals[k] = n_k[k];
  };

  const double v_beta = static_cast<double>(v_size) * beta;
  std::vector<double> weights(k_topics);
  for (std::size_t sweep = 0; sweep < options.iterations; ++sweep) {
    for (std::size_t d = 0; d < words.size(); ++d) {
      auto& doc_counts = n_dk[d];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::uint32_t w = words[d][i];
        std::uint32_t topic = z[d][i];
        std::uint32_t* word_counts = &n_wk[w * k_topics];
        --word_counts[topic];
        --n_k[topic];
        --doc_counts[topic];
        double total = 0.0;
        for (std::size_t k = 0; k < k_topics; ++k) {
          weights[k] = (doc_counts[k] + alpha) * (word_counts[k] + beta) / (n_k[k] + v_beta);
          total += weights[k];
        }
        topic = static_cast<std::uint32_t>(rng.categorical(weights, total));
        z[d][i] = topic;
        ++word_counts[topic];
        ++n_k[topic];
        ++doc_counts[topic];
      }
    }
    if (options.on_sweep) {
      publish();
      options.on_sweep(sweep, model);
    }
  }
  publish();
  return model;
}

// ---------------------------------------------------------------------------
// Inference and perplexity

namespace {

TopicAssignment summarize(std::vector<double> theta) {
  TopicAssignment a;
  a.theta = std::move(theta);
  for (std::size_t k = 0; k < a.theta.size(); ++k) {
    if (k == 0 || a.theta[k] > a.max_probability) {
      a.max_probability = a.theta[k];
      a.argmax_topic = k;
    }
  }
  return a;
}

std::vector<double> infer_theta(const TopicModel& model, std::span<const std::uint32_t> ids,
                                std::size_t iterations, std::uint64_t seed) {
  const std::size_t k_topics = model.num_topics();
  const double alpha = model.alpha();
  std::vector<double> theta(k_topics, 1.0 / static_cast<double>(k_topics));
  if (ids.empty() || k_topics == 0) return theta;

  // phi for the document's words, token-major.
  std::vector<double> phi(ids.size() * k_topics);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t k = 0; k < k_topics; ++k) phi[i * k_topics + k] = model.phi(k, ids[i]);
  }
  Rng rng(seed);
  std::vector<std::size_t> z(ids.size());
  std::vector<double> n_dk(k_topics, 0.0);
  for (auto& t : z) {
    t = static_cast<std::size_t>(rng.below(k_topics));
    n_dk[t] += 1.0;
  }
  std::vector<double> weights(k_topics);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      n_dk[z[i]] -= 1.0;
      double total = 0.0;
      for (std::size_t k = 0; k < k_topics; ++k) {
        weights[k] = (n_dk[k] + alpha) * phi[i * k_topics + k];
        total += weights[k];
      }
      z[i] = rng.categorical(weights, total);
      n_dk[z[i]] += 1.0;
    }
  }
  const double denom = static_cast<double>(ids.size()) + static_cast<double>(k_topics) * alpha;
  for (std::size_t k = 0; k < k_topics; ++k) theta[k] = (n_dk[k] + alpha) / denom;
  return theta;
}

}  // namespace

TopicAssignment infer(const TopicModel& model, std::span<const std::string> doc,
                      std::size_t iterations, std::uint64_t seed) {
  auto ids = model.encode(doc);
  return summarize(infer_theta(model, ids, iterations, seed));
}

double perplexity(const TopicModel& model, const std::vector<TokenDoc>& docs,
                  const PerplexityOptions& options) {
  // Extended precision keeps exp(-mean log p) exact for degenerate models.
  std::vector<long double> log_lik(docs.size(), 0.0L);
  std::vector<std::size_t> counted(docs.size(), 0);
  const std::size_t k_topics = model.num_topics();
  parallel_for(docs.size(), [&](std::size_t d) {
    auto ids = model.encode(docs[d]);
    std::vector<std::uint32_t> fit_ids;
    std::vector<std::uint32_t> eval_ids;
    if (options.completion) {
      for (std::size_t i = 0; i < ids.size(); ++i) (i % 2 == 0 ? fit_ids : eval_ids).push_back(ids[i]);
    } else {
      fit_ids = ids;
      eval_ids = ids;
    }
    if (eval_ids.empty()) return;
    auto theta = infer_theta(model, fit_ids, options.infer_iterations, derive_seed(options.seed, d));
    long double ll = 0.0L;
    for (auto w : eval_ids) {
      long double p = 0.0L;
      for (std::size_t k = 0; k < k_topics; ++k) {
        p += static_cast<long double>(theta[k]) * model.phi(k, w);
      }
      ll += std::log(p);
    }
    log_lik[d] = ll;
    counted[d] = eval_ids.size();
  });
  long double total_ll = 0.0L;
  std::size_t total_n = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    total_ll += log_lik[d];
    total_n += counted[d];
  }
  if (total_n == 0) {
    throw Error(ErrorCode::NoInDomainTokens, "no evaluation tokens fall inside the model vocabulary");
  }
  return static_cast<double>(std::exp(-total_ll / static_cast<long double>(total_n)));
}

SelectKResult select_k(const std::vector<TokenDoc>& docs, const SelectKOptions& options) {
  if (options.k_min > options.k_max) {
    throw Error(ErrorCode::InvalidArgument, "k_min must not exceed k_max");
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].empty()) order.push_back(i);
  }
  if (order.size() < 2) throw Error(ErrorCode::EmptyCorpus, "K selection needs at least 2 documents");
  Rng rng(derive_seed(options.seed, "heldout"));
  rng.shuffle(order);
  auto held = static_cast<std::size_t>(
      std::ceil(options.held_out_fraction * static_cast<double>(order.size())));
  held = std::clamp<std::size_t>(held, 1, order.size() - 1);
  std::vector<TokenDoc> held_docs;
  std::vector<TokenDoc> train_docs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < held ? held_docs : train_docs).push_back(docs[order[i]]);
  }

  const std::size_t n_k = options.k_max - options.k_min + 1;
  SelectKResult result;
  result.perplexities.resize(n_k);
  parallel_for(n_k, [&](std::size_t i) {
    const std::size_t k = options.k_min + i;
    LdaOptions lda;
    lda.num_topics = k;
    lda.alpha = options.alpha_numerator / static_cast<double>(k);
    lda.beta = options.beta;
    lda.iterations = options.iterations;
    lda.min_count = options.min_count;
    lda.seed = derive_seed(options.seed, "fit");
    TopicModel model = fit_lda(train_docs, lda);
    PerplexityOptions po;
    po.infer_iterations = options.infer_iterations;
    po.seed = derive_seed(options.seed, "perplexity");
    po.completion = true;
    result.perplexities[i] = {k, perplexity(model, held_docs, po)};
  });
  result.best_k = result.perplexities.front().first;
  double best = result.perplexities.front().second;
  for (const auto& [k, p] : result.perplexities) {
    if (p < best) {
      best = p;
      result.best_k = k;
    }
  }
  return result;
}

std::size_t dominant_topic(std::span<const std::size_t> argmax_topics) {
  if (argmax_topics.empty()) throw Error(ErrorCode::InvalidArgument, "dominant topic of no tweets");
  std::map<std::size_t, std::size_t> counts;
  for (auto t : argmax_topics) ++counts[t];
  std::size_t best = counts.begin()->first;
  std::size_t best_n = 0;
  for (const auto& [topic, n] : counts) {
    if (n > best_n) {
      best = topic;
      best_n = n;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t count_distinct_rows(const Matrix& m) {
  std::vector<std::size_t> idx(m.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = m.row(a);
    auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (less(idx[i - 1], idx[i])) ++distinct;
  }
  return distinct;
}

}  // namespace

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point) {
  std::size_t best = 0;
  double best_d = 0.0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), point);
    if (c == 0 || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

ClusterAssignment kmeans(const Matrix& points, const KMeansOptions& options) {
  const std::size_t k = options.k;
  const std::size_t n = points.rows();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k-means needs k >= 1");
  if (n < k || count_distinct_rows(points) < k) {
    throw Error(ErrorCode::TooFewPoints, "k-means with k = " + std::to_string(k) + " needs at least " +
                                             std::to_string(k) + " distinct points");
  }

  // k-means++ seeding.
  Rng rng(options.seed);
  ClusterAssignment out;
  out.centroids = Matrix(k, points.cols());
  std::vector<double> d2(n, 0.0);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  std::copy(points.row(first).begin(), points.row(first).end(), out.centroids.row(0).begin());
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), out.centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = rng.categorical(d2, total);
    std::copy(points.row(pick).begin(), points.row(pick).end(), out.centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), out.centroids.row(c)));
    }
  }

  // Lloyd iterations.
  out.labels.assign(n, 0);
  std::vector<std::size_t> previous;
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iters, 1); ++iter) {
    parallel_for(n, [&](std::size_t i) {
      out.labels[i] = nearest_centroid(out.centroids, points.row(i));
      dist[i] = squared_distance(points.row(i), out.centroids.row(out.labels[i]));
    });
    out.inertia = 0.0;
    for (double v : dist) out.inertia += v;
    out.iterations = iter + 1;
    if (options.on_iteration) options.on_iteration(iter, out.inertia);
    if (out.labels == previous) break;
    previous = out.labels;

    Matrix sums(k, points.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(out.labels[i]);
      auto src = points.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      ++sizes[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;  // an empty cluster keeps its centroid
      auto dst = out.centroids.row(c);
      auto src = sums.row(c);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] / static_cast<double>(sizes[c]);
    }
  }
  return out;
}

}  // namespace ironyprof::topics
