#include "ironyprof/extractors.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/hash.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::features {

namespace {

using nlohmann::json;
using sentiment::Channel;
using sentiment::SentimentScores;

std::vector<std::string> slots_of(const corpus::AuthorRecord& author, std::size_t t) {
  std::vector<std::string> tweets(author.tweets.begin(),
                                  author.tweets.begin() + std::min(t, author.tweets.size()));
  tweets.resize(t);
  return tweets;
}

lexical::AuthorDoc author_doc(std::span<const std::string> tweets) {
  lexical::AuthorDoc doc;
  doc.reserve(tweets.size());
  for (const auto& t : tweets) doc.push_back(lexical::tokenize(t));
  return doc;
}

std::uint64_t author_seed(std::uint64_t root, std::string_view author_id) {
  return derive_seed(derive_seed(root, "infer"), fnv1a64(author_id));
}

json path_string(const std::optional<std::filesystem::path>& p) {
  if (!p) return nullptr;
  return p->string();
}

json rules_to_json(const sentiment::RuleConfig& r) {
  return {{"negation", r.negation},
          {"negation_scalar", r.negation_scalar},
          {"negation_window", r.negation_window},
          {"boosters", r.boosters},
          {"booster_increment", r.booster_increment},
          {"caps_emphasis", r.caps_emphasis},
          {"caps_increment", r.caps_increment},
          {"exclamation", r.exclamation},
          {"exclamation_increment", r.exclamation_increment},
          {"exclamation_cap", r.exclamation_cap},
          {"but_weighting", r.but_weighting},
          {"but_before", r.but_before},
          {"but_after", r.but_after},
          {"alpha", r.alpha}};
}

sentiment::RuleConfig rules_from_json(const json& j) {
  sentiment::RuleConfig r;
  j.at("negation").get_to(r.negation);
  j.at("negation_scalar").get_to(r.negation_scalar);
  j.at("negation_window").get_to(r.negation_window);
  j.at("boosters").get_to(r.boosters);
  j.at("booster_increment").get_to(r.booster_increment);
  j.at("caps_emphasis").get_to(r.caps_emphasis);
  j.at("caps_increment").get_to(r.caps_increment);
  j.at("exclamation").get_to(r.exclamation);
  j.at("exclamation_increment").get_to(r.exclamation_increment);
  j.at("exclamation_cap").get_to(r.exclamation_cap);
  j.at("but_weighting").get_to(r.but_weighting);
  j.at("but_before").get_to(r.but_before);
  j.at("but_after").get_to(r.but_after);
  j.at("alpha").get_to(r.alpha);
  return r;
}

json channel_stats_to_json(const std::array<sentiment::ChannelStats, 3>& stats) {
  json out = json::array();
  for (const auto& s : stats) out.push_back({s.mean, s.sd});
  return out;
}

std::array<sentiment::ChannelStats, 3> channel_stats_from_json(const json& j) {
  std::array<sentiment::ChannelStats, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = {j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>()};
  return out;
}

}  // namespace

Shape FittedExtractors::shape() const {
  return Shape{tweet_slots_, vocab_.size(), lexical::kTagCount};
}

void FittedExtractors::build_analyzers() {
  auto lexicon = options_.lexicon_path ? sentiment::Lexicon::load(*options_.lexicon_path)
                                       : sentiment::Lexicon::builtin();
  rules_ = sentiment::RulesAnalyzer(lexicon, options_.rules);
  window_fallback_ = sentiment::SecondaryAnalyzer::plain(lexicon);
  secondary_ = options_.secondary_scores_path
                   ? sentiment::SecondaryAnalyzer::ingested(
                         sentiment::ScoreTable::load(*options_.secondary_scores_path))
                   : sentiment::SecondaryAnalyzer::plain(lexicon);
  if (options_.tag_lexicon_path || options_.suffix_rules_path) {
    if (!options_.tag_lexicon_path || !options_.suffix_rules_path) {
      throw Error(ErrorCode::InvalidArgument, "tag lexicon and suffix rules must be given together");
    }
    tagger_ = lexical::PosTagger::load(*options_.tag_lexicon_path, *options_.suffix_rules_path);
  } else {
    tagger_ = lexical::PosTagger::builtin();
  }
}

FittedExtractors FittedExtractors::fit(const corpus::Corpus& train, const ExtractorOptions& options) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyCorpus, "no training authors");
  FittedExtractors fx;
  fx.options_ = options;
  fx.tweet_slots_ = train.tweet_slots();
  fx.build_analyzers();

  // Disagreement standardization over non-empty training tweets.
  std::vector<SentimentScores> first;
  std::vector<SentimentScores> second;
  for (const auto& author : train.authors()) {
    for (std::size_t i = 0; i < author.tweets.size(); ++i) {
      const auto& text = author.tweets[i];
      if (text.empty()) continue;
      first.push_back(fx.rules_.analyze(text));
      second.push_back(fx.secondary_.analyze(text, {author.author_id, i, std::nullopt}));
    }
  }
  if (first.empty()) throw Error(ErrorCode::EmptyCorpus, "training authors have no tweets");
  fx.stats_ = sentiment::DisagreementStats::fit(first, second);

  std::vector<lexical::AuthorDoc> docs;
  docs.reserve(train.size());
  for (const auto& author : train.authors()) docs.push_back(author_doc(author.tweets));

  std::vector<topics::TokenDoc> lda_docs;
  for (const auto& doc : docs) {
    if (options.lda_per_user) {
      topics::TokenDoc joined;
      for (const auto& t : doc) joined.insert(joined.end(), t.begin(), t.end());
      if (!joined.empty()) lda_docs.push_back(std::move(joined));
    } else {
      for (const auto& t : doc) {
        if (!t.empty()) lda_docs.push_back(t);
      }
    }
  }
  topics::SelectKOptions sk;
  sk.k_min = options.k_min;
  sk.k_max = options.k_max;
  sk.alpha_numerator = options.lda_alpha_numerator;
  sk.beta = options.lda_beta;
  sk.iterations = options.lda_iterations;
  sk.infer_iterations = options.infer_iterations;
  sk.min_count = options.lda_min_count;
  sk.seed = derive_seed(options.seed, "select_k");
  fx.k_report_ = topics::select_k(lda_docs, sk);

  topics::LdaOptions lo;
  lo.num_topics = fx.k_report_.best_k;
  lo.alpha = options.lda_alpha_numerator / static_cast<double>(lo.num_topics);
  lo.beta = options.lda_beta;
  lo.iterations = options.lda_iterations;
  lo.min_count = options.lda_min_count;
  lo.seed = derive_seed(options.seed, "lda");
  fx.lda_ = topics::fit_lda(lda_docs, lo);

  fx.vocab_ = lexical::build_vocab(docs, options.vocab);
  auto rows = lexical::tfidf(docs, fx.vocab_);
  auto dense = lexical::to_dense(rows, fx.vocab_.size());
  topics::KMeansOptions ko;
  ko.k = options.clusters;
  ko.seed = derive_seed(options.seed, "kmeans");
  fx.centroids_ = topics::kmeans(dense, ko).centroids;

  fx.fitted_ = true;
  return fx;
}

AuthorFeatures FittedExtractors::extract(const corpus::AuthorRecord& author,
                                         std::span<const std::string> names) const {
  if (!fitted_) throw Error(ErrorCode::UnfittedExtractor, "extractors have not been fitted");
  std::set<std::string, std::less<>> wanted;
  if (names.empty()) {
    for (const auto& f : registry()) wanted.insert(f.name);
  } else {
    for (const auto& n : names) wanted.insert(descriptor(n).name);
  }
  auto want = [&](std::string_view n) { return wanted.count(n) > 0; };
  auto want_any = [&](std::initializer_list<std::string_view> ns) {
    for (auto n : ns) {
      if (want(n)) return true;
    }
    return false;
  };

  const std::size_t t = tweet_slots_;
  const auto tweets = slots_of(author, t);
  std::unique_ptr<bool[]> padding(new bool[t]);
  for (std::size_t i = 0; i < t; ++i) padding[i] = tweets[i].empty();
  std::span<const bool> pad(padding.get(), t);

  AuthorFeatures out;
  const std::size_t k = lda_.num_topics();
  auto finish = [&](std::string_view name, std::vector<double> values) {
    if (descriptor(name).level == Level::Tweet) impute_degenerate(values, pad, name, k);
    out.emplace(std::string(name), std::move(values));
  };

  std::vector<SentimentScores> rules(t);
  std::vector<SentimentScores> second(t);
  const bool need_rules = want_any({"negVader", "neuVader", "posVader", "compoundVader", "diff_neg",
                                    "diff_pos", "diff_neu", "pos_channel_std", "neg_channel_std",
                                    "neu_channel_std"});
  const bool need_second = want_any({"X_negative", "X_neutral", "X_positive", "diff_neg", "diff_pos", "diff_neu"});
  for (std::size_t i = 0; i < t; ++i) {
    if (padding[i]) continue;
    if (need_rules) rules[i] = rules_.analyze(tweets[i]);
    if (need_second) second[i] = secondary_.analyze(tweets[i], {author.author_id, i, std::nullopt});
  }
  auto series = [&](const std::vector<SentimentScores>& s, auto get) {
    std::vector<double> v(t);
    for (std::size_t i = 0; i < t; ++i) v[i] = get(s[i]);
    return v;
  };
  if (want("X_negative")) finish("X_negative", series(second, [](const auto& s) { return s.neg; }));
  if (want("X_neutral")) finish("X_neutral", series(second, [](const auto& s) { return s.neu; }));
  if (want("X_positive")) finish("X_positive", series(second, [](const auto& s) { return s.pos; }));
  if (want("negVader")) finish("negVader", series(rules, [](const auto& s) { return s.neg; }));
  if (want("neuVader")) finish("neuVader", series(rules, [](const auto& s) { return s.neu; }));
  if (want("posVader")) finish("posVader", series(rules, [](const auto& s) { return s.pos; }));
  if (want("compoundVader")) {
    finish("compoundVader", series(rules, [](const auto& s) { return s.compound.value_or(0.0); }));
  }
  const std::pair<std::string_view, Channel> diffs[] = {
      {"diff_neg", Channel::Neg}, {"diff_pos", Channel::Pos}, {"diff_neu", Channel::Neu}};
  for (const auto& [name, channel] : diffs) {
    if (!want(name)) continue;
    std::vector<double> v(t, 0.0);
    for (std::size_t i = 0; i < t; ++i) {
      if (!padding[i]) v[i] = sentiment::disagreement(rules[i], second[i], channel, stats_);
    }
    finish(name, std::move(v));
  }
  const std::pair<std::string_view, Channel> channel_stds[] = {
      {"pos_channel_std", Channel::Pos}, {"neg_channel_std", Channel::Neg}, {"neu_channel_std", Channel::Neu}};
  for (const auto& [name, channel] : channel_stds) {
    if (want(name)) finish(name, {sentiment::channel_std(rules, channel)});
  }

  if (want_any({"pos_sent_vecs", "neg_sent_vecs", "pos_sent_std", "neg_sent_std"})) {
    const bool fallback = secondary_.mode() == sentiment::SecondaryMode::Ingested &&
                          !secondary_.has_window_scores();
    std::vector<double> pos(t, 0.0);
    std::vector<double> neg(t, 0.0);
    for (std::size_t i = 0; i < t; ++i) {
      if (padding[i]) continue;
      auto tokens = sentiment::sentiment_tokens(tweets[i]);
      auto scorer = [&](std::string_view text, std::optional<std::size_t> window) {
        sentiment::ScoreKey key{author.author_id, i, window};
        if (fallback && window) return window_fallback_.analyze(text, key);
        return secondary_.analyze(text, key);
      };
      auto windows = sentiment::trigram_scores(tokens, scorer);
      pos[i] = sentiment::contrast(windows, Channel::Pos);
      neg[i] = sentiment::contrast(windows, Channel::Neg);
    }
    if (want("pos_sent_std")) finish("pos_sent_std", {sentiment::contrast_std(pos)});
    if (want("neg_sent_std")) finish("neg_sent_std", {sentiment::contrast_std(neg)});
    if (want("pos_sent_vecs")) finish("pos_sent_vecs", std::move(pos));
    if (want("neg_sent_vecs")) finish("neg_sent_vecs", std::move(neg));
  }

  if (want_any({"max_probabilities", "argmax_topic", "dominant_topic_user"})) {
    std::vector<double> maxp(t, 0.0);
    std::vector<double> argmax(t, 0.0);
    std::vector<std::size_t> observed;
    const auto seed = author_seed(options_.seed, author.author_id);
    for (std::size_t i = 0; i < t; ++i) {
      if (padding[i]) continue;
      auto tokens = lexical::tokenize(tweets[i]);
      auto a = topics::infer(lda_, tokens, options_.infer_iterations, derive_seed(seed, std::uint64_t{i}));
      maxp[i] = a.max_probability;
      argmax[i] = static_cast<double>(a.argmax_topic);
      observed.push_back(a.argmax_topic);
    }
    if (want("dominant_topic_user")) {
      finish("dominant_topic_user",
             {observed.empty() ? 0.0 : static_cast<double>(topics::dominant_topic(observed))});
    }
    if (want("max_probabilities")) finish("max_probabilities", std::move(maxp));
    if (want("argmax_topic")) finish("argmax_topic", std::move(argmax));
  }

  if (want_any({"tfidf", "cluster"})) {
    std::vector<lexical::AuthorDoc> docs{author_doc(tweets)};
    auto row = lexical::tfidf(docs, vocab_);
    auto dense = lexical::to_dense(row, vocab_.size());
    if (want("cluster")) {
      finish("cluster", {static_cast<double>(topics::nearest_centroid(centroids_, dense.row(0)))});
    }
    if (want("tfidf")) finish("tfidf", std::vector<double>(dense.row(0).begin(), dense.row(0).end()));
  }
  if (want("pos_unis")) {
    auto profile = lexical::pos_unigrams(*tagger_, tweets);
    finish("pos_unis", std::vector<double>(profile.begin(), profile.end()));
  }
  if (want("mean_len")) finish("mean_len", {lexical::mean_len(tweets)});
  return out;
}

FeatureMatrix assemble(const corpus::Corpus& corpus, const FittedExtractors& extractors,
                       std::span<const std::string> names) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    descriptor(n);
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::InvalidArgument, "feature '" + n + "' requested twice");
    }
  }
  if (!extractors.fitted()) throw Error(ErrorCode::UnfittedExtractor, "extractors have not been fitted");

  FeatureMatrix m;
  m.tweet_slots = extractors.tweet_slots();
  m.vocab_size = extractors.vocabulary().size();
  m.num_topics = extractors.topic_model().num_topics();
  m.seed = extractors.options().seed;
  const auto shape = extractors.shape();
  std::size_t offset = 0;
  for (const auto& n : names) {
    const auto w = width(descriptor(n), shape);
    m.columns.push_back({n, offset, w});
    offset += w;
  }
  m.values = Matrix(corpus.size(), offset);
  for (const auto& a : corpus.authors()) {
    m.author_ids.push_back(a.author_id);
    m.labels.push_back(a.label);
  }
  parallel_for(corpus.size(), [&](std::size_t r) {
    const auto& author = corpus[r];
    auto feats = extractors.extract(author, names);
    auto row = m.values.row(r);
    for (const auto& c : m.columns) {
      const auto& v = feats.at(c.name);
      if (v.size() != c.width) {
        throw Error(ErrorCode::LengthMismatch, "feature '" + c.name + "' produced " +
                                                   std::to_string(v.size()) + " values, expected " +
                                                   std::to_string(c.width));
      }
      for (std::size_t j = 0; j < c.width; ++j) {
        if (!std::isfinite(v[j])) {
          throw Error(ErrorCode::NonFiniteFeature,
                      "feature '" + c.name + "' is not finite for author '" + author.author_id + "'");
        }
        row[c.offset + j] = v[j];
      }
    }
  });
  return m;
}

// ---------------------------------------------------------------------------
// Persistence

std::string FittedExtractors::to_json() const {
  if (!fitted_) throw Error(ErrorCode::UnfittedExtractor, "extractors have not been fitted");
  json j;
  j["format"] = "ironyprof-extractors";
  j["version"] = 1;
  const auto& o = options_;
  j["options"] = {{"seed", o.seed},
                  {"lexicon_path", path_string(o.lexicon_path)},
                  {"tag_lexicon_path", path_string(o.tag_lexicon_path)},
                  {"suffix_rules_path", path_string(o.suffix_rules_path)},
                  {"secondary_scores_path", path_string(o.secondary_scores_path)},
                  {"rules", rules_to_json(o.rules)},
                  {"k_min", o.k_min},
                  {"k_max", o.k_max},
                  {"lda_iterations", o.lda_iterations},
                  {"infer_iterations", o.infer_iterations},
                  {"lda_min_count", o.lda_min_count},
                  {"lda_beta", o.lda_beta},
                  {"lda_alpha_numerator", o.lda_alpha_numerator},
                  {"lda_per_user", o.lda_per_user},
                  {"vocab",
                   {{"ngram_min", o.vocab.ngram_min},
                    {"ngram_max", o.vocab.ngram_max},
                    {"min_df", o.vocab.min_df},
                    {"max_df", o.vocab.max_df}}},
                  {"clusters", o.clusters}};
  j["tweet_slots"] = tweet_slots_;
  j["disagreement_stats"] = {{"first", channel_stats_to_json(stats_.first)},
                             {"second", channel_stats_to_json(stats_.second)}};
  j["topic_model"] = json::parse(lda_.to_json());
  json perplexities = json::array();
  for (const auto& [kk, p] : k_report_.perplexities) perplexities.push_back({kk, p});
  j["k_report"] = {{"best_k", k_report_.best_k}, {"perplexities", perplexities}};
  j["vocabulary"] = {{"terms", vocab_.terms},
                     {"document_frequency", vocab_.document_frequency},
                     {"document_count", vocab_.document_count}};
  j["centroids"] = {{"rows", centroids_.rows()}, {"cols", centroids_.cols()}, {"values", centroids_.data()}};
  return j.dump();
}

FittedExtractors FittedExtractors::from_json(std::string_view text) {
  FittedExtractors fx;
  try {
    auto j = json::parse(text);
    if (j.at("format") != "ironyprof-extractors") {
      throw Error(ErrorCode::CorruptArtifact, "not an extractor artifact");
    }
    const auto& o = j.at("options");
    auto opt_path = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (o.at(key).is_null()) return std::nullopt;
      return std::filesystem::path(o.at(key).get<std::string>());
    };
    auto& opts = fx.options_;
    opts.seed = o.at("seed").get<std::uint64_t>();
    opts.lexicon_path = opt_path("lexicon_path");
    opts.tag_lexicon_path = opt_path("tag_lexicon_path");
    opts.suffix_rules_path = opt_path("suffix_rules_path");
    opts.secondary_scores_path = opt_path("secondary_scores_path");
    opts.rules = rules_from_json(o.at("rules"));
    o.at("k_min").get_to(opts.k_min);
    o.at("k_max").get_to(opts.k_max);
    o.at("lda_iterations").get_to(opts.lda_iterations);
    o.at("infer_iterations").get_to(opts.infer_iterations);
    o.at("lda_min_count").get_to(opts.lda_min_count);
    o.at("lda_beta").get_to(opts.lda_beta);
    o.at("lda_alpha_numerator").get_to(opts.lda_alpha_numerator);
    o.at("lda_per_user").get_to(opts.lda_per_user);
    const auto& v = o.at("vocab");
    v.at("ngram_min").get_to(opts.vocab.ngram_min);
    v.at("ngram_max").get_to(opts.vocab.ngram_max);
    v.at("min_df").get_to(opts.vocab.min_df);
    v.at("max_df").get_to(opts.vocab.max_df);
    o.at("clusters").get_to(opts.clusters);

    j.at("tweet_slots").get_to(fx.tweet_slots_);
    fx.stats_.fitted = true;
    fx.stats_.first = channel_stats_from_json(j.at("disagreement_stats").at("first"));
    fx.stats_.second = channel_stats_from_json(j.at("disagreement_stats").at("second"));
    fx.lda_ = topics::TopicModel::from_json(j.at("topic_model").dump());
    const auto& kr = j.at("k_report");
    kr.at("best_k").get_to(fx.k_report_.best_k);
    for (const auto& p : kr.at("perplexities")) {
      fx.k_report_.perplexities.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<double>());
    }
    const auto& vj = j.at("vocabulary");
    vj.at("terms").get_to(fx.vocab_.terms);
    vj.at("document_frequency").get_to(fx.vocab_.document_frequency);
    vj.at("document_count").get_to(fx.vocab_.document_count);
    fx.vocab_.options = opts.vocab;
    fx.vocab_.rebuild_index();
    const auto& cj = j.at("centroids");
    fx.centroids_ = Matrix(cj.at("rows").get<std::size_t>(), cj.at("cols").get<std::size_t>(),
                           cj.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, std::string("extractor artifact: ") + e.what());
  }
  fx.build_analyzers();
  fx.fitted_ = true;
  return fx;
}

void FittedExtractors::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json() << '\n';
}

FittedExtractors FittedExtractors::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace ironyprof::features
