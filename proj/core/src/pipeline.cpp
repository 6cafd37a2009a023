#include "ironyprof/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ironyprof/corpus.hpp"
#include "ironyprof/error.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/hash.hpp"
#include "ironyprof/lexical.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::pipeline {

namespace {

using ordered = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_path(const std::optional<fs::path>& p) { return p ? p->generic_string() : ""; }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered& j) { open_out(path) << j.dump(2) << '\n'; }

ordered read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return ordered::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, path.string() + ": " + e.what());
  }
}

learn::CvPlan plan_for(std::span<const int> y, const RunConfig& config) {
  const auto seed = derive_seed(config.seed, "folds");
  return config.stratified_folds ? learn::make_stratified_folds(y, config.folds, seed)
                                 : learn::make_folds(y.size(), config.folds, seed);
}

features::FeatureMatrix restrict(const features::FeatureMatrix& m, const std::vector<std::string>& names,
                                 const fs::path& source) {
  if (names.empty()) return m;
  for (const auto& n : names) {
    if (!m.has(n)) {
      throw Error(ErrorCode::UnknownFeature, source.string() + " has no feature '" + n + "'");
    }
  }
  return m.select(names);
}

corpus::Corpus load_corpus(const fs::path& corpus_jsonl, std::size_t tweet_slots) {
  auto authors = corpus::read_jsonl_file(corpus_jsonl);
  if (authors.empty()) throw Error(ErrorCode::EmptyCorpus, corpus_jsonl.string() + " has no authors");
  return corpus::Corpus(std::move(authors), tweet_slots);
}

ordered spec_to_json(const learn::ModelSpec& s) {
  ordered j;
  j["kind"] = std::string(learn::to_string(s.kind));
  j["n_estimators"] = s.n_estimators;
  j["bootstrap"] = s.bootstrap;
  j["criterion"] = std::string(learn::to_string(s.tree.criterion));
  j["max_depth"] = s.tree.max_depth;
  j["max_features"] = std::string(learn::to_string(s.tree.max_features));
  j["min_samples_split"] = s.tree.min_samples_split;
  j["C"] = s.c;
  j["seed"] = s.seed;
  return j;
}

void write_predictions(const fs::path& path, const features::FeatureMatrix& m, const learn::Prediction& p,
                       bool with_truth) {
  auto out = open_out(path);
  out << "author_id," << (with_truth ? "label," : "") << "predicted,score\n";
  for (std::size_t i = 0; i < m.author_ids.size(); ++i) {
    out << m.author_ids[i] << ',';
    if (with_truth) out << corpus::to_string(m.labels[i]) << ',';
    out << (p.labels[i] == 1 ? "I" : "NI") << ',' << eval::format_fixed(p.scores[i], 10) << '\n';
  }
}

}  // namespace

std::string RunConfig::canonical() const {
  std::ostringstream out;
  const auto& e = extractor;
  const auto& r = e.rules;
  out << "seed=" << seed << '\n'
      << "tweet_slots=" << tweet_slots << '\n'
      << "folds=" << folds << '\n'
      << "stratified_folds=" << stratified_folds << '\n'
      << "train_ratio=" << num(train_ratio) << '\n';
  out << "features=";
  for (std::size_t i = 0; i < features.size(); ++i) out << (i ? "," : "") << features[i];
  out << '\n'
      << "lexicon=" << opt_path(e.lexicon_path) << '\n'
      << "tag_lexicon=" << opt_path(e.tag_lexicon_path) << '\n'
      << "suffix_rules=" << opt_path(e.suffix_rules_path) << '\n'
      << "secondary_scores=" << opt_path(e.secondary_scores_path) << '\n'
      << "rules=" << r.negation << ',' << num(r.negation_scalar) << ',' << r.negation_window << ','
      << r.boosters << ',' << num(r.booster_increment) << ',' << r.caps_emphasis << ','
      << num(r.caps_increment) << ',' << r.exclamation << ',' << num(r.exclamation_increment) << ','
      << r.exclamation_cap << ',' << r.but_weighting << ',' << num(r.but_before) << ',' << num(r.but_after)
      << ',' << num(r.alpha) << '\n'
      << "k_min=" << e.k_min << '\n'
      << "k_max=" << e.k_max << '\n'
      << "lda_iterations=" << e.lda_iterations << '\n'
      << "infer_iterations=" << e.infer_iterations << '\n'
      << "lda_min_count=" << e.lda_min_count << '\n'
      << "lda_beta=" << num(e.lda_beta) << '\n'
      << "lda_alpha_numerator=" << num(e.lda_alpha_numerator) << '\n'
      << "lda_per_user=" << e.lda_per_user << '\n'
      << "ngram=" << e.vocab.ngram_min << ',' << e.vocab.ngram_max << '\n'
      << "df=" << num(e.vocab.min_df) << ',' << num(e.vocab.max_df) << '\n'
      << "clusters=" << e.clusters << '\n';
  return out.str();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

FeatureArtifacts FeatureArtifacts::in(const fs::path& dir) {
  return {dir / "train.irfm", dir / "test.irfm", dir / "extractors.json",
          dir / "manifest.json", dir / "split.json", dir / "perplexity.csv"};
}

IngestSummary ingest(const fs::path& xml_dir, const std::optional<fs::path>& truth, const fs::path& out_jsonl) {
  auto authors = corpus::load_directory(xml_dir, truth);
  if (authors.empty()) throw Error(ErrorCode::EmptyCorpus, "no author files in " + xml_dir.string());
  IngestSummary s;
  s.authors = authors.size();
  for (const auto& a : authors) {
    if (a.label == corpus::Label::Ironic) ++s.ironic;
    else if (a.label == corpus::Label::NotIronic) ++s.not_ironic;
    else ++s.unlabeled;
  }
  if (out_jsonl.has_parent_path()) fs::create_directories(out_jsonl.parent_path());
  corpus::write_jsonl_file(out_jsonl, authors);
  return s;
}

FeatureArtifacts featurize(const fs::path& corpus_jsonl, const RunConfig& config, const fs::path& out_dir) {
  const auto corpus = load_corpus(corpus_jsonl, config.tweet_slots);
  const auto split = corpus::split_users(corpus, config.train_ratio, derive_seed(config.seed, "split"));
  const auto train = corpus.subset(split.train_ids);
  const auto test = corpus.subset(split.test_ids);

  auto options = config.extractor;
  options.seed = derive_seed(config.seed, "extract");
  const auto fx = features::FittedExtractors::fit(train, options);

  std::vector<std::string> names =
      config.features.empty() ? features::all_feature_names() : features::canonical_order(config.features);
  auto m_train = features::assemble(train, fx, names);
  auto m_test = features::assemble(test, fx, names);
  const auto hash = config.hash();
  for (auto* m : {&m_train, &m_test}) {
    m->seed = config.seed;
    m->config_hash = hash;
  }

  fs::create_directories(out_dir);
  const auto paths = FeatureArtifacts::in(out_dir);
  features::write_matrix(paths.train_matrix, m_train);
  features::write_matrix(paths.test_matrix, m_test);
  fx.save(paths.extractors);

  ordered split_json;
  split_json["seed"] = config.seed;
  split_json["config_hash"] = hash;
  split_json["ratio"] = config.train_ratio;
  split_json["train_ids"] = split.train_ids;
  split_json["test_ids"] = split.test_ids;
  write_json(paths.split, split_json);

  {
    auto out = open_out(paths.perplexity);
    out << "k,perplexity\n";
    for (const auto& [k, p] : fx.k_report().perplexities) out << k << ',' << eval::format_fixed(p, 6) << '\n';
  }

  ordered manifest;
  manifest["seed"] = config.seed;
  manifest["config_hash"] = hash;
  manifest["tweet_slots"] = m_train.tweet_slots;
  manifest["vocab_size"] = m_train.vocab_size;
  manifest["num_topics"] = m_train.num_topics;
  manifest["train_authors"] = train.size();
  manifest["test_authors"] = test.size();
  manifest["fingerprint"] = m_train.fingerprint();
  ordered feats = ordered::array();
  for (const auto& c : m_train.columns) {
    const auto& d = features::descriptor(c.name);
    feats.push_back({{"name", c.name},
                     {"published_name", d.published_name},
                     {"category", std::string(features::to_string(d.category))},
                     {"level", std::string(features::to_string(d.level))},
                     {"offset", c.offset},
                     {"width", c.width},
                     {"producer", d.producer}});
  }
  manifest["features"] = std::move(feats);
  manifest["config"] = config.canonical();
  write_json(paths.manifest, manifest);
  return paths;
}

SelectionOutcome select(const fs::path& train_matrix, const RunConfig& config, const fs::path& out_dir) {
  const auto m = features::read_matrix(train_matrix);
  const auto y = m.binary_labels();
  const auto plan = plan_for(y, config);
  const auto spec = learn::selection_spec(derive_seed(config.seed, "selection"));
  auto build = learn::builder_for(m);

  auto category = [&](features::Category c) {
    auto names = features::category_features(c);
    for (const auto& n : names) {
      if (!m.has(n)) throw Error(ErrorCode::UnknownFeature, train_matrix.string() + " has no feature '" + n + "'");
    }
    return names;
  };
  SelectionOutcome out;
  out.topic = learn::select_exhaustive(category(features::Category::Topic), build, y, plan, spec);
  out.topic.category = "topic";
  out.lexical = learn::select_exhaustive(category(features::Category::Lexical), build, y, plan, spec);
  out.lexical.category = "lexical";
  out.sentiment = learn::select_stagewise(category(features::Category::Sentiment), build, y, plan, spec, 5);
  out.sentiment.category = "sentiment";

  std::vector<std::string> selected;
  for (const auto* r : {&out.sentiment, &out.topic, &out.lexical}) {
    const auto& best = r->best_subset();
    selected.insert(selected.end(), best.begin(), best.end());
  }
  out.selected = features::canonical_order(selected);

  fs::create_directories(out_dir);
  for (const auto* r : {&out.topic, &out.lexical, &out.sentiment}) {
    auto f = open_out(out_dir / ("selection_" + r->category + ".csv"));
    learn::write_selection_csv(f, *r);
  }
  ordered j;
  j["seed"] = config.seed;
  j["config_hash"] = m.config_hash;
  j["classifier"] = spec.describe();
  j["folds"] = config.folds;
  ordered best;
  for (const auto* r : {&out.sentiment, &out.topic, &out.lexical}) {
    best[r->category] = {{"predictors", r->best_subset()}, {"mean_f1", r->rows[r->best].result.mean_f1}};
  }
  j["best"] = std::move(best);
  j["selected"] = out.selected;
  write_json(out_dir / "selection.json", j);
  return out;
}

std::vector<std::string> read_selection(const fs::path& selection_json) {
  auto j = read_json(selection_json);
  try {
    return j.at("selected").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, selection_json.string() + ": " + e.what());
  }
}

learn::GridResult grid_search(const fs::path& train_matrix, GridFamily family,
                              const std::vector<std::string>& features, const RunConfig& config,
                              const fs::path& out_dir) {
  const auto full = features::read_matrix(train_matrix);
  const auto m = restrict(full, features, train_matrix);
  const auto y = m.binary_labels();
  const auto plan = plan_for(y, config);
  const auto seed = derive_seed(config.seed, "grid");
  std::vector<learn::ModelSpec> grid;
  std::string tag;
  switch (family) {
    case GridFamily::RandomForest:
      grid = learn::enumerate_grid(learn::ForestGrid{}, seed);
      tag = "rf";
      break;
    case GridFamily::LogisticRegression:
      grid = learn::logreg_grid(seed);
      tag = "lr";
      break;
    case GridFamily::LinearSvm:
      grid = learn::svm_grid(seed);
      tag = "svm";
      break;
  }
  auto result = learn::grid_search(m.values, y, grid, plan);
  fs::create_directories(out_dir);
  {
    auto f = open_out(out_dir / ("grid_" + tag + ".csv"));
    learn::write_grid_csv(f, result);
  }
  write_params(out_dir / ("best_params_" + tag + ".json"), result.best_spec(), config);
  return result;
}

void write_params(const fs::path& params_json, const learn::ModelSpec& spec, const RunConfig& config) {
  ordered j;
  j["seed"] = config.seed;
  j["config_hash"] = config.hash();
  j["spec"] = spec_to_json(spec);
  write_json(params_json, j);
}

learn::ModelSpec read_params(const fs::path& params_json) {
  auto j = read_json(params_json);
  try {
    const auto& s = j.at("spec");
    learn::ModelSpec spec;
    spec.kind = learn::parse_model_kind(s.at("kind").get<std::string>());
    s.at("n_estimators").get_to(spec.n_estimators);
    s.at("bootstrap").get_to(spec.bootstrap);
    spec.tree.criterion = learn::parse_criterion(s.at("criterion").get<std::string>());
    s.at("max_depth").get_to(spec.tree.max_depth);
    spec.tree.max_features = learn::parse_max_features(s.at("max_features").get<std::string>());
    s.at("min_samples_split").get_to(spec.tree.min_samples_split);
    s.at("C").get_to(spec.c);
    s.at("seed").get_to(spec.seed);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, params_json.string() + ": " + e.what());
  }
}

TrainTarget parse_target(std::string_view text) {
  if (text == "baseline-lr") return TrainTarget::BaselineLr;
  if (text == "baseline-rf") return TrainTarget::BaselineRf;
  if (text == "final-rf") return TrainTarget::FinalRf;
  if (text == "final-lr") return TrainTarget::FinalLr;
  if (text == "final-svm") return TrainTarget::FinalSvm;
  throw Error(ErrorCode::InvalidArgument, "unknown training target '" + std::string(text) + "'");
}

std::string_view to_string(TrainTarget target) {
  switch (target) {
    case TrainTarget::BaselineLr: return "baseline-lr";
    case TrainTarget::BaselineRf: return "baseline-rf";
    case TrainTarget::FinalRf: return "final-rf";
    case TrainTarget::FinalLr: return "final-lr";
    case TrainTarget::FinalSvm: return "final-svm";
  }
  return "";
}

learn::ModelSpec default_spec(TrainTarget target, const RunConfig& config) {
  auto spec = learn::selection_spec(derive_seed(config.seed, "train"));
  switch (target) {
    case TrainTarget::BaselineLr:
    case TrainTarget::FinalLr:
      spec.kind = learn::ModelKind::LogisticRegression;
      spec.c = 1.0;
      break;
    case TrainTarget::FinalSvm:
      spec.kind = learn::ModelKind::LinearSvm;
      spec.c = 1.0;
      break;
    default:
      break;
  }
  return spec;
}

learn::Classifier train(const fs::path& train_matrix, TrainTarget target, const std::vector<std::string>& features,
                        const std::optional<learn::ModelSpec>& params, const RunConfig& config,
                        const fs::path& out_model) {
  const auto full = features::read_matrix(train_matrix);
  std::vector<std::string> names;
  if (target == TrainTarget::BaselineLr || target == TrainTarget::BaselineRf) {
    names = {"tfidf"};
  } else {
    names = features.empty() ? features::final_feature_set() : features;
  }
  const auto m = restrict(full, features::canonical_order(names), train_matrix);
  auto spec = params ? *params : default_spec(target, config);
  spec.seed = derive_seed(config.seed, "train");
  auto model = learn::train_on(m, spec);
  if (out_model.has_parent_path()) fs::create_directories(out_model.parent_path());
  model.save(out_model);
  return model;
}

namespace {

features::FeatureMatrix matrix_for_model(const learn::Classifier& model, const fs::path& matrix_path) {
  const auto full = features::read_matrix(matrix_path);
  for (const auto& n : model.feature_names) {
    if (!full.has(n)) {
      throw Error(ErrorCode::SpecMismatch, matrix_path.string() + " lacks feature '" + n + "' the model was trained on");
    }
  }
  return full.select(model.feature_names);
}

}  // namespace

eval::Metrics evaluate(const fs::path& model_path, const fs::path& test_matrix, const fs::path& out_dir) {
  const auto model = learn::Classifier::load(model_path);
  const auto m = matrix_for_model(model, test_matrix);
  const auto y = m.binary_labels();
  const auto p = learn::predict_matrix(model, m);
  auto metrics = eval::evaluate(y, p.labels, p.scores);
  fs::create_directories(out_dir);
  {
    auto f = open_out(out_dir / "metrics.json");
    eval::write_metrics_json(f, metrics, model.root_seed, model.config_hash);
  }
  {
    auto f = open_out(out_dir / "roc.csv");
    eval::write_roc_csv(f, metrics.roc);
  }
  {
    auto f = open_out(out_dir / "confusion.csv");
    eval::write_confusion_csv(f, metrics.confusion);
  }
  write_predictions(out_dir / "predictions.csv", m, p, true);
  return metrics;
}

learn::Prediction predict_matrix_file(const fs::path& model_path, const fs::path& matrix, const fs::path& out_csv) {
  const auto model = learn::Classifier::load(model_path);
  const auto m = matrix_for_model(model, matrix);
  auto p = learn::predict_matrix(model, m);
  write_predictions(out_csv, m, p, false);
  return p;
}

learn::Prediction predict_corpus(const fs::path& model_path, const fs::path& extractors,
                                 const fs::path& corpus_jsonl, const fs::path& out_csv) {
  const auto model = learn::Classifier::load(model_path);
  const auto fx = features::FittedExtractors::load(extractors);
  if (fx.tweet_slots() != model.tweet_slots) {
    throw Error(ErrorCode::SpecMismatch, extractors.string() + " was fitted with T=" +
                                             std::to_string(fx.tweet_slots()) + " but the model expects T=" +
                                             std::to_string(model.tweet_slots));
  }
  const auto corpus = load_corpus(corpus_jsonl, model.tweet_slots);
  auto m = features::assemble(corpus, fx, model.feature_names);
  auto p = learn::predict_matrix(model, m);
  write_predictions(out_csv, m, p, false);
  return p;
}

void report(const fs::path& features_dir, const fs::path& corpus_jsonl, const RunConfig& config,
            const fs::path& out_dir) {
  const auto paths = FeatureArtifacts::in(features_dir);
  const auto fx = features::FittedExtractors::load(paths.extractors);
  const auto corpus = load_corpus(corpus_jsonl, fx.tweet_slots());
  const auto split = read_json(paths.split);
  const auto train_ids = split.at("train_ids").get<std::vector<std::string>>();
  const auto& vocab = fx.vocabulary();

  std::vector<lexical::AuthorDoc> docs;
  for (const auto& a : corpus.authors()) {
    lexical::AuthorDoc doc;
    for (const auto& t : a.tweets) doc.push_back(lexical::tokenize(t));
    docs.push_back(std::move(doc));
  }
  const auto rows = lexical::tfidf(docs, vocab);
  fs::create_directories(out_dir);

  {
    auto out = open_out(out_dir / "tfidf_sparse.csv");
    out << "author_id,term,weight\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [col, w] : rows[i].entries) {
        out << corpus[i].author_id << ',' << vocab.terms[col] << ',' << eval::format_fixed(w, 10) << '\n';
      }
    }
  }

  // Top terms on the labelled training authors.
  std::vector<lexical::TfidfRow> train_rows;
  std::vector<char> positive;
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& id : train_ids) {
    auto idx = corpus.find(id);
    if (!idx || corpus[*idx].label == corpus::Label::Unknown) continue;
    train_rows.push_back(rows[*idx]);
    const bool pos = corpus[*idx].label == corpus::Label::Ironic;
    positive.push_back(pos ? 1 : 0);
    (pos ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::MissingLabelClass, "top terms need both labels among training authors");
  std::unique_ptr<bool[]> flags(new bool[positive.size()]);
  for (std::size_t i = 0; i < positive.size(); ++i) flags[i] = positive[i] != 0;
  const auto top = lexical::top_terms_per_label(train_rows, std::span<const bool>(flags.get(), positive.size()), vocab, 10);
  {
    auto out = open_out(out_dir / "top_terms.csv");
    out << "label,order,rank,term,mass\n";
    auto dump = [&](const char* label, const char* order, const std::vector<lexical::RankedTerm>& terms) {
      for (std::size_t r = 0; r < terms.size(); ++r) {
        out << label << ',' << order << ',' << r + 1 << ',' << terms[r].term << ','
            << eval::format_fixed(terms[r].mass, 6) << '\n';
      }
    };
    dump("I", "unigram", top.positive_unigrams);
    dump("I", "bigram", top.positive_bigrams);
    dump("NI", "unigram", top.negative_unigrams);
    dump("NI", "bigram", top.negative_bigrams);
  }

  {
    const auto dense = lexical::to_dense(rows, vocab.size());
    eval::PcaOptions po;
    po.seed = derive_seed(config.seed, "pca");
    const auto pca = eval::pca2(dense, po);
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    for (const auto& a : corpus.authors()) {
      ids.push_back(a.author_id);
      labels.emplace_back(corpus::to_string(a.label));
    }
    auto out = open_out(out_dir / "pca.csv");
    eval::write_pca_csv(out, ids, labels, pca);
    ordered j;
    j["explained"] = {pca.explained[0], pca.explained[1]};
    j["rank_deficient"] = pca.rank_deficient;
    write_json(out_dir / "pca.json", j);
  }

  {
    const auto& lda = fx.topic_model();
    auto out = open_out(out_dir / "topics.csv");
    out << "topic,rank,word\n";
    for (std::size_t k = 0; k < lda.num_topics(); ++k) {
      const auto words = lda.top_words(k, 10);
      for (std::size_t r = 0; r < words.size(); ++r) out << k << ',' << r + 1 << ',' << words[r] << '\n';
    }
  }
}

PipelineResult run_pipeline(const fs::path& corpus_jsonl, const RunConfig& config, const fs::path& out_dir) {
  PipelineResult result;
  result.features = featurize(corpus_jsonl, config, out_dir / "features");
  result.selection = select(result.features.train_matrix, config, out_dir / "selection");
  train(result.features.train_matrix, TrainTarget::FinalRf, result.selection.selected, std::nullopt, config,
        out_dir / "model" / "final-rf.json");
  result.metrics = evaluate(out_dir / "model" / "final-rf.json", result.features.test_matrix, out_dir / "eval");
  return result;
}

}  // namespace ironyprof::pipeline
