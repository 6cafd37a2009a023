#include "ironyprof/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "ironyprof/synth.hpp"
#include "test_support.hpp"

namespace ironyprof::pipeline {
namespace {

using ironyprof::testing::read_text;
using ironyprof::testing::TempDir;

RunConfig small_config() {
  RunConfig c;
  c.seed = 5;
  c.tweet_slots = 12;
  c.folds = 3;
  c.extractor.k_min = 2;
  c.extractor.k_max = 3;
  c.extractor.lda_iterations = 15;
  c.extractor.infer_iterations = 10;
  c.extractor.clusters = 2;
  return c;
}

// Synthetic XML directory ingested into corpus.jsonl under `dir`.
fs::path make_corpus(const TempDir& dir) {
  synth::SynthOptions so;
  so.authors = 24;
  so.tweets_per_author = 10;
  so.signal_strength = 0.6;
  so.seed = 8;
  synth::write_directory(dir / "xml", synth::generate(so));
  auto summary = ingest(dir / "xml", dir / "xml" / "truth.txt", dir / "corpus.jsonl");
  EXPECT_EQ(summary.authors, 24u);
  EXPECT_EQ(summary.ironic, 12u);
  EXPECT_EQ(summary.unlabeled, 0u);
  return dir / "corpus.jsonl";
}

TEST(RunConfig, HashIgnoresJobs) {
  RunConfig a, b;
  b.jobs = 8;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 43;
  EXPECT_NE(a.hash(), b.hash());
  RunConfig c;
  c.extractor.k_max = 9;
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Targets, ParseAndDefaults) {
  for (auto t : {TrainTarget::BaselineLr, TrainTarget::BaselineRf, TrainTarget::FinalRf,
                 TrainTarget::FinalLr, TrainTarget::FinalSvm}) {
    EXPECT_EQ(parse_target(to_string(t)), t);
  }
  EXPECT_ERROR_CODE(parse_target("final-xgb"), InvalidArgument);
  RunConfig c;
  EXPECT_EQ(default_spec(TrainTarget::BaselineLr, c).kind, learn::ModelKind::LogisticRegression);
  EXPECT_EQ(default_spec(TrainTarget::FinalSvm, c).kind, learn::ModelKind::LinearSvm);
  EXPECT_EQ(default_spec(TrainTarget::FinalRf, c).tree, learn::selection_spec(0).tree);
}

TEST(Params, RoundTrip) {
  TempDir dir("params");
  learn::ModelSpec spec;
  spec.n_estimators = 500;
  spec.tree.max_depth = 7;
  spec.tree.criterion = learn::Criterion::Entropy;
  spec.tree.max_features = learn::MaxFeatures::All;
  spec.seed = 99;
  write_params(dir / "p.json", spec, RunConfig{});
  EXPECT_EQ(read_params(dir / "p.json"), spec);
}

class SmallPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("pipeline");
    corpus_ = make_corpus(*dir_);
    artifacts_ = featurize(corpus_, small_config(), *dir_ / "features");
  }
  static void TearDownTestSuite() { delete dir_; }
  static TempDir* dir_;
  static fs::path corpus_;
  static FeatureArtifacts artifacts_;
};

TempDir* SmallPipeline::dir_ = nullptr;
fs::path SmallPipeline::corpus_;
FeatureArtifacts SmallPipeline::artifacts_;

TEST_F(SmallPipeline, ManifestListsEveryFeature) {
  auto manifest = nlohmann::json::parse(read_text(artifacts_.manifest));
  std::vector<std::string> names;
  for (const auto& f : manifest.at("features")) names.push_back(f.at("name"));
  EXPECT_EQ(names, features::all_feature_names());
  EXPECT_EQ(manifest.at("train_authors").get<int>() + manifest.at("test_authors").get<int>(), 24);
  EXPECT_EQ(manifest.at("config_hash"), small_config().hash());
  auto train = features::read_matrix(artifacts_.train_matrix);
  EXPECT_EQ(manifest.at("fingerprint"), train.fingerprint());
  EXPECT_NO_THROW(train.binary_labels());
  EXPECT_TRUE(fs::exists(artifacts_.perplexity));
}

TEST_F(SmallPipeline, SingleFeatureRequest) {
  auto c = small_config();
  c.features = {"mean_len"};
  auto a = featurize(corpus_, c, *dir_ / "mean_len");
  auto m = features::read_matrix(a.train_matrix);
  EXPECT_EQ(m.values.cols(), 1u);
  EXPECT_EQ(m.feature_names(), (std::vector<std::string>{"mean_len"}));

  // A model reads its own columns out of a wider matrix.
  train(a.train_matrix, TrainTarget::FinalRf, {"mean_len"}, std::nullopt, c, *dir_ / "m.json");
  auto narrow = predict_matrix_file(*dir_ / "m.json", a.test_matrix, *dir_ / "p1.csv");
  auto wide = predict_matrix_file(*dir_ / "m.json", artifacts_.test_matrix, *dir_ / "p2.csv");
  EXPECT_EQ(narrow.scores, wide.scores);

  // Missing columns and a different tweet-slot count are both refused.
  train(artifacts_.train_matrix, TrainTarget::FinalRf, {}, std::nullopt, c, *dir_ / "full.json");
  EXPECT_ERROR_CODE(predict_matrix_file(*dir_ / "full.json", a.test_matrix, *dir_ / "p3.csv"), SpecMismatch);
  auto other_t = c;
  other_t.tweet_slots = 8;
  auto b = featurize(corpus_, other_t, *dir_ / "mean_len_t8");
  EXPECT_ERROR_CODE(predict_matrix_file(*dir_ / "m.json", b.test_matrix, *dir_ / "p4.csv"), SpecMismatch);
}

TEST_F(SmallPipeline, BaselinesAndFinalModelsTrain) {
  auto c = small_config();
  for (auto t : {TrainTarget::BaselineLr, TrainTarget::BaselineRf, TrainTarget::FinalRf,
                 TrainTarget::FinalLr, TrainTarget::FinalSvm}) {
    const auto name = std::string(to_string(t));
    auto model = train(artifacts_.train_matrix, t, {}, std::nullopt, c, *dir_ / (name + ".json"));
    if (t == TrainTarget::BaselineLr || t == TrainTarget::BaselineRf) {
      EXPECT_EQ(model.feature_names, (std::vector<std::string>{"tfidf"}));
    } else {
      EXPECT_EQ(model.feature_names, features::final_feature_set());
    }
    auto m = evaluate(*dir_ / (name + ".json"), artifacts_.test_matrix, *dir_ / ("eval_" + name));
    EXPECT_GE(m.f1.f1, 0.0);
    EXPECT_LE(m.roc.auc, 1.0);
    for (const char* f : {"metrics.json", "roc.csv", "confusion.csv", "predictions.csv"}) {
      EXPECT_TRUE(fs::exists(*dir_ / ("eval_" + name) / f)) << name << " " << f;
    }
  }
}

TEST_F(SmallPipeline, CorpusPredictionMatchesMatrixPrediction) {
  auto c = small_config();
  train(artifacts_.train_matrix, TrainTarget::FinalRf, {}, std::nullopt, c, *dir_ / "rf.json");
  auto from_matrix = predict_matrix_file(*dir_ / "rf.json", artifacts_.test_matrix, *dir_ / "a.csv");
  auto test = features::read_matrix(artifacts_.test_matrix);
  auto from_corpus = predict_corpus(*dir_ / "rf.json", artifacts_.extractors, corpus_, *dir_ / "b.csv");
  auto full = corpus::read_jsonl_file(corpus_);
  for (std::size_t i = 0; i < test.author_ids.size(); ++i) {
    std::size_t at = 0;
    while (full[at].author_id != test.author_ids[i]) ++at;
    EXPECT_DOUBLE_EQ(from_corpus.scores[at], from_matrix.scores[i]) << test.author_ids[i];
  }
}

TEST_F(SmallPipeline, SelectionWritesReports) {
  auto out = select(artifacts_.train_matrix, small_config(), *dir_ / "selection");
  EXPECT_EQ(out.topic.rows.size(), 7u);
  EXPECT_EQ(out.lexical.rows.size(), 7u);
  EXPECT_EQ(out.sentiment.rows.size(), 40u);
  EXPECT_EQ(read_selection(*dir_ / "selection" / "selection.json"), out.selected);
  EXPECT_EQ(out.selected, features::canonical_order(out.selected));
  for (const char* f : {"selection_topic.csv", "selection_lexical.csv", "selection_sentiment.csv"}) {
    EXPECT_TRUE(fs::exists(*dir_ / "selection" / f)) << f;
  }
}

TEST(Ingest, EmptyDirectoryIsAnError) {
  TempDir dir("ingest");
  fs::create_directories(dir / "xml");
  EXPECT_ERROR_CODE(ingest(dir / "xml", std::nullopt, dir / "c.jsonl"), EmptyCorpus);
}

}  // namespace
}  // namespace ironyprof::pipeline
