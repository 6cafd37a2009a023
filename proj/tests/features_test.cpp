#include "ironyprof/features.hpp"

#include <set>
#include <sstream>

#include "ironyprof/extractors.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/synth.hpp"
#include "test_support.hpp"

namespace ironyprof::features {
namespace {

using ironyprof::testing::TempDir;

TEST(Registry, NamesAreUniqueAndResolvable) {
  std::set<std::string> names;
  for (const auto& f : registry()) {
    EXPECT_TRUE(names.insert(f.name).second) << f.name;
    EXPECT_EQ(&descriptor(f.name), &f);
  }
  EXPECT_EQ(names.size(), 24u);
  EXPECT_EQ(category_features(Category::Sentiment).size(), 14u);
  EXPECT_EQ(category_features(Category::Topic).size(), 3u);
  EXPECT_EQ(category_features(Category::Lexical).size(), 3u);
  EXPECT_ERROR_CODE(descriptor("no_such_feature"), UnknownFeature);
}

TEST(Registry, FinalSetIsKnown) {
  EXPECT_EQ(final_feature_set().size(), 7u);
  for (const auto& n : final_feature_set()) EXPECT_NO_THROW(descriptor(n));
}

TEST(Registry, CanonicalOrder) {
  std::vector<std::string> in = {"mean_len", "tfidf", "cluster", "neuVader", "mean_len"};
  EXPECT_EQ(canonical_order(in),
            (std::vector<std::string>{"neuVader", "tfidf", "cluster", "mean_len"}));
  auto all = all_feature_names();
  EXPECT_EQ(all.size(), 24u);
  EXPECT_TRUE(std::equal(final_feature_set().begin(), final_feature_set().end(), all.begin()));
}

TEST(Width, ByLevel) {
  Shape shape{200, 937, 12};
  std::size_t total = 0;
  for (const char* n : {"posVader", "pos_sent_vecs", "neg_sent_vecs", "diff_pos",
                        "max_probabilities", "tfidf", "pos_unis"}) {
    total += width(descriptor(n), shape);
  }
  EXPECT_EQ(total, 200u + 600u + 200u + 937u + 12u);
  EXPECT_EQ(width(descriptor("mean_len"), shape), 1u);
}

TEST(Impute, PaddingSlotsOnly) {
  std::vector<double> v = {0.9, 7.0, 7.0};
  bool pad[3] = {false, true, true};
  impute_degenerate(v, std::span<const bool>(pad, 3), "max_probabilities", 5);
  EXPECT_EQ(v, (std::vector<double>{0.9, 0.2, 0.2}));
  std::vector<double> w = {0.5, 3.0, 3.0};
  impute_degenerate(w, std::span<const bool>(pad, 3), "argmax_topic", 5);
  EXPECT_EQ(w, (std::vector<double>{0.5, 0.0, 0.0}));
  EXPECT_EQ(degenerate_value("posVader", 5), 0.0);
}

TEST(Fingerprint, DependsOnSlotsAndOrder) {
  std::vector<FeatureColumn> a = {{"posVader", 0, 10}, {"mean_len", 10, 1}};
  std::vector<FeatureColumn> b = {{"mean_len", 0, 1}, {"posVader", 1, 10}};
  EXPECT_EQ(fingerprint(a, 10), fingerprint(a, 10));
  EXPECT_NE(fingerprint(a, 10), fingerprint(b, 10));
  EXPECT_NE(fingerprint(a, 10), fingerprint(a, 11));
}

// One small fitted pipeline shared by the tests below.
class Fitted : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    synth::SynthOptions so;
    so.authors = 16;
    so.tweets_per_author = 8;
    so.seed = 3;
    auto authors = synth::generate(so);
    for (auto& a : authors) {
      for (auto& t : a.tweets) t = corpus::clean_tweet(t);
    }
    corpus_ = new corpus::Corpus(authors, 10);
    ExtractorOptions opt;
    opt.seed = 9;
    opt.k_min = 2;
    opt.k_max = 3;
    opt.lda_iterations = 15;
    opt.infer_iterations = 10;
    opt.clusters = 2;
    extractors_ = new FittedExtractors(FittedExtractors::fit(*corpus_, opt));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete extractors_;
  }
  static corpus::Corpus* corpus_;
  static FittedExtractors* extractors_;
};

corpus::Corpus* Fitted::corpus_ = nullptr;
FittedExtractors* Fitted::extractors_ = nullptr;

TEST_F(Fitted, EveryFeatureHasItsWidth) {
  auto names = all_feature_names();
  auto m = assemble(*corpus_, *extractors_, names);
  EXPECT_EQ(m.values.rows(), 16u);
  const Shape shape = extractors_->shape();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    EXPECT_EQ(m.columns[i].name, names[i]);
    EXPECT_EQ(m.columns[i].offset, offset);
    EXPECT_EQ(m.columns[i].width, width(descriptor(names[i]), shape));
    offset += m.columns[i].width;
  }
  EXPECT_EQ(m.values.cols(), offset);
  for (double v : m.values.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST_F(Fitted, SelectEqualsDirectAssembly) {
  auto all = assemble(*corpus_, *extractors_, all_feature_names());
  std::vector<std::string> pick = {"mean_len", "diff_pos", "tfidf"};
  auto direct = assemble(*corpus_, *extractors_, pick);
  auto sliced = all.select(pick);
  EXPECT_EQ(sliced.columns, direct.columns);
  EXPECT_EQ(sliced.values, direct.values);
  EXPECT_EQ(sliced.fingerprint(), direct.fingerprint());
}

TEST_F(Fitted, JobCountDoesNotChangeValues) {
  auto names = all_feature_names();
  set_default_jobs(1);
  auto one = assemble(*corpus_, *extractors_, names);
  set_default_jobs(3);
  auto three = assemble(*corpus_, *extractors_, names);
  set_default_jobs(1);
  EXPECT_EQ(one, three);
}

TEST_F(Fitted, PaddingSlotsAreImputed) {
  std::vector<std::string> names = {"max_probabilities", "posVader"};
  auto m = assemble(*corpus_, *extractors_, names);
  const double k = static_cast<double>(extractors_->topic_model().num_topics());
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    // 8 tweets in 10 slots: the last two are padding.
    EXPECT_DOUBLE_EQ(m.values(r, 8), 1.0 / k);
    EXPECT_DOUBLE_EQ(m.values(r, 9), 1.0 / k);
    EXPECT_EQ(m.values(r, 18), 0.0);
    EXPECT_EQ(m.values(r, 19), 0.0);
  }
}

TEST_F(Fitted, AssembleRejectsBadRequests) {
  std::vector<std::string> dup = {"mean_len", "mean_len"};
  EXPECT_ERROR_CODE(assemble(*corpus_, *extractors_, dup), InvalidArgument);
  std::vector<std::string> bogus = {"bogus"};
  EXPECT_ERROR_CODE(assemble(*corpus_, *extractors_, bogus), UnknownFeature);
  std::vector<std::string> ok = {"mean_len"};
  EXPECT_ERROR_CODE(assemble(*corpus_, FittedExtractors{}, ok), UnfittedExtractor);
}

TEST_F(Fitted, ExtractorsSurviveJson) {
  auto back = FittedExtractors::from_json(extractors_->to_json());
  auto names = all_feature_names();
  EXPECT_EQ(assemble(*corpus_, back, names), assemble(*corpus_, *extractors_, names));
}

TEST_F(Fitted, MatrixRoundTrip) {
  auto m = assemble(*corpus_, *extractors_, all_feature_names());
  m.seed = 77;
  m.config_hash = "abc";
  std::stringstream buf;
  write_matrix(buf, m);
  auto back = read_matrix(buf);
  EXPECT_EQ(back, m);

  TempDir dir("features");
  write_matrix(dir / "m.irfm", m);
  EXPECT_EQ(read_matrix(dir / "m.irfm"), m);
  std::ostringstream csv;
  write_matrix_csv(csv, m.select(std::vector<std::string>{"mean_len"}));
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "author_id,label,mean_len[0]");
}

TEST_F(Fitted, CorruptMatrixIsRejected) {
  auto m = assemble(*corpus_, *extractors_, std::vector<std::string>{"mean_len"});
  std::stringstream buf;
  write_matrix(buf, m);
  std::string bytes = buf.str();

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  EXPECT_ERROR_CODE(read_matrix(a), CorruptArtifact);

  std::istringstream b(bytes.substr(0, bytes.size() - 4));
  EXPECT_ERROR_CODE(read_matrix(b), CorruptArtifact);

  std::string bad_fp = bytes;
  auto pos = bad_fp.find(m.fingerprint());
  ASSERT_NE(pos, std::string::npos);
  bad_fp[pos] = bad_fp[pos] == '0' ? '1' : '0';
  std::istringstream c(bad_fp);
  EXPECT_ERROR_CODE(read_matrix(c), CorruptArtifact);
}

TEST(Matrix, UnknownLabelsHaveNoBinaryForm) {
  FeatureMatrix m;
  m.author_ids = {"a", "b"};
  m.labels = {corpus::Label::Ironic, corpus::Label::Unknown};
  EXPECT_ERROR_CODE(m.binary_labels(), MissingLabelClass);
  m.labels = {corpus::Label::Ironic, corpus::Label::NotIronic};
  EXPECT_EQ(m.binary_labels(), (std::vector<int>{1, 0}));
}

}  // namespace
}  // namespace ironyprof::features
