#include "ironyprof/learn.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "ironyprof/eval.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/random.hpp"
#include "test_support.hpp"

namespace ironyprof::learn {
namespace {

// Two Gaussian blobs at -+center on every axis; label 1 for the + blob.
void blobs(std::size_t n, std::size_t d, double center, std::uint64_t seed, Matrix& x,
           std::vector<int>& y) {
  Rng rng(seed);
  x = Matrix(n, d);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double c = y[i] == 1 ? center : -center;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = c + rng.normal();
  }
}

TEST(Impurity, KnownValues) {
  EXPECT_DOUBLE_EQ(impurity(Criterion::Gini, 5, 5), 0.5);
  EXPECT_DOUBLE_EQ(impurity(Criterion::Entropy, 5, 5), 1.0);
  EXPECT_EQ(impurity(Criterion::Gini, 4, 0), 0.0);
  EXPECT_EQ(impurity(Criterion::Entropy, 0, 3), 0.0);
}

TEST(Tree, SeparatesOneFeature) {
  Matrix x(6, 2, std::vector<double>{1, 9, 2, 9, 3, 9, 10, 9, 11, 9, 12, 9});
  std::vector<int> y = {0, 0, 0, 1, 1, 1};
  TreeParams p;
  p.max_features = MaxFeatures::All;
  Rng rng(1);
  auto t = fit_tree(x, y, p, rng);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes[0].threshold, 6.5);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.leaf_count(), 2u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(t.predict_proba(x.row(i)), y[i]);
}

TEST(Tree, PureNodeIsALeaf) {
  Matrix x(3, 1, std::vector<double>{1, 2, 3});
  std::vector<int> y = {1, 1, 1};
  Rng rng(1);
  auto t = fit_tree(x, y, TreeParams{}, rng);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].counts[1], 3u);
}

TEST(Tree, DepthIsBounded) {
  Matrix x;
  std::vector<int> y;
  blobs(200, 4, 0.3, 2, x, y);
  TreeParams p;
  p.max_depth = 3;
  Rng rng(2);
  EXPECT_LE(fit_tree(x, y, p, rng).depth(), 3u);
}

TEST(Tree, RejectsBadInput) {
  Matrix x(2, 1, std::vector<double>{0, 1});
  std::vector<int> bad = {0, 2};
  Rng rng(0);
  EXPECT_ERROR_CODE(fit_tree(x, bad, TreeParams{}, rng), InvalidArgument);
  std::vector<int> short_y = {0};
  EXPECT_ERROR_CODE(fit_tree(x, short_y, TreeParams{}, rng), LengthMismatch);
}

TEST(Forest, SingleTreeWithoutBootstrapIsAPlainTree) {
  Matrix x;
  std::vector<int> y;
  blobs(60, 5, 0.5, 3, x, y);
  TreeParams p;
  auto forest = fit_forest(x, y, p, 1, 42, false);
  Rng rng(derive_seed(derive_seed(42, std::uint64_t{0}), "features"));
  EXPECT_EQ(forest.trees[0], fit_tree(x, y, p, rng));
}

TEST(Forest, DeterministicForSeed) {
  Matrix x;
  std::vector<int> y;
  blobs(80, 4, 0.5, 4, x, y);
  auto a = fit_forest(x, y, TreeParams{}, 20, 5);
  auto b = fit_forest(x, y, TreeParams{}, 20, 5);
  auto c = fit_forest(x, y, TreeParams{}, 20, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.trees, c.trees);
}

TEST(Forest, SeparatesBlobs) {
  Matrix x, xt;
  std::vector<int> y, yt;
  blobs(200, 6, 1.0, 5, x, y);
  blobs(200, 6, 1.0, 6, xt, yt);
  ModelSpec spec;
  spec.seed = 1;
  auto clf = Classifier::train(x, y, spec);
  EXPECT_GE(eval::f1(yt, clf.predict(xt)).f1, 0.95);
}

TEST(Forest, BootstrapCoversAboutTwoThirds) {
  auto rows = bootstrap_sample(20000, 9);
  std::set<std::size_t> unique(rows.begin(), rows.end());
  EXPECT_NEAR(static_cast<double>(unique.size()) / 20000.0, 1.0 - std::exp(-1.0), 0.01);
}

TEST(LogReg, GradientMatchesFiniteDifferences) {
  Matrix x;
  std::vector<int> y;
  blobs(40, 3, 0.5, 7, x, y);
  LinearModel m{{0.3, -0.2, 0.7}, 0.1};
  auto g = logreg_gradient(x, y, m, 0.5);
  ASSERT_EQ(g.size(), 4u);
  const double h = 1e-6;
  for (std::size_t j = 0; j < 4; ++j) {
    LinearModel up = m, down = m;
    double& a = j < 3 ? up.weights[j] : up.bias;
    double& b = j < 3 ? down.weights[j] : down.bias;
    a += h;
    b -= h;
    double fd = (logreg_loss(x, y, up, 0.5) - logreg_loss(x, y, down, 0.5)) / (2 * h);
    EXPECT_NEAR(g[j], fd, 1e-7) << j;
  }
}

TEST(LogReg, ConvergesToStationaryPoint) {
  Matrix x;
  std::vector<int> y;
  blobs(100, 3, 0.5, 8, x, y);
  LogRegOptions opt;
  opt.c = 0.1;
  auto fit = fit_logreg(x, y, opt);
  EXPECT_LE(fit.gradient_norm, 1e-6);
  auto g = logreg_gradient(x, y, fit.model, 0.1);
  double n2 = 0.0;
  for (double v : g) n2 += v * v;
  EXPECT_LE(std::sqrt(n2), 1e-6);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
}

TEST(Svm, SeparableDataHasNoHingeLoss) {
  Matrix x;
  std::vector<int> y;
  blobs(100, 2, 4.0, 9, x, y);
  SvmOptions opt;
  opt.c = 10.0;
  auto m = fit_linear_svm(x, y, opt);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double margin = (y[i] == 1 ? 1.0 : -1.0) * m.decision(x.row(i));
    EXPECT_GE(margin, 1.0 - 1e-3) << i;
  }
}

TEST(Svm, FlippingLabelsNegatesTheModel) {
  Matrix x;
  std::vector<int> y;
  blobs(80, 3, 0.7, 10, x, y);
  std::vector<int> flipped(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) flipped[i] = 1 - y[i];
  auto a = fit_linear_svm(x, y);
  auto b = fit_linear_svm(x, flipped);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.weights[j], -b.weights[j], 1e-9);
  EXPECT_NEAR(a.bias, -b.bias, 1e-9);
}

TEST(Svm, AgreesWithLogRegDirection) {
  Matrix x;
  std::vector<int> y;
  blobs(400, 2, 1.0, 11, x, y);
  auto svm = fit_linear_svm(x, y);
  auto lr = fit_logreg(x, y).model;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t j = 0; j < 2; ++j) {
    dot += svm.weights[j] * lr.weights[j];
    na += svm.weights[j] * svm.weights[j];
    nb += lr.weights[j] * lr.weights[j];
  }
  const double degrees = std::acos(dot / std::sqrt(na * nb)) * 180.0 / std::numbers::pi;
  EXPECT_LT(degrees, 5.0);
}

TEST(Classifier, JsonRoundTripForEveryKind) {
  Matrix x;
  std::vector<int> y;
  blobs(60, 3, 1.0, 12, x, y);
  for (auto kind : {ModelKind::RandomForest, ModelKind::LogisticRegression, ModelKind::LinearSvm}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.n_estimators = 10;
    spec.seed = 3;
    auto clf = Classifier::train(x, y, spec);
    clf.feature_names = {"a"};
    clf.fingerprint = "fp";
    auto back = Classifier::from_json(clf.to_json());
    EXPECT_EQ(back, clf) << to_string(kind);
    EXPECT_EQ(back.scores(x), clf.scores(x));
  }
  EXPECT_ERROR_CODE(Classifier::from_json(R"({"format":"other"})"), CorruptArtifact);
}

TEST(Classifier, WidthMismatch) {
  Matrix x;
  std::vector<int> y;
  blobs(20, 3, 1.0, 13, x, y);
  ModelSpec spec;
  spec.n_estimators = 3;
  auto clf = Classifier::train(x, y, spec);
  EXPECT_ERROR_CODE(clf.scores(Matrix(2, 4)), SpecMismatch);
}

TEST(Folds, SizesAndPartition) {
  auto even = make_folds(10, 5, 1);
  for (const auto& f : even.folds) EXPECT_EQ(f.size(), 2u);
  auto odd = make_folds(11, 5, 1);
  std::vector<std::size_t> sizes;
  std::set<std::size_t> all;
  for (const auto& f : odd.folds) {
    sizes.push_back(f.size());
    all.insert(f.begin(), f.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
  EXPECT_EQ(all.size(), 11u);
  auto plain = make_folds(4, 2, 1, false);
  EXPECT_EQ(plain.folds[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_ERROR_CODE(make_folds(10, 1, 0), InvalidArgument);
  EXPECT_ERROR_CODE(make_folds(3, 5, 0), TooFewRows);
}

TEST(Folds, StratifiedKeepsClassBalance) {
  std::vector<int> y(40, 0);
  for (std::size_t i = 0; i < 10; ++i) y[i] = 1;
  auto plan = make_stratified_folds(y, 5, 3);
  for (const auto& f : plan.folds) {
    int pos = 0;
    for (auto i : f) pos += y[i];
    EXPECT_EQ(f.size(), 8u);
    EXPECT_EQ(pos, 2);
  }
}

TEST(Cv, PerfectFeatureScoresOne) {
  Matrix x(20, 1);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = y[i] * 10.0 + static_cast<double>(i) * 0.01;
  }
  ModelSpec spec;
  spec.n_estimators = 5;
  auto r = cv_f1(x, y, spec, make_folds(20, 5, 2));
  EXPECT_EQ(r.fold_f1.size(), 5u);
  EXPECT_DOUBLE_EQ(r.mean_f1, 1.0);
}

TEST(Cv, SingleClassTrainingFoldIsDegenerate) {
  Matrix x(4, 1, std::vector<double>{0, 1, 2, 3});
  std::vector<int> y = {0, 0, 1, 1};
  CvPlan plan{{{0, 1}, {2, 3}}, 0, false, false};
  ModelSpec spec;
  spec.n_estimators = 2;
  EXPECT_ERROR_CODE(cv_f1(x, y, spec, plan), DegenerateFold);
  CvPlan overlap{{{0, 1}, {1, 2, 3}}, 0, false, false};
  EXPECT_ERROR_CODE(cv_f1(x, y, spec, overlap), InvalidArgument);
}

TEST(Grid, Sizes) {
  auto forest = enumerate_grid(ForestGrid{}, 1);
  EXPECT_EQ(forest.size(), 40u);
  EXPECT_EQ(forest[0].tree.criterion, Criterion::Gini);
  EXPECT_EQ(forest[1].tree.criterion, Criterion::Entropy);
  EXPECT_EQ(forest[0].n_estimators, 200u);
  EXPECT_EQ(forest[39].n_estimators, 500u);
  ForestGrid small;
  small.n_estimators = {5};
  small.max_depth = {2};
  EXPECT_EQ(enumerate_grid(small, 1).size(), 4u);
  EXPECT_EQ(logreg_grid(1).size(), 3u);
  EXPECT_EQ(svm_grid(1).size(), 3u);
}

TEST(Grid, BestIsFirstMaximum) {
  Matrix x;
  std::vector<int> y;
  blobs(40, 2, 2.0, 14, x, y);
  auto grid = logreg_grid(1);
  auto r = grid_search(x, y, grid, make_folds(40, 4, 1));
  ASSERT_EQ(r.table.size(), 3u);
  for (std::size_t i = 0; i < r.best; ++i) EXPECT_LT(r.table[i].result.mean_f1, r.table[r.best].result.mean_f1);
  for (const auto& e : r.table) EXPECT_LE(e.result.mean_f1, r.table[r.best].result.mean_f1);
  std::ostringstream csv;
  write_grid_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, 5), "index");
}

// Builder over named single columns of one matrix.
MatrixBuilder column_builder(const Matrix& x, std::vector<std::string> names) {
  return [x, names](std::span<const std::string> subset) {
    std::vector<std::size_t> cols;
    for (const auto& s : subset) {
      cols.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), s) - names.begin()));
    }
    return x.select_cols(cols);
  };
}

TEST(Selection, ExhaustiveOrder) {
  Matrix x;
  std::vector<int> y;
  blobs(30, 3, 1.0, 15, x, y);
  std::vector<std::string> names = {"a", "b", "c"};
  ModelSpec spec;
  spec.n_estimators = 5;
  auto r = select_exhaustive(names, column_builder(x, names), y, make_folds(30, 3, 1), spec);
  ASSERT_EQ(r.rows.size(), 7u);
  std::vector<std::vector<std::string>> expected = {{"a"}, {"b"}, {"c"}, {"a", "b"},
                                                    {"a", "c"}, {"b", "c"}, {"a", "b", "c"}};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(r.rows[i].subset, expected[i]);
  EXPECT_EQ(r.rows[0].stage, Stage::Individual);
  EXPECT_EQ(r.rows[6].stage, Stage::Combination);

  std::vector<std::string> one = {"a"};
  EXPECT_EQ(select_exhaustive(one, column_builder(x, names), y, make_folds(30, 3, 1), spec).rows.size(), 1u);
  std::vector<std::string> five = {"a", "b", "c", "d", "e"};
  EXPECT_ERROR_CODE(select_exhaustive(five, column_builder(x, names), y, make_folds(30, 3, 1), spec),
                    InvalidArgument);
}

TEST(Selection, StagewiseRowCounts) {
  Matrix x;
  std::vector<int> y;
  blobs(30, 14, 0.3, 16, x, y);
  std::vector<std::string> names;
  for (int i = 0; i < 14; ++i) names.push_back("f" + std::to_string(100 + i));
  ModelSpec spec;
  spec.n_estimators = 3;
  auto r = select_stagewise(names, column_builder(x, names), y, make_folds(30, 3, 1), spec);
  ASSERT_EQ(r.rows.size(), 40u);
  for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(r.rows[i].stage, Stage::Individual);
  std::set<std::string> chosen;
  for (std::size_t i = 14; i < 40; ++i) {
    EXPECT_GE(r.rows[i].subset.size(), 2u);
    chosen.insert(r.rows[i].subset.begin(), r.rows[i].subset.end());
  }
  EXPECT_EQ(chosen.size(), 5u);
  EXPECT_EQ(r.rows.back().subset.size(), 5u);

  std::vector<std::string> six(names.begin(), names.begin() + 6);
  EXPECT_EQ(select_stagewise(six, column_builder(x, names), y, make_folds(30, 3, 1), spec).rows.size(),
            32u);
}

TEST(Selection, TiesGoToFirstRow) {
  Matrix x(20, 3);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = y[i];
  }
  std::vector<std::string> names = {"a", "b", "c"};
  ModelSpec spec;
  spec.n_estimators = 3;
  auto r = select_exhaustive(names, column_builder(x, names), y, make_folds(20, 4, 1), spec);
  EXPECT_EQ(r.best, 0u);
  EXPECT_EQ(r.best_subset(), (std::vector<std::string>{"a"}));
  std::ostringstream csv;
  write_selection_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "stage,predictors,mean_f1,fold_1,fold_2,fold_3,fold_4,best");
}

}  // namespace
}  // namespace ironyprof::learn
