#include "ironyprof/eval.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ironyprof/random.hpp"
#include "test_support.hpp"

namespace ironyprof::eval {
namespace {

TEST(Confusion, CountsAndF1) {
  std::vector<int> t = {1, 1, 1, 1, 1, 1, 0, 0, 0};
  std::vector<int> p = {1, 1, 1, 1, 1, 0, 1, 0, 0};
  auto cm = confusion(t, p);
  EXPECT_EQ(cm, (ConfusionMatrix{5, 1, 1, 2}));
  EXPECT_NEAR(cm.f1(), 0.8333, 1e-4);
  auto s = f1(t, p);
  EXPECT_NEAR(s.precision, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.recall, 5.0 / 6.0, 1e-12);
}

TEST(Confusion, ZeroDenominators) {
  std::vector<int> t = {0, 0};
  std::vector<int> p = {0, 0};
  auto s = f1(t, p);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  std::vector<int> one = {1};
  EXPECT_ERROR_CODE(confusion(t, one), LengthMismatch);
  EXPECT_ERROR_CODE(confusion({}, {}), LengthMismatch);
}

TEST(Confusion, RowPercentages) {
  ConfusionMatrix cm{25, 4, 3, 0};
  auto pos = cm.positive_row_percent();
  EXPECT_NEAR(pos[0], 86.21, 0.005);
  EXPECT_NEAR(pos[1], 13.79, 0.005);
  EXPECT_NEAR(pos[0] + pos[1], 100.0, 1e-9);
  auto neg = cm.negative_row_percent();
  EXPECT_DOUBLE_EQ(neg[0], 100.0);
  ConfusionMatrix empty{};
  EXPECT_EQ(empty.positive_row_percent()[0], 0.0);
}

TEST(Roc, ExtremeRankings) {
  std::vector<int> y = {0, 0, 1, 1};
  std::vector<double> good = {0.1, 0.2, 0.8, 0.9};
  std::vector<double> bad = {0.9, 0.8, 0.2, 0.1};
  std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(roc_auc(y, good).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(y, bad).auc, 0.0);
  auto tied = roc_auc(y, flat);
  EXPECT_DOUBLE_EQ(tied.auc, 0.5);
  EXPECT_EQ(tied.points.size(), 2u);
  EXPECT_EQ(tied.points.front(), (std::pair<double, double>{0.0, 0.0}));
  EXPECT_EQ(tied.points.back(), (std::pair<double, double>{1.0, 1.0}));
}

TEST(Roc, MatchesMannWhitney) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<int> y(60);
    std::vector<double> s(60);
    for (std::size_t i = 0; i < 60; ++i) {
      y[i] = static_cast<int>(rng.below(2));
      s[i] = static_cast<double>(rng.below(8)) + 0.5 * y[i];
    }
    y[0] = 0;
    y[1] = 1;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < 60; ++i) {
      for (std::size_t j = 0; j < 60; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    EXPECT_NEAR(roc_auc(y, s).auc, wins / pairs, 1e-12);
  }
}

TEST(Roc, SingleClassIsAnError) {
  std::vector<int> y = {1, 1};
  std::vector<double> s = {0.1, 0.2};
  EXPECT_ERROR_CODE(roc_auc(y, s), SingleClass);
}

TEST(Pca, PointsOnALine) {
  Matrix x(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 2.0 * static_cast<double>(i);
  }
  auto r = pca2(x);
  EXPECT_NEAR(r.components(0, 0), 1.0 / std::sqrt(5.0), 1e-6);
  EXPECT_NEAR(r.components(0, 1), 2.0 / std::sqrt(5.0), 1e-6);
  EXPECT_NEAR(r.explained[0], 1.0, 1e-9);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_NEAR(r.projection(0, 0), -2.0 * std::sqrt(5.0), 1e-6);
}

TEST(Pca, AxisAlignedVariance) {
  Rng rng(2);
  Matrix x(400, 3);
  for (std::size_t i = 0; i < 400; ++i) {
    x(i, 0) = 0.1 * rng.normal();
    x(i, 1) = 5.0 * rng.normal();
    x(i, 2) = 2.0 * rng.normal();
  }
  auto r = pca2(x);
  EXPECT_FALSE(r.rank_deficient);
  EXPECT_GT(std::fabs(r.components(0, 1)), 0.99);
  EXPECT_GT(std::fabs(r.components(1, 2)), 0.99);
  EXPECT_GT(r.eigenvalues[0], r.eigenvalues[1]);
  double dot = 0.0;
  for (std::size_t j = 0; j < 3; ++j) dot += r.components(0, j) * r.components(1, j);
  EXPECT_NEAR(dot, 0.0, 1e-6);
}

TEST(Pca, IsotropicDataStillGivesOrthonormalAxes) {
  Matrix x(4, 2, std::vector<double>{1, 0, -1, 0, 0, 1, 0, -1});
  auto r = pca2(x);
  EXPECT_NEAR(r.eigenvalues[0], r.eigenvalues[1], 1e-9);
  EXPECT_NEAR(r.explained[0] + r.explained[1], 1.0, 1e-9);
  double n0 = 0, n1 = 0, dot = 0;
  for (std::size_t j = 0; j < 2; ++j) {
    n0 += r.components(0, j) * r.components(0, j);
    n1 += r.components(1, j) * r.components(1, j);
    dot += r.components(0, j) * r.components(1, j);
  }
  EXPECT_NEAR(n0, 1.0, 1e-9);
  EXPECT_NEAR(n1, 1.0, 1e-9);
  EXPECT_NEAR(dot, 0.0, 1e-6);
}

TEST(Pca, ShapeErrors) {
  EXPECT_ERROR_CODE(pca2(Matrix(2, 3)), TooFewRows);
  EXPECT_ERROR_CODE(pca2(Matrix(5, 1)), InvalidArgument);
}

TEST(Writers, MetricsJsonAndCsv) {
  std::vector<int> y = {0, 1, 1, 0};
  std::vector<int> p = {0, 1, 0, 0};
  std::vector<double> s = {0.1, 0.9, 0.4, 0.3};
  auto m = evaluate(y, p, s);
  std::ostringstream js;
  write_metrics_json(js, m, 42, "h");
  auto j = nlohmann::json::parse(js.str());
  EXPECT_EQ(j.at("seed"), 42);
  EXPECT_EQ(j.at("config_hash"), "h");

  std::ostringstream roc;
  write_roc_csv(roc, m.roc);
  EXPECT_EQ(roc.str().substr(0, roc.str().find('\n')).find("fpr"), 0u);

  EXPECT_EQ(format_fixed(0.83333, 4), "0.8333");
  EXPECT_EQ(format_fixed(1.0, 2), "1.00");
}

}  // namespace
}  // namespace ironyprof::eval
