#include <algorithm>
#include <cmath>

#include "ironyprof/error.hpp"
#include "ironyprof/learn.hpp"
#include "ironyprof/parallel.hpp"

namespace ironyprof::learn {

std::string_view to_string(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }
std::string_view to_string(MaxFeatures m) { return m == MaxFeatures::Sqrt ? "sqrt" : "all"; }

Criterion parse_criterion(std::string_view text) {
  if (text == "gini") return Criterion::Gini;
  if (text == "entropy") return Criterion::Entropy;
  throw Error(ErrorCode::InvalidArgument, "unknown criterion '" + std::string(text) + "'");
}

MaxFeatures parse_max_features(std::string_view text) {
  if (text == "sqrt") return MaxFeatures::Sqrt;
  if (text == "all") return MaxFeatures::All;
  throw Error(ErrorCode::InvalidArgument, "unknown max_features '" + std::string(text) + "'");
}

double impurity(Criterion criterion, double negatives, double positives) {
  const double n = negatives + positives;
  if (n <= 0) return 0.0;
  const double p0 = negatives / n;
  const double p1 = positives / n;
  if (criterion == Criterion::Gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0) h -= p0 * std::log2(p0);
  if (p1 > 0) h -= p1 * std::log2(p1);
  return h;
}

double Tree::predict_proba(std::span<const double> row) const {
  std::uint32_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& n = nodes[at];
    at = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  const auto& leaf = nodes[at];
  const auto total = leaf.counts[0] + leaf.counts[1];
  return total == 0 ? 0.0 : static_cast<double>(leaf.counts[1]) / static_cast<double>(total);
}

std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[at].feature >= 0) {
      stack.emplace_back(nodes[at].left, d + 1);
      stack.emplace_back(nodes[at].right, d + 1);
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.feature < 0; }));
}

namespace {

void check_xy(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyData, "no training rows");
  if (y.size() != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(x.rows()) + " rows but " +
                                               std::to_string(y.size()) + " labels");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const TreeParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng), features_(x.cols()) {
    for (std::size_t f = 0; f < features_.size(); ++f) features_[f] = f;
    mtry_ = params.max_features == MaxFeatures::All
                ? x.cols()
                : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    mtry_ = std::max<std::size_t>(1, std::min(mtry_, x.cols()));
  }

  Tree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    TreeNode node;
    for (auto r : rows) ++node.counts[y_[r]];
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.push_back(node);
    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    if (pure || depth >= params_.max_depth || rows.size() < params_.min_samples_split) return id;

    auto split = best_split(rows, node);
    if (!split.found) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(std::move(left), depth + 1);
    const auto rr = grow(std::move(right), depth + 1);
    auto& n = tree_.nodes[id];
    n.feature = static_cast<int>(split.feature);
    n.threshold = split.threshold;
    n.left = l;
    n.right = rr;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, const TreeNode& node) {
    const double n = static_cast<double>(rows.size());
    const double parent = impurity(params_.criterion, static_cast<double>(node.counts[0]),
                                   static_cast<double>(node.counts[1]));
    Split best;
    std::size_t tried = 0;
    const std::size_t d = features_.size();
    const bool sampled = params_.max_features == MaxFeatures::Sqrt;
    for (std::size_t k = 0; k < d && tried < mtry_; ++k) {
      if (sampled) {
        const auto j = k + static_cast<std::size_t>(rng_.below(d - k));
        std::swap(features_[k], features_[j]);
      }
      const std::size_t f = features_[k];
      values_.clear();
      for (auto r : rows) values_.emplace_back(x_(r, f), y_[r]);
      std::sort(values_.begin(), values_.end());
      if (values_.front().first == values_.back().first) continue;
      ++tried;

      double left[2] = {0, 0};
      for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        left[values_[i].second] += 1;
        const double a = values_[i].first;
        const double b = values_[i + 1].first;
        if (!(a < b)) continue;
        const double right0 = static_cast<double>(node.counts[0]) - left[0];
        const double right1 = static_cast<double>(node.counts[1]) - left[1];
        const double nl = left[0] + left[1];
        const double nr = right0 + right1;
        const double weighted = (nl * impurity(params_.criterion, left[0], left[1]) +
                                 nr * impurity(params_.criterion, right0, right1)) /
                                n;
        const double decrease = parent - weighted;
        double threshold = a + (b - a) / 2.0;
        if (!(threshold < b)) threshold = a;
        const bool better = !best.found || decrease > best.decrease ||
                            (decrease == best.decrease &&
                             (f < best.feature || (f == best.feature && threshold < best.threshold)));
        if (better) best = {true, f, threshold, decrease};
      }
    }
    if (best.found && best.decrease <= 1e-12) best.found = false;
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  TreeParams params_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::size_t mtry_ = 1;
  std::vector<std::pair<double, int>> values_;
  Tree tree_;
};

}  // namespace

Tree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
              const TreeParams& params, Rng& rng) {
  check_xy(x, y);
  if (rows.empty()) throw Error(ErrorCode::EmptyData, "no training rows");
  if (params.max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be at least 1");
  if (x.cols() == 0) throw Error(ErrorCode::EmptyData, "no feature columns");
  TreeBuilder builder(x, y, params, rng);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

Tree fit_tree(const Matrix& x, std::span<const int> y, const TreeParams& params, Rng& rng) {
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return fit_tree(x, y, rows, params, rng);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
  return rows;
}

ForestModel fit_forest(const Matrix& x, std::span<const int> y, const TreeParams& params,
                       std::size_t n_estimators, std::uint64_t seed, bool bootstrap) {
  check_xy(x, y);
  if (n_estimators == 0) throw Error(ErrorCode::InvalidArgument, "n_estimators must be positive");
  ForestModel forest;
  forest.params = params;
  forest.n_estimators = n_estimators;
  forest.seed = seed;
  forest.bootstrap = bootstrap;
  forest.tree_seeds.resize(n_estimators);
  forest.trees.resize(n_estimators);
  for (std::size_t i = 0; i < n_estimators; ++i) forest.tree_seeds[i] = derive_seed(seed, std::uint64_t{i});
  parallel_for(n_estimators, [&](std::size_t i) {
    const auto tree_seed = forest.tree_seeds[i];
    Rng rng(derive_seed(tree_seed, "features"));
    if (bootstrap) {
      auto rows = bootstrap_sample(x.rows(), derive_seed(tree_seed, "bootstrap"));
      forest.trees[i] = fit_tree(x, y, rows, params, rng);
    } else {
      forest.trees[i] = fit_tree(x, y, params, rng);
    }
  });
  return forest;
}

std::vector<double> ForestModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows(), 0.0);
  parallel_for(x.rows(), [&](std::size_t r) {
    auto row = x.row(r);
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_proba(row);
    out[r] = trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
  });
  return out;
}

}  // namespace ironyprof::learn
