#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ironyprof/matrix.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::features {
struct FeatureMatrix;
}

namespace ironyprof::learn {

// ---------------------------------------------------------------------------
// Trees

enum class Criterion { Gini, Entropy };
enum class MaxFeatures { Sqrt, All };

std::string_view to_string(Criterion c);
std::string_view to_string(MaxFeatures m);
Criterion parse_criterion(std::string_view text);
MaxFeatures parse_max_features(std::string_view text);

struct TreeParams {
  Criterion criterion = Criterion::Gini;
  std::size_t max_depth = 6;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::size_t min_samples_split = 2;

  bool operator==(const TreeParams&) const = default;
};

/// Node impurity for a node with `negatives` and `positives` rows.
double impurity(Criterion criterion, double negatives, double positives);

struct TreeNode {
  /// -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  /// Training rows reaching the node, by class (0, 1).
  std::uint64_t counts[2] = {0, 0};

  bool operator==(const TreeNode&) const = default;
};

/// CART tree; rows with x[feature] <= threshold go left.
class Tree {
 public:
  std::vector<TreeNode> nodes;

  /// Positive-class fraction of the leaf reached by `row`.
  double predict_proba(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;
};

/// Greedy best-split tree over the given training rows (duplicates allowed,
/// as in a bootstrap sample). With max_features = sqrt each node shuffles
/// the features and evaluates them until ceil(sqrt(d)) non-constant ones have
/// been tried. Ties go to the lowest feature, then lowest threshold.
Tree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
              const TreeParams& params, Rng& rng);
Tree fit_tree(const Matrix& x, std::span<const int> y, const TreeParams& params, Rng& rng);

/// N draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);

struct ForestModel {
  TreeParams params;
  std::size_t n_estimators = 0;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  std::vector<std::uint64_t> tree_seeds;
  std::vector<Tree> trees;

  /// Mean over trees of the leaf positive fraction.
  std::vector<double> predict_proba(const Matrix& x) const;

  bool operator==(const ForestModel&) const = default;
};

/// Tree i uses seed derive_seed(seed, i) for both its bootstrap draw and its
/// feature sampling, so the result does not depend on the job count.
ForestModel fit_forest(const Matrix& x, std::span<const int> y, const TreeParams& params,
                       std::size_t n_estimators, std::uint64_t seed, bool bootstrap = true);

// ---------------------------------------------------------------------------
// Linear models

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double decision(std::span<const double> row) const;
  bool operator==(const LinearModel&) const = default;
};

struct LogRegOptions {
  double c = 1.0;
  std::size_t max_iterations = 20000;
  double tolerance = 1e-6;
};

/// Mean log-loss + ||w||^2 / (2 C N); the bias is not penalized.
double logreg_loss(const Matrix& x, std::span<const int> y, const LinearModel& model, double c);
/// Gradient of logreg_loss: d/dw in [0, d), d/db last.
std::vector<double> logreg_gradient(const Matrix& x, std::span<const int> y, const LinearModel& model,
                                    double c);

struct LogRegFit {
  LinearModel model;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;

  bool operator==(const LogRegFit&) const = default;
};

/// Full-batch gradient descent with Barzilai-Borwein step proposals and
/// Armijo backtracking, stopping when the gradient norm drops below the
/// tolerance.
LogRegFit fit_logreg(const Matrix& x, std::span<const int> y, const LogRegOptions& options = {});

double sigmoid(double z) noexcept;

struct SvmOptions {
  double c = 1.0;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// C * sum hinge + ||(w, b)||^2 / 2, the same minimizer as mean hinge +
/// ||(w, b)||^2 / (2 C N). Solved by dual coordinate descent in a seeded
/// order each epoch; the bias is an extra constant-1 feature.
LinearModel fit_linear_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options = {});

// ---------------------------------------------------------------------------
// Model specs and fitted classifiers

enum class ModelKind { RandomForest, LogisticRegression, LinearSvm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::RandomForest;
  TreeParams tree;
  std::size_t n_estimators = 200;
  bool bootstrap = true;
  double c = 1.0;
  std::uint64_t seed = 0;

  /// Short human-readable parameter string, e.g.
  /// "rf n_estimators=200 max_features=sqrt max_depth=6 criterion=gini".
  std::string describe() const;
  bool operator==(const ModelSpec&) const = default;
};

/// The fixed classifier used during feature selection: gini, depth 6, 200
/// trees, sqrt features.
ModelSpec selection_spec(std::uint64_t seed);

class Classifier {
 public:
  Classifier() = default;

  static Classifier train(const Matrix& x, std::span<const int> y, const ModelSpec& spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t feature_count() const noexcept { return feature_count_; }

  /// Forest: positive vote fraction. LR: probability. SVM: decision value.
  std::vector<double> scores(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
  /// Score above which a row is labelled positive.
  double threshold() const noexcept;

  const std::variant<ForestModel, LogRegFit, LinearModel>& model() const noexcept { return model_; }

  /// Identity of the training matrix layout, checked by predict_matrix.
  std::vector<std::string> feature_names;
  std::string fingerprint;
  std::size_t tweet_slots = 0;
  std::string config_hash;
  std::uint64_t root_seed = 0;

  std::string to_json() const;
  static Classifier from_json(std::string_view json);
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

  bool operator==(const Classifier&) const = default;

 private:
  ModelSpec spec_;
  std::size_t feature_count_ = 0;
  std::variant<ForestModel, LogRegFit, LinearModel> model_;
};

/// Fits on a feature matrix and records its fingerprint and names.
Classifier train_on(const features::FeatureMatrix& matrix, const ModelSpec& spec);

struct Prediction {
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Throws SpecMismatch when the matrix layout differs from training.
Prediction predict_matrix(const Classifier& model, const features::FeatureMatrix& matrix);

// ---------------------------------------------------------------------------
// Cross-validation, grid search, selection

struct CvPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;
  bool shuffled = true;
  bool stratified = false;
};

/// Seeded shuffle (unless shuffled = false) then contiguous chunks; the
/// first N mod k folds get one extra row. Throws TooFewRows when N < k.
CvPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffled = true);
/// Same chunking applied to each class separately, folds merged by index.
CvPlan make_stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed);

struct CvResult {
  double mean_f1 = 0.0;
  std::vector<double> fold_f1;
};

/// Fits on each fold's complement and scores binary F1 on the fold.
/// Throws DegenerateFold when a training split has a single class.
CvResult cv_f1(const Matrix& x, std::span<const int> y, const ModelSpec& spec, const CvPlan& plan);

/// Appendix-style grid for the forest: n_estimators x max_features x
/// max_depth x criterion.
struct ForestGrid {
  std::vector<std::size_t> n_estimators{200, 500};
  std::vector<MaxFeatures> max_features{MaxFeatures::All, MaxFeatures::Sqrt};
  std::vector<std::size_t> max_depth{4, 5, 6, 7, 8};
  std::vector<Criterion> criterion{Criterion::Gini, Criterion::Entropy};
};

/// Candidates in nested order n_estimators, max_features, max_depth,
/// criterion (last varies fastest).
std::vector<ModelSpec> enumerate_grid(const ForestGrid& grid, std::uint64_t seed);
/// L2 logistic regression over C in {1.0, 0.1, 0.01}.
std::vector<ModelSpec> logreg_grid(std::uint64_t seed);
/// Linear SVM over C in {1, 2, 3}.
std::vector<ModelSpec> svm_grid(std::uint64_t seed);

struct GridEntry {
  ModelSpec spec;
  CvResult result;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridEntry> table;

  const ModelSpec& best_spec() const { return table.at(best).spec; }
};

/// Evaluates every candidate; ties go to the earliest. Throws EmptyData for
/// an empty grid.
GridResult grid_search(const Matrix& x, std::span<const int> y, std::span<const ModelSpec> grid,
                       const CvPlan& plan);

enum class Stage { Individual, Combination };
std::string_view to_string(Stage stage);

struct SelectionRow {
  std::vector<std::string> subset;
  Stage stage = Stage::Combination;
  CvResult result;
};

struct SelectionReport {
  std::string category;
  std::vector<SelectionRow> rows;
  std::size_t best = 0;

  const std::vector<std::string>& best_subset() const { return rows.at(best).subset; }
};

/// Builds the design matrix for a feature subset.
using MatrixBuilder = std::function<Matrix(std::span<const std::string> subset)>;

MatrixBuilder builder_for(const features::FeatureMatrix& matrix);

/// All 2^c - 1 non-empty subsets, by size then lexicographically by position
/// in `features`. Requires 1 <= c <= 4.
SelectionReport select_exhaustive(std::span<const std::string> features, const MatrixBuilder& build,
                                  std::span<const int> y, const CvPlan& plan, const ModelSpec& spec);

/// Stage 1 scores every feature alone; the `top` best (ties by position)
/// then have every subset of size >= 2 scored. Requires m > top.
SelectionReport select_stagewise(std::span<const std::string> features, const MatrixBuilder& build,
                                 std::span<const int> y, const CvPlan& plan, const ModelSpec& spec,
                                 std::size_t top = 5);

void write_selection_csv(std::ostream& out, const SelectionReport& report);
void write_grid_csv(std::ostream& out, const GridResult& result);

}  // namespace ironyprof::learn
