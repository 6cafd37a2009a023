#include <algorithm>
#include <numeric>
#include <ostream>

#include "ironyprof/error.hpp"
#include "ironyprof/eval.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/learn.hpp"
#include "ironyprof/parallel.hpp"

namespace ironyprof::learn {

namespace {

std::vector<std::vector<std::size_t>> chunk(const std::vector<std::size_t>& items, std::size_t k) {
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = items.size() / k;
  const std::size_t extra = items.size() % k;
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(items.begin() + static_cast<std::ptrdiff_t>(at),
                    items.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
  }
  return folds;
}

}  // namespace

CvPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffled) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < k) {
    throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffled) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  return CvPlan{chunk(order, k), seed, shuffled, false};
}

CvPlan make_stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (y.size() < k) throw Error(ErrorCode::TooFewRows, "too few rows for the folds");
  CvPlan plan{std::vector<std::vector<std::size_t>>(k), seed, true, true};
  Rng rng(seed);
  std::size_t offset = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(i);
    }
    rng.shuffle(members);
    // Rotate so that the folds receiving an extra row alternate by class.
    auto parts = chunk(members, k);
    for (std::size_t f = 0; f < k; ++f) {
      auto& dst = plan.folds[(f + offset) % k];
      dst.insert(dst.end(), parts[f].begin(), parts[f].end());
    }
    offset += members.size() % k;
  }
  return plan;
}

CvResult cv_f1(const Matrix& x, std::span<const int> y, const ModelSpec& spec, const CvPlan& plan) {
  if (y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "rows and labels differ in length");
  const std::size_t k = plan.folds.size();
  std::vector<char> covered(x.rows(), 0);
  for (const auto& fold : plan.folds) {
    for (auto i : fold) {
      if (i >= x.rows() || covered[i]) throw Error(ErrorCode::InvalidArgument, "folds do not partition the rows");
      covered[i] = 1;
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw Error(ErrorCode::InvalidArgument, "folds do not partition the rows");
  }

  CvResult result;
  result.fold_f1.assign(k, 0.0);
  parallel_for(k, [&](std::size_t f) {
    std::vector<char> held(x.rows(), 0);
    for (auto i : plan.folds[f]) held[i] = 1;
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!held[i]) train_rows.push_back(i);
    }
    std::vector<int> y_train;
    for (auto i : train_rows) y_train.push_back(y[i]);
    const auto positives = std::count(y_train.begin(), y_train.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(y_train.size())) {
      throw Error(ErrorCode::DegenerateFold, "training split of fold " + std::to_string(f + 1) + " has one class");
    }
    auto fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, std::uint64_t{f});
    auto model = Classifier::train(x.select_rows(train_rows), y_train, fold_spec);
    auto predicted = model.predict(x.select_rows(plan.folds[f]));
    std::vector<int> truth;
    for (auto i : plan.folds[f]) truth.push_back(y[i]);
    result.fold_f1[f] = eval::f1(truth, predicted).f1;
  });
  double sum = 0.0;
  for (double v : result.fold_f1) sum += v;
  result.mean_f1 = k == 0 ? 0.0 : sum / static_cast<double>(k);
  return result;
}

std::vector<ModelSpec> enumerate_grid(const ForestGrid& grid, std::uint64_t seed) {
  std::vector<ModelSpec> out;
  for (auto n : grid.n_estimators) {
    for (auto mf : grid.max_features) {
      for (auto depth : grid.max_depth) {
        for (auto crit : grid.criterion) {
          ModelSpec s;
          s.kind = ModelKind::RandomForest;
          s.n_estimators = n;
          s.tree = {crit, depth, mf, 2};
          s.seed = seed;
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

std::vector<ModelSpec> logreg_grid(std::uint64_t seed) {
  std::vector<ModelSpec> out;
  for (double c : {1.0, 0.1, 0.01}) {
    ModelSpec s;
    s.kind = ModelKind::LogisticRegression;
    s.c = c;
    s.seed = seed;
    out.push_back(s);
  }
  return out;
}

std::vector<ModelSpec> svm_grid(std::uint64_t seed) {
  std::vector<ModelSpec> out;
  for (double c : {1.0, 2.0, 3.0}) {
    ModelSpec s;
    s.kind = ModelKind::LinearSvm;
    s.c = c;
    s.seed = seed;
    out.push_back(s);
  }
  return out;
}

GridResult grid_search(const Matrix& x, std::span<const int> y, std::span<const ModelSpec> grid,
                       const CvPlan& plan) {
  if (grid.empty()) throw Error(ErrorCode::EmptyData, "empty parameter grid");
  GridResult result;
  result.table.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    result.table[i].spec = grid[i];
    result.table[i].result = cv_f1(x, y, grid[i], plan);
  });
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (result.table[i].result.mean_f1 > result.table[result.best].result.mean_f1) result.best = i;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Selection

std::string_view to_string(Stage stage) { return stage == Stage::Individual ? "individual" : "combination"; }

MatrixBuilder builder_for(const features::FeatureMatrix& matrix) {
  return [&matrix](std::span<const std::string> subset) { return matrix.select(subset).values; };
}

namespace {

// Index subsets of {0..n-1} with the given size, lexicographic.
void combinations(std::size_t n, std::size_t size, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> pick(size);
  std::iota(pick.begin(), pick.end(), 0);
  if (size == 0 || size > n) return;
  for (;;) {
    out.push_back(pick);
    std::size_t i = size;
    while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
  }
}

void evaluate_rows(std::vector<SelectionRow>& rows, std::size_t first, const MatrixBuilder& build,
                   std::span<const int> y, const CvPlan& plan, const ModelSpec& spec) {
  parallel_for(rows.size() - first, [&](std::size_t i) {
    auto& row = rows[first + i];
    row.result = cv_f1(build(row.subset), y, spec, plan);
  });
}

std::size_t best_row(const std::vector<SelectionRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].result.mean_f1 > rows[best].result.mean_f1) best = i;
  }
  return best;
}

}  // namespace

SelectionReport select_exhaustive(std::span<const std::string> features, const MatrixBuilder& build,
                                  std::span<const int> y, const CvPlan& plan, const ModelSpec& spec) {
  const std::size_t c = features.size();
  if (c < 1 || c > 4) {
    throw Error(ErrorCode::InvalidArgument, "exhaustive selection takes 1 to 4 features, got " + std::to_string(c));
  }
  SelectionReport report;
  for (std::size_t size = 1; size <= c; ++size) {
    std::vector<std::vector<std::size_t>> picks;
    combinations(c, size, picks);
    for (const auto& p : picks) {
      SelectionRow row;
      row.stage = size == 1 ? Stage::Individual : Stage::Combination;
      for (auto i : p) row.subset.push_back(features[i]);
      report.rows.push_back(std::move(row));
    }
  }
  evaluate_rows(report.rows, 0, build, y, plan, spec);
  report.best = best_row(report.rows);
  return report;
}

SelectionReport select_stagewise(std::span<const std::string> features, const MatrixBuilder& build,
                                 std::span<const int> y, const CvPlan& plan, const ModelSpec& spec,
                                 std::size_t top) {
  const std::size_t m = features.size();
  if (top < 1 || m <= top) {
    throw Error(ErrorCode::InvalidArgument, "stagewise selection needs more than " + std::to_string(top) +
                                                " features, got " + std::to_string(m));
  }
  SelectionReport report;
  for (const auto& f : features) report.rows.push_back({{f}, Stage::Individual, {}});
  evaluate_rows(report.rows, 0, build, y, plan, spec);

  std::vector<std::size_t> ranked(m);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](auto a, auto b) {
    return report.rows[a].result.mean_f1 > report.rows[b].result.mean_f1;
  });
  std::vector<std::size_t> chosen(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top));
  std::sort(chosen.begin(), chosen.end());

  const std::size_t first = report.rows.size();
  for (std::size_t size = 2; size <= top; ++size) {
    std::vector<std::vector<std::size_t>> picks;
    combinations(top, size, picks);
    for (const auto& p : picks) {
      SelectionRow row;
      row.stage = Stage::Combination;
      for (auto i : p) row.subset.push_back(features[chosen[i]]);
      report.rows.push_back(std::move(row));
    }
  }
  evaluate_rows(report.rows, first, build, y, plan, spec);
  report.best = best_row(report.rows);
  return report;
}

void write_selection_csv(std::ostream& out, const SelectionReport& report) {
  std::size_t folds = 0;
  for (const auto& r : report.rows) folds = std::max(folds, r.result.fold_f1.size());
  out << "stage,predictors,mean_f1";
  for (std::size_t f = 0; f < folds; ++f) out << ",fold_" << f + 1;
  out << ",best\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    out << to_string(r.stage) << ',';
    for (std::size_t j = 0; j < r.subset.size(); ++j) out << (j ? ";" : "") << r.subset[j];
    out << ',' << eval::format_fixed(r.result.mean_f1, 6);
    for (double v : r.result.fold_f1) out << ',' << eval::format_fixed(v, 6);
    out << ',' << (i == report.best ? 1 : 0) << '\n';
  }
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  std::size_t folds = 0;
  for (const auto& e : result.table) folds = std::max(folds, e.result.fold_f1.size());
  out << "index,model,n_estimators,max_features,max_depth,criterion,C,mean_f1";
  for (std::size_t f = 0; f < folds; ++f) out << ",fold_" << f + 1;
  out << ",best\n";
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& e = result.table[i];
    const auto& s = e.spec;
    out << i << ',' << to_string(s.kind) << ',';
    if (s.kind == ModelKind::RandomForest) {
      out << s.n_estimators << ',' << to_string(s.tree.max_features) << ',' << s.tree.max_depth << ','
          << to_string(s.tree.criterion) << ",";
    } else {
      out << ",,,," << eval::format_fixed(s.c, 4);
    }
    out << ',' << eval::format_fixed(e.result.mean_f1, 6);
    for (double v : e.result.fold_f1) out << ',' << eval::format_fixed(v, 6);
    out << ',' << (i == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace ironyprof::learn
