#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ironyprof/matrix.hpp"

namespace ironyprof::eval {

/// Binary counts with the ironic class (label 1) as positive.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  double precision() const noexcept;
  double recall() const noexcept;
  double f1() const noexcept;

  /// Row-normalized percentages, rows = actual class:
  /// positive row (tp, fn), negative row (fp, tn). Empty rows are 0.
  std::array<double, 2> positive_row_percent() const noexcept;
  std::array<double, 2> negative_row_percent() const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Throws LengthMismatch when lengths differ or are zero.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// Zero denominators give 0 for the affected metric.
F1Score f1(std::span<const int> y_true, std::span<const int> y_pred);

struct RocCurve {
  /// (fpr, tpr), from (0,0) to (1,1).
  std::vector<std::pair<double, double>> points;
  double auc = 0.0;
};

/// Threshold sweep over distinct scores, descending, ties grouped; AUC by
/// the trapezoidal rule. Throws SingleClass.
RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores);

struct PcaResult {
  /// N x 2 projection of the centered rows.
  Matrix projection;
  /// 2 x d unit loadings.
  Matrix components;
  std::array<double, 2> eigenvalues{};
  /// Share of total variance per component.
  std::array<double, 2> explained{};
  /// Fewer than two nonzero eigenvalues; the affected components are zero.
  bool rank_deficient = false;
  std::size_t iterations = 0;
};

struct PcaOptions {
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  std::size_t max_iterations = 10000;
};

/// Top two principal components by power iteration with deflation. The
/// largest-magnitude loading of each component is made positive. Needs at
/// least 3 rows and 2 columns (TooFewRows / InvalidArgument).
PcaResult pca2(const Matrix& rows, const PcaOptions& options = {});

struct Metrics {
  ConfusionMatrix confusion;
  F1Score f1;
  RocCurve roc;
};

Metrics evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                 std::span<const double> scores);

/// Fixed-point rendering with `digits` decimals.
std::string format_fixed(double value, int digits);

void write_metrics_json(std::ostream& out, const Metrics& metrics, std::uint64_t seed,
                        const std::string& config_hash);
void write_roc_csv(std::ostream& out, const RocCurve& roc);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion);
void write_pca_csv(std::ostream& out, std::span<const std::string> author_ids,
                   std::span<const std::string> labels, const PcaResult& pca);

}  // namespace ironyprof::eval
