#include "ironyprof/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::eval {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

double ConfusionMatrix::precision() const noexcept {
  return ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
}

double ConfusionMatrix::recall() const noexcept {
  return ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
}

double ConfusionMatrix::f1() const noexcept {
  const double p = precision();
  const double r = recall();
  return ratio(2.0 * p * r, p + r);
}

std::array<double, 2> ConfusionMatrix::positive_row_percent() const noexcept {
  const double n = static_cast<double>(tp + fn);
  return {100.0 * ratio(static_cast<double>(tp), n), 100.0 * ratio(static_cast<double>(fn), n)};
}

std::array<double, 2> ConfusionMatrix::negative_row_percent() const noexcept {
  const double n = static_cast<double>(fp + tn);
  return {100.0 * ratio(static_cast<double>(fp), n), 100.0 * ratio(static_cast<double>(tn), n)};
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw Error(ErrorCode::LengthMismatch, "need equal, non-zero lengths (" + std::to_string(y_true.size()) +
                                               " vs " + std::to_string(y_pred.size()) + ")");
  }
  ConfusionMatrix c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == 1;
    const bool predicted = y_pred[i] == 1;
    if (actual && predicted) ++c.tp;
    else if (actual) ++c.fn;
    else if (predicted) ++c.fp;
    else ++c.tn;
  }
  return c;
}

F1Score f1(std::span<const int> y_true, std::span<const int> y_pred) {
  auto c = confusion(y_true, y_pred);
  return {c.precision(), c.recall(), c.f1()};
}

RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels and scores differ in length");
  }
  std::uint64_t pos = 0;
  for (int y : y_true) pos += y == 1 ? 1 : 0;
  const std::uint64_t neg = y_true.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "ROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  // Twice the area in units of one (positive, negative) pair.
  std::uint64_t twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::uint64_t dtp = 0;
    std::uint64_t dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (y_true[order[i]] == 1) ++dtp;
      else ++dfp;
    }
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos));
  }
  roc.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

// ---------------------------------------------------------------------------
// PCA

namespace {

// y = C v with C the covariance of the centered rows, never materialized.
std::vector<double> covariance_times(const Matrix& centered, std::span<const double> v) {
  const std::size_t n = centered.rows();
  const std::size_t d = centered.cols();
  std::vector<double> out(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = centered.row(r);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += row[j] * v[j];
    for (std::size_t j = 0; j < d; ++j) out[j] += dot * row[j];
  }
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (auto& x : out) x *= scale;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void remove_component(std::vector<double>& v, std::span<const double> u) {
  const double p = dot(v, u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * u[i];
}

bool normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  if (norm == 0.0 || !std::isfinite(norm)) return false;
  for (auto& x : v) x /= norm;
  return true;
}

void orient(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0) {
    for (auto& x : v) x = -x;
  }
}

}  // namespace

PcaResult pca2(const Matrix& rows, const PcaOptions& options) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n < 3) throw Error(ErrorCode::TooFewRows, "PCA needs at least 3 rows, got " + std::to_string(n));
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 columns");

  Matrix centered = rows;
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += rows(r, j);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  double total_variance = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      centered(r, j) -= mean[j];
      total_variance += centered(r, j) * centered(r, j);
    }
  }
  total_variance /= static_cast<double>(n - 1);

  PcaResult result;
  result.components = Matrix(2, d);
  result.projection = Matrix(n, 2);
  const double zero_tol = 1e-12 * std::max(total_variance, 1e-300);

  Rng rng(options.seed);
  std::vector<std::vector<double>> found;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    for (const auto& u : found) remove_component(v, u);
    double lambda = 0.0;
    bool ok = normalize(v);
    for (std::size_t it = 0; ok && it < options.max_iterations; ++it) {
      auto w = covariance_times(centered, v);
      for (const auto& u : found) remove_component(w, u);
      lambda = dot(w, v);
      if (!normalize(w)) {
        lambda = 0.0;
        break;
      }
      double change = 0.0;
      for (std::size_t j = 0; j < d; ++j) change = std::max(change, std::abs(w[j] - v[j]));
      v = std::move(w);
      ++result.iterations;
      if (change < options.tolerance) break;
    }
    if (!ok || lambda <= zero_tol) {
      result.rank_deficient = true;
      break;
    }
    orient(v);
    result.eigenvalues[c] = lambda;
    result.explained[c] = total_variance > 0 ? lambda / total_variance : 0.0;
    for (std::size_t j = 0; j < d; ++j) result.components(c, j) = v[j];
    for (std::size_t r = 0; r < n; ++r) result.projection(r, c) = dot(centered.row(r), v);
    found.push_back(std::move(v));
  }
  return result;
}

Metrics evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                 std::span<const double> scores) {
  Metrics m;
  m.confusion = confusion(y_true, y_pred);
  m.f1 = {m.confusion.precision(), m.confusion.recall(), m.confusion.f1()};
  m.roc = roc_auc(y_true, scores);
  return m;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

void write_metrics_json(std::ostream& out, const Metrics& m, std::uint64_t seed,
                        const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["precision"] = m.f1.precision;
  j["recall"] = m.f1.recall;
  j["f1"] = m.f1.f1;
  j["auc"] = m.roc.auc;
  const auto& c = m.confusion;
  j["confusion"] = {{"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}, {"tn", c.tn}};
  auto pr = c.positive_row_percent();
  auto nr = c.negative_row_percent();
  j["confusion_percent"] = {{"ironic", {format_fixed(pr[0], 2), format_fixed(pr[1], 2)}},
                            {"not_ironic", {format_fixed(nr[0], 2), format_fixed(nr[1], 2)}}};
  j["support"] = c.tp + c.fn + c.fp + c.tn;
  out << j.dump(2) << '\n';
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "fpr,tpr\n";
  for (const auto& [x, y] : roc.points) out << format_fixed(x, 10) << ',' << format_fixed(y, 10) << '\n';
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& c) {
  auto pr = c.positive_row_percent();
  auto nr = c.negative_row_percent();
  out << "actual,predicted_ironic,predicted_not_ironic,percent_ironic,percent_not_ironic\n";
  out << "I," << c.tp << ',' << c.fn << ',' << format_fixed(pr[0], 2) << ',' << format_fixed(pr[1], 2) << '\n';
  out << "NI," << c.fp << ',' << c.tn << ',' << format_fixed(nr[0], 2) << ',' << format_fixed(nr[1], 2) << '\n';
}

void write_pca_csv(std::ostream& out, std::span<const std::string> author_ids,
                   std::span<const std::string> labels, const PcaResult& pca) {
  out << "author_id,pc1,pc2,label\n";
  for (std::size_t r = 0; r < pca.projection.rows(); ++r) {
    out << author_ids[r] << ',' << format_fixed(pca.projection(r, 0), 10) << ','
        << format_fixed(pca.projection(r, 1), 10) << ',' << (r < labels.size() ? labels[r] : "") << '\n';
  }
}

}  // namespace ironyprof::eval
