#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ironyprof/error.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/learn.hpp"

namespace ironyprof::learn {

namespace {

void check_linear_input(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyData, "no training rows");
  if (y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "rows and labels differ in length");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "design matrix has a non-finite value");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

LinearModel unpack(std::span<const double> theta) {
  LinearModel m;
  m.weights.assign(theta.begin(), theta.end() - 1);
  m.bias = theta.back();
  return m;
}

}  // namespace

double LinearModel::decision(std::span<const double> row) const {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * row[j];
  return z;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_loss(const Matrix& x, std::span<const int> y, const LinearModel& model, double c) {
  const double n = static_cast<double>(x.rows());
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double z = model.decision(x.row(r));
    loss += softplus(z) - (y[r] == 1 ? z : 0.0);
  }
  return loss / n + norm2(model.weights) / (2.0 * c * n);
}

std::vector<double> logreg_gradient(const Matrix& x, std::span<const int> y, const LinearModel& model,
                                    double c) {
  const std::size_t d = x.cols();
  const double n = static_cast<double>(x.rows());
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const double residual = sigmoid(model.decision(row)) - (y[r] == 1 ? 1.0 : 0.0);
    for (std::size_t j = 0; j < d; ++j) g[j] += residual * row[j];
    g[d] += residual;
  }
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] / n + model.weights[j] / (c * n);
  g[d] /= n;
  return g;
}

LogRegFit fit_logreg(const Matrix& x, std::span<const int> y, const LogRegOptions& options) {
  check_linear_input(x, y);
  if (!(options.c > 0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  const std::size_t d = x.cols();
  std::vector<double> theta(d + 1, 0.0);
  auto model = unpack(theta);
  double loss = logreg_loss(x, y, model, options.c);
  auto grad = logreg_gradient(x, y, model, options.c);
  double step = 1.0;

  LogRegFit fit;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    const double gnorm2 = norm2(grad);
    if (std::sqrt(gnorm2) < options.tolerance) break;
    std::vector<double> next(d + 1);
    LinearModel next_model;
    double next_loss = 0.0;
    for (int tries = 0;; ++tries) {
      for (std::size_t j = 0; j <= d; ++j) next[j] = theta[j] - step * grad[j];
      next_model = unpack(next);
      next_loss = logreg_loss(x, y, next_model, options.c);
      if (next_loss <= loss - 1e-4 * step * gnorm2 || tries > 60) break;
      step *= 0.5;
    }
    auto next_grad = logreg_gradient(x, y, next_model, options.c);
    // Barzilai-Borwein proposal for the next step.
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t j = 0; j <= d; ++j) {
      const double s = next[j] - theta[j];
      ss += s * s;
      sy += s * (next_grad[j] - grad[j]);
    }
    if (ss == 0.0) {
      theta = std::move(next);
      grad = std::move(next_grad);
      loss = next_loss;
      ++it;
      break;
    }
    step = sy > 0 ? ss / sy : step * 2.0;
    theta = std::move(next);
    grad = std::move(next_grad);
    loss = next_loss;
  }
  fit.model = unpack(theta);
  fit.iterations = it;
  fit.gradient_norm = std::sqrt(norm2(grad));
  return fit;
}

LinearModel fit_linear_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options) {
  check_linear_input(x, y);
  if (!(options.c > 0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> q(n);
  std::vector<double> sign(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = norm2(x.row(i)) + 1.0;
    sign[i] = y[i] == 1 ? 1.0 : -1.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  const double upper = options.c;
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    rng.shuffle(order);
    double pg_max = -1e300;
    double pg_min = 1e300;
    for (auto i : order) {
      auto row = x.row(i);
      double margin = b;
      for (std::size_t j = 0; j < d; ++j) margin += w[j] * row[j];
      const double g = sign[i] * margin - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == upper) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) <= 1e-12) continue;
      const double updated = std::clamp(alpha[i] - g / q[i], 0.0, upper);
      const double delta = (updated - alpha[i]) * sign[i];
      alpha[i] = updated;
      for (std::size_t j = 0; j < d; ++j) w[j] += delta * row[j];
      b += delta;
    }
    if (pg_max - pg_min < options.tolerance) break;
  }
  return LinearModel{std::move(w), b};
}

// ---------------------------------------------------------------------------
// Classifier

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RandomForest: return "rf";
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::LinearSvm: return "svm";
  }
  return "";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rf") return ModelKind::RandomForest;
  if (text == "lr") return ModelKind::LogisticRegression;
  if (text == "svm") return ModelKind::LinearSvm;
  throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(text) + "'");
}

std::string ModelSpec::describe() const {
  std::string out(to_string(kind));
  if (kind == ModelKind::RandomForest) {
    out += " n_estimators=" + std::to_string(n_estimators) + " max_features=" +
           std::string(to_string(tree.max_features)) + " max_depth=" + std::to_string(tree.max_depth) +
           " criterion=" + std::string(to_string(tree.criterion));
    if (!bootstrap) out += " bootstrap=false";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, " C=%g", c);
    out += buf;
    if (kind == ModelKind::LogisticRegression) out += " penalty=l2";
    else out += " kernel=linear";
  }
  return out;
}

ModelSpec selection_spec(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::RandomForest;
  spec.tree = {Criterion::Gini, 6, MaxFeatures::Sqrt, 2};
  spec.n_estimators = 200;
  spec.seed = seed;
  return spec;
}

Classifier Classifier::train(const Matrix& x, std::span<const int> y, const ModelSpec& spec) {
  Classifier clf;
  // Keep only the fields this kind uses so the spec survives serialization.
  clf.spec_ = ModelSpec{};
  clf.spec_.kind = spec.kind;
  clf.spec_.seed = spec.seed;
  if (spec.kind == ModelKind::RandomForest) {
    clf.spec_.tree = spec.tree;
    clf.spec_.n_estimators = spec.n_estimators;
    clf.spec_.bootstrap = spec.bootstrap;
  } else {
    clf.spec_.c = spec.c;
  }
  clf.feature_count_ = x.cols();
  switch (spec.kind) {
    case ModelKind::RandomForest:
      clf.model_ = fit_forest(x, y, spec.tree, spec.n_estimators, spec.seed, spec.bootstrap);
      break;
    case ModelKind::LogisticRegression: {
      LogRegOptions o;
      o.c = spec.c;
      clf.model_ = fit_logreg(x, y, o);
      break;
    }
    case ModelKind::LinearSvm: {
      SvmOptions o;
      o.c = spec.c;
      o.seed = spec.seed;
      clf.model_ = fit_linear_svm(x, y, o);
      break;
    }
  }
  return clf;
}

std::vector<double> Classifier::scores(const Matrix& x) const {
  if (x.cols() != feature_count_) {
    throw Error(ErrorCode::SpecMismatch, "model expects " + std::to_string(feature_count_) +
                                             " columns, matrix has " + std::to_string(x.cols()));
  }
  if (const auto* forest = std::get_if<ForestModel>(&model_)) return forest->predict_proba(x);
  std::vector<double> out(x.rows());
  if (const auto* lr = std::get_if<LogRegFit>(&model_)) {
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(lr->model.decision(x.row(r)));
  } else {
    const auto& svm = std::get<LinearModel>(model_);
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = svm.decision(x.row(r));
  }
  return out;
}

double Classifier::threshold() const noexcept {
  return spec_.kind == ModelKind::LinearSvm ? 0.0 : 0.5;
}

std::vector<int> Classifier::predict(const Matrix& x) const {
  auto s = scores(x);
  std::vector<int> labels(s.size());
  const double t = threshold();
  for (std::size_t i = 0; i < s.size(); ++i) labels[i] = s[i] > t ? 1 : 0;
  return labels;
}

Classifier train_on(const features::FeatureMatrix& matrix, const ModelSpec& spec) {
  auto y = matrix.binary_labels();
  auto clf = Classifier::train(matrix.values, y, spec);
  clf.feature_names = matrix.feature_names();
  clf.fingerprint = matrix.fingerprint();
  clf.tweet_slots = matrix.tweet_slots;
  clf.config_hash = matrix.config_hash;
  clf.root_seed = matrix.seed;
  return clf;
}

Prediction predict_matrix(const Classifier& model, const features::FeatureMatrix& matrix) {
  if (matrix.fingerprint() != model.fingerprint) {
    auto join = [](const std::vector<std::string>& names) {
      std::string s;
      for (const auto& n : names) s += (s.empty() ? "" : ",") + n;
      return s;
    };
    throw Error(ErrorCode::SpecMismatch,
                "matrix fingerprint " + matrix.fingerprint() + " (T=" + std::to_string(matrix.tweet_slots) +
                    ", features " + join(matrix.feature_names()) + ") does not match model fingerprint " +
                    model.fingerprint + " (T=" + std::to_string(model.tweet_slots) + ", features " +
                    join(model.feature_names) + ")");
  }
  Prediction p;
  p.scores = model.scores(matrix.values);
  p.labels.resize(p.scores.size());
  for (std::size_t i = 0; i < p.scores.size(); ++i) p.labels[i] = p.scores[i] > model.threshold() ? 1 : 0;
  return p;
}

}  // namespace ironyprof::learn
