#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "ironyprof/error.hpp"
#include "ironyprof/hash.hpp"
#include "ironyprof/matrix.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::EmptyAuthor: return "EmptyAuthor";
    case ErrorCode::BadLine: return "BadLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::TooFewAuthors: return "TooFewAuthors";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::StatsNotFitted: return "StatsNotFitted";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DegenerateVocab: return "DegenerateVocab";
    case ErrorCode::NoInDomainTokens: return "NoInDomainTokens";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::MissingLabelClass: return "MissingLabelClass";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::UnfittedExtractor: return "UnfittedExtractor";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::DegenerateFold: return "DegenerateFold";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::CorruptArtifact: return "CorruptArtifact";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Seeds and sampling

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream) noexcept {
  return mix64(parent ^ fnv1a64(stream));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) + index);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling keeps the draw unbiased for any bound.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::categorical(std::span<const double> weights, double total) {
  double target = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0.0) return i;
  }
  // Rounding can leave a sliver of mass; fall back to the last nonzero bin.
  for (std::size_t i = weights.size(); i > 0; --i) {
    if (weights[i - 1] > 0.0) return i - 1;
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

// ---------------------------------------------------------------------------
// Parallelism

namespace {
std::atomic<unsigned> g_jobs{1};
}

void set_default_jobs(unsigned jobs) { g_jobs.store(jobs == 0 ? 1 : jobs); }
unsigned default_jobs() { return g_jobs.load(); }

// ---------------------------------------------------------------------------
// Hashing

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::InvalidArgument, "matrix data size does not match shape");
  }
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < indices.size(); ++j) out(r, j) = (*this)(r, indices[j]);
  }
  return out;
}

}  // namespace ironyprof
