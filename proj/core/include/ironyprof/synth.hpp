#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ironyprof/corpus.hpp"

namespace ironyprof::synth {

struct SynthOptions {
  std::size_t authors = 100;
  std::size_t tweets_per_author = 50;
  /// Per-tweet probability of a class marker term; also scales the class
  /// skew of sentiment words. 0 makes the classes indistinguishable.
  double signal_strength = 0.3;
  std::uint64_t seed = 0;
};

/// Balanced labelled authors (author count must be even). Both classes share
/// filler and topic vocabularies and the same mask tokens; only marker terms
/// and the polarity of sentiment words depend on the class.
std::vector<corpus::AuthorRecord> generate(const SynthOptions& options);

/// Writes `<id>.xml` per author plus `truth.txt` into `dir`.
void write_directory(const std::filesystem::path& dir, const std::vector<corpus::AuthorRecord>& authors);

}  // namespace ironyprof::synth
