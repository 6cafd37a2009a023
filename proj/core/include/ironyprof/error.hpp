#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ironyprof {

/// Failure categories raised across the library. The CLI maps each to a
/// distinct nonzero exit status.
enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  MalformedXml,
  EmptyAuthor,
  BadLine,
  DuplicateId,
  TooFewAuthors,
  MissingScore,
  StatsNotFitted,
  EmptyCorpus,
  DegenerateVocab,
  NoInDomainTokens,
  TooFewPoints,
  EmptyVocabulary,
  MissingLabelClass,
  UnknownFeature,
  UnfittedExtractor,
  EmptyData,
  SpecMismatch,
  NonFiniteFeature,
  TooFewRows,
  DegenerateFold,
  LengthMismatch,
  SingleClass,
  RankDeficient,
  CorruptArtifact,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ironyprof
