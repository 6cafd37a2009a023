#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace ironyprof::sentiment {

enum class AnalyzerId { RulesLex, Secondary };
enum class Channel { Pos = 0, Neg = 1, Neu = 2 };

inline constexpr std::array<Channel, 3> kChannels = {Channel::Pos, Channel::Neg, Channel::Neu};

/// Per-text sentiment shares in [0, 1], plus the compound score in (-1, 1)
/// when the analyzer produces one.
struct SentimentScores {
  double pos = 0.0;
  double neg = 0.0;
  double neu = 0.0;
  std::optional<double> compound;
  AnalyzerId analyzer = AnalyzerId::RulesLex;

  double channel(Channel c) const noexcept {
    switch (c) {
      case Channel::Pos: return pos;
      case Channel::Neg: return neg;
      case Channel::Neu: return neu;
    }
    return 0.0;
  }
};

/// Token valences, keyed by lowercase token.
class Lexicon {
 public:
  Lexicon() = default;

  /// Parses `token<TAB>valence` lines; tokens are lowercased and must be
  /// unique.
  static Lexicon parse(std::string_view tsv);
  static Lexicon load(const std::filesystem::path& path);
  /// The lexicon bundled with the library.
  static const Lexicon& builtin();

  void add(std::string token, double valence);
  std::optional<double> valence(std::string_view lowercase_token) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, double> entries_;
};

/// Modifier switches and constants for the rule-based analyzer. Defaults
/// follow the published VADER rule set.
struct RuleConfig {
  bool negation = true;
  double negation_scalar = -0.74;
  std::size_t negation_window = 3;

  bool boosters = true;
  double booster_increment = 0.293;

  bool caps_emphasis = true;
  double caps_increment = 0.733;

  bool exclamation = true;
  double exclamation_increment = 0.292;
  std::size_t exclamation_cap = 3;

  bool but_weighting = true;
  double but_before = 0.5;
  double but_after = 1.5;

  /// Normalization constant in compound = s / sqrt(s^2 + alpha).
  double alpha = 15.0;

  /// Every modifier disabled; only lexicon lookup and normalization remain.
  static RuleConfig none();
};

/// compound normalization s / sqrt(s^2 + alpha).
double normalize_compound(double sum, double alpha = 15.0) noexcept;

/// Whitespace tokens with surrounding punctuation stripped (kept when the
/// stripped form would be 2 characters or fewer, so emoticons survive).
/// Case is preserved for the caps rule.
std::vector<std::string> sentiment_tokens(std::string_view text);

/// Lexicon + rules analyzer (negation, boosters, caps, '!', "but").
class RulesAnalyzer {
 public:
  explicit RulesAnalyzer(Lexicon lexicon = Lexicon::builtin(), RuleConfig config = {});

  SentimentScores analyze(std::string_view text) const;

  const RuleConfig& config() const noexcept { return config_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }

 private:
  Lexicon lexicon_;
  RuleConfig config_;
};

/// Key of an externally scored text: a tweet, or one trigram window of it.
struct ScoreKey {
  std::string author_id;
  std::size_t tweet_index = 0;
  std::optional<std::size_t> trigram_index;

  auto operator<=>(const ScoreKey&) const = default;
};

/// Externally computed scores loaded from JSON-lines
/// {"author_id", "tweet_index", "trigram_index" (nullable), "pos", "neg", "neu"}.
class ScoreTable {
 public:
  static ScoreTable parse_jsonl(std::string_view text);
  static ScoreTable load(const std::filesystem::path& path);

  void insert(ScoreKey key, double pos, double neg, double neu);
  const SentimentScores* find(const ScoreKey& key) const;
  std::size_t size() const noexcept { return rows_.size(); }
  bool has_trigrams() const noexcept { return has_trigrams_; }

 private:
  std::map<ScoreKey, SentimentScores> rows_;
  bool has_trigrams_ = false;
};

enum class SecondaryMode { PlainLexicon, Ingested };

/// The second analyzer used for disagreement and contrast features: either
/// plain lexicon shares with no rule modifiers, or verbatim ingested scores
/// clamped to [0, 1].
class SecondaryAnalyzer {
 public:
  static SecondaryAnalyzer plain(Lexicon lexicon = Lexicon::builtin());
  static SecondaryAnalyzer ingested(ScoreTable table);

  SecondaryMode mode() const noexcept { return mode_; }
  /// True when ingested scores include trigram-window rows.
  bool has_window_scores() const noexcept {
    return mode_ == SecondaryMode::Ingested && table_.has_trigrams();
  }

  /// Plain mode scores `text`; ingested mode looks up `key` and throws
  /// MissingScore when absent.
  SentimentScores analyze(std::string_view text, const ScoreKey& key) const;

 private:
  SecondaryMode mode_ = SecondaryMode::PlainLexicon;
  Lexicon lexicon_;
  ScoreTable table_;
};

/// Scores one window of a tweet: (window text, window index or nullopt when
/// the whole tweet is a single degenerate window).
using WindowScorer =
    std::function<SentimentScores(std::string_view window_text, std::optional<std::size_t> window)>;

/// Width-3, stride-1 windows over the tweet's tokens. Fewer than 3 tokens
/// yields one window over the whole tweet; no tokens yields one all-zero
/// score.
std::vector<SentimentScores> trigram_scores(std::span<const std::string> tokens,
                                            const WindowScorer& scorer);

/// max - min of one channel across windows.
double contrast(std::span<const SentimentScores> windows, Channel channel);

/// Population standard deviation.
double population_std(std::span<const double> values);

/// Population sd of an author's per-tweet contrast values.
double contrast_std(std::span<const double> contrast_series);

/// Population sd of an author's per-tweet scores on one channel.
double channel_std(std::span<const SentimentScores> scores, Channel channel);

struct ChannelStats {
  double mean = 0.0;
  double sd = 0.0;
};

/// Standardization statistics for the two analyzers, fitted on training
/// tweets only.
struct DisagreementStats {
  bool fitted = false;
  std::array<ChannelStats, 3> first{};
  std::array<ChannelStats, 3> second{};

  /// Fits mean/sd per channel for each analyzer over paired scores.
  static DisagreementStats fit(std::span<const SentimentScores> first_scores,
                               std::span<const SentimentScores> second_scores);

  /// The same statistics with the analyzer roles exchanged.
  DisagreementStats swapped() const;
};

/// (z_first - z_second)^2 with z = (score - mean) / sd and z = 0 when sd = 0.
double disagreement(const SentimentScores& first, const SentimentScores& second, Channel channel,
                    const DisagreementStats& stats);

}  // namespace ironyprof::sentiment
