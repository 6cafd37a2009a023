#include "ironyprof/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "resources.hpp"

namespace ironyprof::sentiment {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_all_caps(std::string_view s) {
  bool has_alpha = false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      has_alpha = true;
      if (!std::isupper(u)) return false;
    }
  }
  return has_alpha;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

const std::unordered_set<std::string>& negations() {
  static const std::unordered_set<std::string> words = {
      "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "dont",
      "hadnt", "hasnt", "havent", "isnt", "mightnt", "mustnt", "neither", "neednt", "never",
      "none", "nope", "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt",
      "uhuh", "wasnt", "werent", "without", "wont", "wouldnt", "rarely", "seldom", "despite"};
  return words;
}

bool is_negation(std::string_view lower) {
  if (negations().contains(std::string(lower))) return true;
  return lower.size() > 3 && lower.substr(lower.size() - 3) == "n't";
}

// +1 for intensifiers, -1 for dampeners, 0 otherwise.
int booster_direction(std::string_view lower) {
  static const std::unordered_set<std::string> up = {
      "absolutely", "amazingly", "awfully", "completely", "decidedly", "deeply", "enormously",
      "entirely", "especially", "extremely", "fabulously", "highly", "incredibly", "intensely",
      "really", "remarkably", "so", "thoroughly", "totally", "tremendously", "uber",
      "unbelievably", "utterly", "very", "super", "most", "more"};
  static const std::unordered_set<std::string> down = {
      "almost", "barely", "hardly", "kinda", "less", "little", "marginally", "occasionally",
      "partly", "scarcely", "slightly", "somewhat", "sorta"};
  std::string key(lower);
  if (up.contains(key)) return 1;
  if (down.contains(key)) return -1;
  return 0;
}

// Positive mass sum(s + 1), negative mass sum(s - 1), neutral count.
struct TokenMass {
  double pos = 0.0;
  double neg = 0.0;
  double neu = 0.0;
};

TokenMass sift(std::span<const double> sentiments) {
  TokenMass m;
  for (double s : sentiments) {
    if (s > 0.0) {
      m.pos += s + 1.0;
    } else if (s < 0.0) {
      m.neg += s - 1.0;
    } else {
      m.neu += 1.0;
    }
  }
  return m;
}

SentimentScores shares(TokenMass m, double compound, AnalyzerId id) {
  SentimentScores out;
  out.analyzer = id;
  out.compound = compound;
  const double total = m.pos + std::fabs(m.neg) + m.neu;
  if (total <= 0.0) {
    out.compound = 0.0;
    return out;
  }
  out.pos = std::fabs(m.pos / total);
  out.neg = std::fabs(m.neg / total);
  out.neu = std::fabs(m.neu / total);
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Lexicon

Lexicon Lexicon::parse(std::string_view tsv) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < tsv.size()) {
    std::size_t end = tsv.find('\n', start);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorCode::BadLine, "lexicon line " + std::to_string(line_no) +
                                          ": expected token<TAB>valence");
    }
    std::string value(line.substr(tab + 1));
    auto cut = value.find('\t');
    if (cut != std::string::npos) value.resize(cut);
    double valence = 0.0;
    try {
      std::size_t used = 0;
      valence = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadLine,
                  "lexicon line " + std::to_string(line_no) + ": bad valence '" + value + "'");
    }
    std::string token = to_lower(line.substr(0, tab));
    if (lex.entries_.contains(token)) {
      throw Error(ErrorCode::DuplicateId, "lexicon token '" + token + "' repeated on line " +
                                              std::to_string(line_no));
    }
    lex.entries_.emplace(std::move(token), valence);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(resources::lexicon_tsv());
  return lex;
}

void Lexicon::add(std::string token, double valence) {
  entries_[to_lower(token)] = valence;
}

std::optional<double> Lexicon::valence(std::string_view lowercase_token) const {
  auto it = entries_.find(std::string(lowercase_token));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Rules analyzer

RuleConfig RuleConfig::none() {
  RuleConfig c;
  c.negation = false;
  c.boosters = false;
  c.caps_emphasis = false;
  c.exclamation = false;
  c.but_weighting = false;
  return c;
}

double normalize_compound(double sum, double alpha) noexcept {
  return sum / std::sqrt(sum * sum + alpha);
}

std::vector<std::string> sentiment_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  auto is_ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    if (j > i) {
      std::string_view raw = text.substr(i, j - i);
      std::size_t b = 0;
      std::size_t e = raw.size();
      while (b < e && is_punct(raw[b])) ++b;
      while (e > b && is_punct(raw[e - 1])) --e;
      std::string_view stripped = raw.substr(b, e - b);
      tokens.emplace_back(stripped.size() <= 2 ? raw : stripped);
    }
    i = j;
  }
  return tokens;
}

RulesAnalyzer::RulesAnalyzer(Lexicon lexicon, RuleConfig config)
    : lexicon_(std::move(lexicon)), config_(config) {}

SentimentScores RulesAnalyzer::analyze(std::string_view text) const {
  const std::vector<std::string> tokens = sentiment_tokens(text);
  if (tokens.empty()) return shares({}, 0.0, AnalyzerId::RulesLex);

  std::vector<std::string> lower;
  lower.reserve(tokens.size());
  for (const auto& t : tokens) lower.push_back(to_lower(t));

  // The caps rule only fires when some, but not all, tokens are in caps.
  std::size_t caps_count = 0;
  for (const auto& t : tokens) caps_count += is_all_caps(t) ? 1 : 0;
  const bool caps_differential = caps_count > 0 && caps_count < tokens.size();

  std::vector<double> sentiments(tokens.size(), 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (config_.boosters && booster_direction(lower[i]) != 0) continue;
    auto base = lexicon_.valence(lower[i]);
    if (!base || *base == 0.0) continue;
    double v = *base;

    if (config_.caps_emphasis && caps_differential && is_all_caps(tokens[i])) {
      v += sign_of(v) * config_.caps_increment;
    }
    if (config_.boosters) {
      static constexpr std::array<double, 3> kDecay = {1.0, 0.95, 0.9};
      for (std::size_t j = 1; j <= 3 && j <= i; ++j) {
        const auto& prev = lower[i - j];
        if (lexicon_.valence(prev)) continue;
        int dir = booster_direction(prev);
        if (dir == 0) continue;
        double s = dir * config_.booster_increment;
        if (v < 0.0) s = -s;
        if (config_.caps_emphasis && caps_differential && is_all_caps(tokens[i - j])) {
          s += sign_of(v) * config_.caps_increment;
        }
        v += s * kDecay[j - 1];
      }
    }
    if (config_.negation) {
      for (std::size_t j = 1; j <= config_.negation_window && j <= i; ++j) {
        if (is_negation(lower[i - j])) v *= config_.negation_scalar;
      }
    }
    sentiments[i] = v;
  }

  if (config_.but_weighting) {
    auto it = std::find(lower.begin(), lower.end(), "but");
    if (it != lower.end()) {
      auto pivot = static_cast<std::size_t>(it - lower.begin());
      for (std::size_t i = 0; i < sentiments.size(); ++i) {
        if (i < pivot) {
          sentiments[i] *= config_.but_before;
        } else if (i > pivot) {
          sentiments[i] *= config_.but_after;
        }
      }
    }
  }

  double sum = 0.0;
  for (double s : sentiments) sum += s;

  double emphasis = 0.0;
  if (config_.exclamation) {
    auto bangs = static_cast<std::size_t>(std::count(text.begin(), text.end(), '!'));
    emphasis = static_cast<double>(std::min(bangs, config_.exclamation_cap)) *
               config_.exclamation_increment;
  }
  sum += sign_of(sum) * emphasis;

  TokenMass mass = sift(sentiments);
  if (mass.pos > std::fabs(mass.neg)) {
    mass.pos += emphasis;
  } else if (mass.pos < std::fabs(mass.neg)) {
    mass.neg -= emphasis;
  }
  return shares(mass, normalize_compound(sum, config_.alpha), AnalyzerId::RulesLex);
}

// ---------------------------------------------------------------------------
// Ingested scores and the secondary analyzer

ScoreTable ScoreTable::parse_jsonl(std::string_view text) {
  ScoreTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto row = nlohmann::json::parse(line);
      ScoreKey key;
      key.author_id = row.at("author_id").get<std::string>();
      key.tweet_index = row.at("tweet_index").get<std::size_t>();
      if (row.contains("trigram_index") && !row["trigram_index"].is_null()) {
        key.trigram_index = row["trigram_index"].get<std::size_t>();
      }
      if (table.find(key)) {
        throw Error(ErrorCode::DuplicateId, "score line " + std::to_string(line_no) +
                                                " repeats a key");
      }
      table.insert(std::move(key), row.at("pos").get<double>(), row.at("neg").get<double>(),
                   row.at("neu").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadLine, "score line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open score table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_jsonl(buf.str());
}

void ScoreTable::insert(ScoreKey key, double pos, double neg, double neu) {
  SentimentScores s;
  s.pos = clamp01(pos);
  s.neg = clamp01(neg);
  s.neu = clamp01(neu);
  s.analyzer = AnalyzerId::Secondary;
  if (key.trigram_index) has_trigrams_ = true;
  rows_[std::move(key)] = s;
}

const SentimentScores* ScoreTable::find(const ScoreKey& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

SecondaryAnalyzer SecondaryAnalyzer::plain(Lexicon lexicon) {
  SecondaryAnalyzer a;
  a.mode_ = SecondaryMode::PlainLexicon;
  a.lexicon_ = std::move(lexicon);
  return a;
}

SecondaryAnalyzer SecondaryAnalyzer::ingested(ScoreTable table) {
  SecondaryAnalyzer a;
  a.mode_ = SecondaryMode::Ingested;
  a.table_ = std::move(table);
  return a;
}

SentimentScores SecondaryAnalyzer::analyze(std::string_view text, const ScoreKey& key) const {
  if (mode_ == SecondaryMode::Ingested) {
    const SentimentScores* hit = table_.find(key);
    if (!hit) {
      std::string where = key.author_id + "/" + std::to_string(key.tweet_index);
      if (key.trigram_index) where += "/" + std::to_string(*key.trigram_index);
      throw Error(ErrorCode::MissingScore, "no ingested score for " + where);
    }
    return *hit;
  }
  // Plain lexicon shares: lookup and normalization only.
  const auto tokens = sentiment_tokens(text);
  std::vector<double> valences;
  valences.reserve(tokens.size());
  double sum = 0.0;
  for (const auto& t : tokens) {
    double v = lexicon_.valence(to_lower(t)).value_or(0.0);
    valences.push_back(v);
    sum += v;
  }
  return shares(sift(valences), normalize_compound(sum), AnalyzerId::Secondary);
}

// ---------------------------------------------------------------------------
// Contrast, variation, disagreement

std::vector<SentimentScores> trigram_scores(std::span<const std::string> tokens,
                                            const WindowScorer& scorer) {
  if (tokens.empty()) return {SentimentScores{.compound = 0.0}};
  auto join = [&](std::size_t from, std::size_t to) {
    std::string text;
    for (std::size_t i = from; i < to; ++i) {
      if (i > from) text.push_back(' ');
      text += tokens[i];
    }
    return text;
  };
  if (tokens.size() < 3) return {scorer(join(0, tokens.size()), std::nullopt)};
  std::vector<SentimentScores> out;
  out.reserve(tokens.size() - 2);
  for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) out.push_back(scorer(join(i, i + 3), i));
  return out;
}

double contrast(std::span<const SentimentScores> windows, Channel channel) {
  if (windows.empty()) return 0.0;
  double lo = windows.front().channel(channel);
  double hi = lo;
  for (const auto& w : windows) {
    lo = std::min(lo, w.channel(channel));
    hi = std::max(hi, w.channel(channel));
  }
  return hi - lo;
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double contrast_std(std::span<const double> contrast_series) {
  return population_std(contrast_series);
}

double channel_std(std::span<const SentimentScores> scores, Channel channel) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.channel(channel));
  return population_std(values);
}

DisagreementStats DisagreementStats::fit(std::span<const SentimentScores> first_scores,
                                         std::span<const SentimentScores> second_scores) {
  if (first_scores.size() != second_scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "disagreement stats need paired scores");
  }
  DisagreementStats stats;
  stats.fitted = true;
  for (Channel c : kChannels) {
    auto idx = static_cast<std::size_t>(c);
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(first_scores.size());
    b.reserve(second_scores.size());
    for (std::size_t i = 0; i < first_scores.size(); ++i) {
      a.push_back(first_scores[i].channel(c));
      b.push_back(second_scores[i].channel(c));
    }
    auto mean_of = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      return v.empty() ? 0.0 : m / static_cast<double>(v.size());
    };
    stats.first[idx] = {mean_of(a), population_std(a)};
    stats.second[idx] = {mean_of(b), population_std(b)};
  }
  return stats;
}

DisagreementStats DisagreementStats::swapped() const {
  DisagreementStats s = *this;
  std::swap(s.first, s.second);
  return s;
}

double disagreement(const SentimentScores& first, const SentimentScores& second, Channel channel,
                    const DisagreementStats& stats) {
  if (!stats.fitted) {
    throw Error(ErrorCode::StatsNotFitted, "disagreement needs standardization stats from training data");
  }
  auto idx = static_cast<std::size_t>(channel);
  auto z = [](double x, const ChannelStats& s) { return s.sd > 0.0 ? (x - s.mean) / s.sd : 0.0; };
  const double d = z(first.channel(channel), stats.first[idx]) -
                   z(second.channel(channel), stats.second[idx]);
  return d * d;
}

}  // namespace ironyprof::sentiment
