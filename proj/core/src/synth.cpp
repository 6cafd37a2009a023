#include "ironyprof/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string_view>

#include "ironyprof/error.hpp"
#include "ironyprof/hash.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::synth {

namespace {

constexpr std::array<std::string_view, 60> kFiller = {
    "the",   "a",     "to",    "and",   "of",    "in",    "is",    "it",    "for",   "on",
    "this",  "that",  "with",  "my",    "you",   "we",    "just",  "so",    "at",    "be",
    "are",   "was",   "have",  "all",   "what",  "about", "from",  "they",  "will",  "can",
    "today", "now",   "people", "time", "day",   "week",  "again", "really", "going", "think",
    "know",  "still", "here",  "there", "one",   "more",  "new",   "back",  "some",  "when",
    "after", "year",  "every", "first", "last",  "into",  "over",  "than",  "then",  "our"};

constexpr std::array<std::array<std::string_view, 12>, 5> kTopics = {{
    {"election", "vote", "senate", "campaign", "debate", "ballot", "governor", "party", "poll",
     "minister", "parliament", "candidate"},
    {"game", "team", "score", "season", "coach", "match", "league", "goal", "player", "stadium",
     "playoffs", "trophy"},
    {"market", "stocks", "price", "economy", "inflation", "bank", "budget", "tax", "invest",
     "crypto", "salary", "rent"},
    {"movie", "music", "album", "concert", "series", "episode", "actor", "song", "festival",
     "theater", "stream", "trailer"},
    {"weather", "coffee", "traffic", "train", "airport", "dinner", "kitchen", "garden", "morning",
     "weekend", "holiday", "beach"},
}};

constexpr std::array<std::string_view, 6> kIronicMarkers = {"apparently", "supposedly", "allegedly",
                                                            "literally",  "basically",  "totally"};
constexpr std::array<std::string_view, 6> kPlainMarkers = {"community", "policy", "report",
                                                           "meeting",   "schedule", "update"};

constexpr std::array<std::string_view, 12> kPositive = {"great", "love", "amazing", "awesome", "best",
                                                        "happy", "excellent", "wonderful", "fantastic",
                                                        "brilliant", "perfect", "lovely"};
constexpr std::array<std::string_view, 12> kNegative = {"bad", "hate", "awful", "horrible", "disaster",
                                                        "terrible", "worst", "sad", "angry", "crisis",
                                                        "pathetic", "mess"};

constexpr std::array<std::string_view, 3> kMasks = {"#USER#", "#HASHTAG#", "#URL#"};

template <typename Array>
std::string_view pick(Rng& rng, const Array& words) {
  return words[static_cast<std::size_t>(rng.below(words.size()))];
}

}  // namespace

std::vector<corpus::AuthorRecord> generate(const SynthOptions& options) {
  if (options.authors == 0 || options.authors % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "author count must be even and positive");
  }
  if (options.tweets_per_author == 0) throw Error(ErrorCode::InvalidArgument, "need at least one tweet per author");
  if (!(options.signal_strength >= 0.0 && options.signal_strength <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "signal strength must lie in [0, 1]");
  }
  const double s = options.signal_strength;
  std::vector<corpus::AuthorRecord> authors;
  authors.reserve(options.authors);
  for (std::size_t a = 0; a < options.authors; ++a) {
    Rng rng(derive_seed(options.seed, std::uint64_t{a}));
    corpus::AuthorRecord author;
    author.author_id = hex64(rng.next()) + hex64(rng.next());
    const bool ironic = a % 2 == 0;
    author.label = ironic ? corpus::Label::Ironic : corpus::Label::NotIronic;
    const auto favourite = static_cast<std::size_t>(rng.below(kTopics.size()));
    const double p_positive = 0.5 + 0.4 * s * (ironic ? 1.0 : -1.0);

    for (std::size_t t = 0; t < options.tweets_per_author; ++t) {
      std::vector<std::string> words;
      const auto length = 5 + static_cast<std::size_t>(rng.below(9));
      const auto topic = rng.uniform() < 0.6 ? favourite : static_cast<std::size_t>(rng.below(kTopics.size()));
      for (std::size_t w = 0; w < length; ++w) {
        words.emplace_back(rng.uniform() < 0.35 ? pick(rng, kTopics[topic]) : pick(rng, kFiller));
      }
      if (rng.uniform() < 0.5) {
        words.emplace_back(rng.uniform() < p_positive ? pick(rng, kPositive) : pick(rng, kNegative));
      }
      if (rng.uniform() < s) words.emplace_back(pick(rng, ironic ? kIronicMarkers : kPlainMarkers));
      if (rng.uniform() < 0.3) words.emplace_back(pick(rng, kMasks));
      rng.shuffle(words);
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      if (rng.uniform() < 0.15) text += "!";
      author.tweets.push_back(std::move(text));
    }
    authors.push_back(std::move(author));
  }
  return authors;
}

void write_directory(const std::filesystem::path& dir, const std::vector<corpus::AuthorRecord>& authors) {
  std::filesystem::create_directories(dir);
  std::ofstream truth(dir / "truth.txt");
  if (!truth) throw Error(ErrorCode::Io, "cannot write " + (dir / "truth.txt").string());
  for (const auto& a : authors) {
    const auto path = dir / (a.author_id + ".xml");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << corpus::serialize_author_xml(a);
    truth << a.author_id << ":::" << corpus::to_string(a.label) << '\n';
  }
}

}  // namespace ironyprof::synth
