#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ironyprof::corpus {

enum class Label { Ironic, NotIronic, Unknown };

/// "I", "NI", or "" for Unknown.
std::string_view to_string(Label label);
/// Parses "I" / "NI"; anything else is nullopt.
std::optional<Label> parse_label(std::string_view text);

/// One user's tweet history, the unit of classification.
struct AuthorRecord {
  std::string author_id;
  std::vector<std::string> tweets;
  Label label = Label::Unknown;

  bool operator==(const AuthorRecord&) const = default;
};

/// Authors with unique ids, each padded (empty text) or truncated to exactly
/// tweet_slots tweets.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<AuthorRecord> authors, std::size_t tweet_slots);

  const std::vector<AuthorRecord>& authors() const noexcept { return authors_; }
  std::size_t size() const noexcept { return authors_.size(); }
  std::size_t tweet_slots() const noexcept { return tweet_slots_; }
  const AuthorRecord& operator[](std::size_t i) const { return authors_[i]; }

  /// Index of author_id, or nullopt.
  std::optional<std::size_t> find(std::string_view author_id) const;

  /// Sub-corpus with the given ids, in the order given.
  Corpus subset(const std::vector<std::string>& ids) const;

 private:
  std::vector<AuthorRecord> authors_;
  std::size_t tweet_slots_ = 0;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Seeded 70/30-style partition of author ids.
struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

/// Parses one PAN-style author file (<author><documents><document>...).
/// Tweets keep their raw text; cleaning is separate.
AuthorRecord parse_author_xml(std::string_view bytes, std::string author_id);

/// Inverse of parse_author_xml (documents are written as CDATA).
std::string serialize_author_xml(const AuthorRecord& author);

/// Parses `<id>:::<I|NI>` lines. Blank lines are skipped.
std::map<std::string, Label> load_truth(std::string_view text);

/// Removes mask tokens (#HASHTAG#, #URL#, #USER#), HTML entities of the form
/// `&word;`, and whitespace-delimited tokens longer than 30 characters;
/// collapses whitespace. Idempotent.
std::string clean_tweet(std::string_view text);

/// Shuffles author ids with `seed`, then cuts a round(ratio * N) prefix for
/// training. Both sides must be non-empty.
SplitPlan split_users(const Corpus& corpus, double ratio, std::uint64_t seed);

/// Reads every `<id>.xml` in `xml_dir` (sorted by id) and labels it from the
/// truth file, cleaning all tweets. Fails on the first unparseable file or
/// missing truth entry, naming the file.
std::vector<AuthorRecord> load_directory(const std::filesystem::path& xml_dir,
                                         const std::optional<std::filesystem::path>& truth_path);

/// JSON-lines corpus: {"author_id": str, "label": "I"|"NI"|null, "tweets": [str]}.
void write_jsonl(std::ostream& out, const std::vector<AuthorRecord>& authors);
std::vector<AuthorRecord> read_jsonl(std::istream& in);

std::vector<AuthorRecord> read_jsonl_file(const std::filesystem::path& path);
void write_jsonl_file(const std::filesystem::path& path, const std::vector<AuthorRecord>& authors);

}  // namespace ironyprof::corpus
