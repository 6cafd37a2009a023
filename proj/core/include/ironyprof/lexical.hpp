#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ironyprof/matrix.hpp"

namespace ironyprof::lexical {

/// Lowercases, deletes apostrophes in place ("don't" -> "dont") and splits on
/// every other non-alphanumeric ASCII character. Non-ASCII bytes are word
/// characters except for common Unicode punctuation.
std::vector<std::string> tokenize(std::string_view text);

/// Like tokenize, but each run of punctuation becomes its own token. Used for
/// part-of-speech profiles so PUNCT is observable.
std::vector<std::string> tag_tokenize(std::string_view text);

/// Space-joined n-grams of orders [min_n, max_n], order-major.
std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t min_n,
                                std::size_t max_n);

/// An author-document: the token lists of that author's tweets. N-grams never
/// span two tweets.
using AuthorDoc = std::vector<std::vector<std::string>>;

struct VocabOptions {
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 2;
  double min_df = 0.05;
  double max_df = 0.95;
};

/// Terms kept after document-frequency filtering, with dense column ids
/// assigned in lexicographic term order.
struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<std::size_t> document_frequency;
  std::size_t document_count = 0;
  VocabOptions options;

  std::size_t size() const noexcept { return terms.size(); }
  /// Column of a term, or npos.
  std::size_t index_of(const std::string& term) const;
  /// Smooth idf: ln((1 + N) / (1 + df)) + 1.
  double idf(std::size_t column) const;
  /// Number of space-separated words in a term.
  static std::size_t order(std::string_view term);

  void rebuild_index();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

/// Counts document frequency over author-documents and keeps every term with
/// min_df <= df / N <= max_df. Throws EmptyVocabulary when nothing survives.
Vocabulary build_vocab(std::span<const AuthorDoc> docs, const VocabOptions& options = {});

/// L2-normalized sparse TF-IDF row, entries sorted by column.
struct TfidfRow {
  std::vector<std::pair<std::size_t, double>> entries;
};

/// tf = raw count, weight = tf * idf, then L2 normalization. Unknown terms
/// are ignored; a document with no known terms yields an empty row.
std::vector<TfidfRow> tfidf(std::span<const AuthorDoc> docs, const Vocabulary& vocab);

/// Dense copy of TF-IDF rows with vocab.size() columns.
Matrix to_dense(std::span<const TfidfRow> rows, std::size_t columns);

struct RankedTerm {
  std::string term;
  double mass = 0.0;
};

struct TopTerms {
  std::vector<RankedTerm> positive_unigrams;
  std::vector<RankedTerm> positive_bigrams;
  std::vector<RankedTerm> negative_unigrams;
  std::vector<RankedTerm> negative_bigrams;
};

/// Ranks terms by summed TF-IDF weight within each class (true = positive
/// class) and keeps the top n unigrams and bigrams. Ties go to the
/// lexicographically smaller term.
TopTerms top_terms_per_label(std::span<const TfidfRow> rows, std::span<const bool> positive,
                             const Vocabulary& vocab, std::size_t n = 10);

/// Coarse 12-tag universal tagset.
enum class PosTag { Noun, Verb, Adj, Adv, Pron, Det, Adp, Num, Conj, Prt, Punct, X };
inline constexpr std::size_t kTagCount = 12;

std::string_view to_string(PosTag tag);
/// Parses a tag name such as "NOUN"; throws BadLine on anything else.
PosTag parse_tag(std::string_view name);

/// Lexicon lookup first, then ordered suffix/shape rules, default NOUN.
class PosTagger {
 public:
  /// tag_lexicon: `token<TAB>TAG` lines. suffix_rules: ordered
  /// `suffix_or_shape<TAB>TAG` lines, where the shapes `<num>` (all digits)
  /// and `<punct>` (all punctuation) match whole tokens.
  PosTagger(std::string_view tag_lexicon, std::string_view suffix_rules);

  static PosTagger load(const std::filesystem::path& tag_lexicon,
                        const std::filesystem::path& suffix_rules);
  static const PosTagger& builtin();

  PosTag tag(std::string_view token) const;
  std::vector<PosTag> tag(std::span<const std::string> tokens) const;

 private:
  struct Rule {
    std::string pattern;
    PosTag tag;
  };
  std::unordered_map<std::string, PosTag> lexicon_;
  std::vector<Rule> rules_;
};

using PosProfile = std::array<double, kTagCount>;

/// Relative tag frequencies over all of an author's tweets; all-zero when
/// there are no tokens.
PosProfile pos_unigrams(const PosTagger& tagger, std::span<const std::string> tweets);

/// Mean token count per tweet slot (empty slots count as 0).
double mean_len(std::span<const std::string> tweets);

}  // namespace ironyprof::lexical
