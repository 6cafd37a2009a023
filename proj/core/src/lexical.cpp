#include "ironyprof/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ironyprof/error.hpp"
#include "ironyprof/parallel.hpp"
#include "resources.hpp"

namespace ironyprof::lexical {

namespace {

enum class CharClass { Word, Apostrophe, Punct, Space };

// Classifies the character at text[i] and reports its byte length.
CharClass classify(std::string_view text, std::size_t i, std::size_t& length) {
  const auto c = static_cast<unsigned char>(text[i]);
  length = 1;
  if (c < 0x80) {
    if (std::isalnum(c)) return CharClass::Word;
    if (c == '\'') return CharClass::Apostrophe;
    if (std::isspace(c)) return CharClass::Space;
    return CharClass::Punct;
  }
  // General Punctuation block U+2010..U+2027 is E2 80 90..A7.
  if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80) {
    const auto third = static_cast<unsigned char>(text[i + 2]);
    if (third == 0x98 || third == 0x99) {
      length = 3;
      return CharClass::Apostrophe;
    }
    if (third >= 0x90 && third <= 0xA7) {
      length = 3;
      return CharClass::Punct;
    }
  }
  return CharClass::Word;
}

std::vector<std::string> split(std::string_view text, bool keep_punct) {
  std::vector<std::string> tokens;
  std::string word;
  std::string punct;
  auto flush_word = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  auto flush_punct = [&] {
    if (!punct.empty()) tokens.push_back(std::move(punct));
    punct.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    std::size_t len = 1;
    switch (classify(text, i, len)) {
      case CharClass::Word:
        flush_punct();
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
        if (len > 1) word.append(text.substr(i + 1, len - 1));
        break;
      case CharClass::Apostrophe:
        // Deleted in place inside a word; on its own it is punctuation.
        if (word.empty() && keep_punct) punct.append(text.substr(i, len));
        break;
      case CharClass::Punct:
        flush_word();
        if (keep_punct) punct.append(text.substr(i, len));
        break;
      case CharClass::Space:
        flush_word();
        flush_punct();
        break;
    }
    i += len;
  }
  flush_word();
  flush_punct();
  return tokens;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

bool all_punct(std::string_view s) {
  if (s.empty()) return false;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = 1;
    auto cls = classify(s, i, len);
    if (cls != CharClass::Punct && cls != CharClass::Apostrophe) return false;
    i += len;
  }
  return true;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line, line_no);
  }
}

std::pair<std::string_view, std::string_view> split_tab(std::string_view line, std::size_t line_no,
                                                        std::string_view what) {
  auto tab = line.find('\t');
  if (tab == std::string_view::npos || tab == 0) {
    throw Error(ErrorCode::BadLine,
                std::string(what) + " line " + std::to_string(line_no) + ": expected two tab-separated fields");
  }
  return {line.substr(0, tab), line.substr(tab + 1)};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) { return split(text, false); }

std::vector<std::string> tag_tokenize(std::string_view text) { return split(text, true); }

std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t min_n,
                                std::size_t max_n) {
  std::vector<std::string> out;
  for (std::size_t n = std::max<std::size_t>(min_n, 1); n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        gram.push_back(' ');
        gram += tokens[i + j];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary and TF-IDF

std::size_t Vocabulary::index_of(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? static_cast<std::size_t>(-1) : it->second;
}

double Vocabulary::idf(std::size_t column) const {
  return std::log((1.0 + static_cast<double>(document_count)) /
                  (1.0 + static_cast<double>(document_frequency[column]))) +
         1.0;
}

std::size_t Vocabulary::order(std::string_view term) {
  return static_cast<std::size_t>(std::count(term.begin(), term.end(), ' ')) + 1;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < terms.size(); ++i) index_.emplace(terms[i], i);
}

namespace {

std::map<std::string, std::size_t> term_counts(const AuthorDoc& doc, const VocabOptions& options) {
  std::map<std::string, std::size_t> counts;
  for (const auto& tweet : doc) {
    for (auto& g : ngrams(tweet, options.ngram_min, options.ngram_max)) ++counts[std::move(g)];
  }
  return counts;
}

}  // namespace

Vocabulary build_vocab(std::span<const AuthorDoc> docs, const VocabOptions& options) {
  if (docs.empty()) throw Error(ErrorCode::EmptyVocabulary, "no documents to build a vocabulary from");
  std::vector<std::map<std::string, std::size_t>> per_doc(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { per_doc[i] = term_counts(docs[i], options); });

  std::map<std::string, std::size_t> df;
  for (const auto& counts : per_doc) {
    for (const auto& [term, n] : counts) ++df[term];
  }
  Vocabulary vocab;
  vocab.options = options;
  vocab.document_count = docs.size();
  const auto n_docs = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    const double share = static_cast<double>(count) / n_docs;
    if (share >= options.min_df && share <= options.max_df) {
      vocab.terms.push_back(term);
      vocab.document_frequency.push_back(count);
    }
  }
  if (vocab.terms.empty()) {
    throw Error(ErrorCode::EmptyVocabulary, "every term falls outside the document-frequency bounds");
  }
  vocab.rebuild_index();
  return vocab;
}

std::vector<TfidfRow> tfidf(std::span<const AuthorDoc> docs, const Vocabulary& vocab) {
  std::vector<TfidfRow> rows(docs.size());
  parallel_for(docs.size(), [&](std::size_t d) {
    auto counts = term_counts(docs[d], vocab.options);
    TfidfRow row;
    double norm2 = 0.0;
    for (const auto& [term, tf] : counts) {
      const std::size_t col = vocab.index_of(term);
      if (col == static_cast<std::size_t>(-1)) continue;
      const double w = static_cast<double>(tf) * vocab.idf(col);
      row.entries.emplace_back(col, w);
      norm2 += w * w;
    }
    std::sort(row.entries.begin(), row.entries.end());
    if (norm2 > 0.0) {
      const double norm = std::sqrt(norm2);
      for (auto& e : row.entries) e.second /= norm;
    }
    rows[d] = std::move(row);
  });
  return rows;
}

Matrix to_dense(std::span<const TfidfRow> rows, std::size_t columns) {
  Matrix m(rows.size(), columns);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [col, w] : rows[r].entries) m(r, col) = w;
  }
  return m;
}

TopTerms top_terms_per_label(std::span<const TfidfRow> rows, std::span<const bool> positive,
                             const Vocabulary& vocab, std::size_t n) {
  if (rows.size() != positive.size()) {
    throw Error(ErrorCode::LengthMismatch, "one label per TF-IDF row is required");
  }
  const bool has_pos = std::find(positive.begin(), positive.end(), true) != positive.end();
  const bool has_neg = std::find(positive.begin(), positive.end(), false) != positive.end();
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::MissingLabelClass, "top terms need authors from both classes");
  }
  std::vector<double> mass_pos(vocab.size(), 0.0);
  std::vector<double> mass_neg(vocab.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& mass = positive[r] ? mass_pos : mass_neg;
    for (const auto& [col, w] : rows[r].entries) mass[col] += w;
  }
  auto rank = [&](const std::vector<double>& mass, std::size_t order) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < vocab.size(); ++c) {
      if (Vocabulary::order(vocab.terms[c]) == order && mass[c] > 0.0) cols.push_back(c);
    }
    // Columns are already in lexicographic term order, so a stable sort
    // breaks ties by term.
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    std::vector<RankedTerm> out;
    for (std::size_t i = 0; i < std::min(n, cols.size()); ++i) {
      out.push_back({vocab.terms[cols[i]], mass[cols[i]]});
    }
    return out;
  };
  return {rank(mass_pos, 1), rank(mass_pos, 2), rank(mass_neg, 1), rank(mass_neg, 2)};
}

// ---------------------------------------------------------------------------
// Part-of-speech profiles

std::string_view to_string(PosTag tag) {
  static constexpr std::array<std::string_view, kTagCount> names = {
      "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X"};
  return names[static_cast<std::size_t>(tag)];
}

PosTag parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    if (to_string(static_cast<PosTag>(i)) == name) return static_cast<PosTag>(i);
  }
  throw Error(ErrorCode::BadLine, "unknown POS tag '" + std::string(name) + "'");
}

PosTagger::PosTagger(std::string_view tag_lexicon, std::string_view suffix_rules) {
  for_each_line(tag_lexicon, [&](std::string_view line, std::size_t line_no) {
    auto [token, tag] = split_tab(line, line_no, "tag lexicon");
    std::string key;
    for (char c : token) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    lexicon_[key] = parse_tag(tag);
  });
  for_each_line(suffix_rules, [&](std::string_view line, std::size_t line_no) {
    auto [pattern, tag] = split_tab(line, line_no, "suffix rules");
    rules_.push_back({std::string(pattern), parse_tag(tag)});
  });
}

PosTagger PosTagger::load(const std::filesystem::path& tag_lexicon,
                          const std::filesystem::path& suffix_rules) {
  return PosTagger(read_file(tag_lexicon), read_file(suffix_rules));
}

const PosTagger& PosTagger::builtin() {
  static const PosTagger tagger(resources::tag_lexicon_tsv(), resources::suffix_rules_tsv());
  return tagger;
}

PosTag PosTagger::tag(std::string_view token) const {
  if (auto it = lexicon_.find(std::string(token)); it != lexicon_.end()) return it->second;
  for (const auto& rule : rules_) {
    if (rule.pattern == "<num>") {
      if (all_digits(token)) return rule.tag;
    } else if (rule.pattern == "<punct>") {
      if (all_punct(token)) return rule.tag;
    } else if (token.size() >= rule.pattern.size() + 2 && token.ends_with(rule.pattern)) {
      return rule.tag;
    }
  }
  return PosTag::Noun;
}

std::vector<PosTag> PosTagger::tag(std::span<const std::string> tokens) const {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(tag(t));
  return tags;
}

PosProfile pos_unigrams(const PosTagger& tagger, std::span<const std::string> tweets) {
  PosProfile profile{};
  double total = 0.0;
  for (const auto& tweet : tweets) {
    for (const auto& token : tag_tokenize(tweet)) {
      profile[static_cast<std::size_t>(tagger.tag(token))] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0) {
    for (auto& v : profile) v /= total;
  }
  return profile;
}

double mean_len(std::span<const std::string> tweets) {
  if (tweets.empty()) return 0.0;
  std::size_t tokens = 0;
  for (const auto& t : tweets) tokens += tokenize(t).size();
  return static_cast<double>(tokens) / static_cast<double>(tweets.size());
}

}  // namespace ironyprof::lexical
