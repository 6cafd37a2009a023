#include "ironyprof/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/random.hpp"

namespace ironyprof::corpus {

namespace {

constexpr std::array<std::string_view, 3> kMasks = {"#HASHTAG#", "#URL#", "#USER#"};
constexpr std::size_t kMaxTokenChars = 30;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_entity_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '#';
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

// Replaces every `&name;` run with a single space.
std::string strip_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '&') {
      std::size_t j = i + 1;
      while (j < text.size() && is_entity_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == ';') {
        out.push_back(' ');
        i = j + 1;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Ironic: return "I";
    case Label::NotIronic: return "NI";
    case Label::Unknown: return "";
  }
  return "";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "I") return Label::Ironic;
  if (text == "NI") return Label::NotIronic;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<AuthorRecord> authors, std::size_t tweet_slots)
    : authors_(std::move(authors)), tweet_slots_(tweet_slots) {
  if (tweet_slots_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "tweet_slots must be positive");
  }
  for (std::size_t i = 0; i < authors_.size(); ++i) {
    auto& a = authors_[i];
    if (a.author_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "author at position " + std::to_string(i) +
                                                  " has an empty id");
    }
    if (!index_.emplace(a.author_id, i).second) {
      throw Error(ErrorCode::DuplicateId, "author id '" + a.author_id + "' appears twice");
    }
    a.tweets.resize(tweet_slots_);
  }
}

std::optional<std::size_t> Corpus::find(std::string_view author_id) const {
  auto it = index_.find(author_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus Corpus::subset(const std::vector<std::string>& ids) const {
  std::vector<AuthorRecord> picked;
  picked.reserve(ids.size());
  for (const auto& id : ids) {
    auto pos = find(id);
    if (!pos) throw Error(ErrorCode::InvalidArgument, "unknown author id '" + id + "'");
    picked.push_back(authors_[*pos]);
  }
  return Corpus(std::move(picked), tweet_slots_);
}

// ---------------------------------------------------------------------------

AuthorRecord parse_author_xml(std::string_view bytes, std::string author_id) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedXml, e.what());
  }
  auto documents = tree.get_child_optional("author.documents");
  if (!documents) {
    throw Error(ErrorCode::MalformedXml, "missing <author><documents> element");
  }
  AuthorRecord record;
  record.author_id = std::move(author_id);
  for (const auto& [name, node] : *documents) {
    if (name == "document") record.tweets.push_back(node.data());
  }
  if (record.tweets.empty()) {
    throw Error(ErrorCode::EmptyAuthor, "author '" + record.author_id + "' has no documents");
  }
  return record;
}

std::string serialize_author_xml(const AuthorRecord& author) {
  std::string out = "<author lang=\"en\">\n\t<documents>\n";
  for (const auto& tweet : author.tweets) {
    out += "\t\t<document><![CDATA[";
    // A literal "]]>" must be split across two CDATA sections.
    std::size_t start = 0;
    for (std::size_t pos; (pos = tweet.find("]]>", start)) != std::string::npos;) {
      out.append(tweet, start, pos - start);
      out += "]]]]><![CDATA[>";
      start = pos + 3;
    }
    out.append(tweet, start, std::string::npos);
    out += "]]></document>\n";
  }
  out += "\t</documents>\n</author>\n";
  return out;
}

std::map<std::string, Label> load_truth(std::string_view text) {
  std::map<std::string, Label> truth;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    auto sep = line.find(":::");
    std::optional<Label> label;
    if (sep != std::string_view::npos && sep > 0) label = parse_label(line.substr(sep + 3));
    if (!label) {
      throw Error(ErrorCode::BadLine,
                  "truth line " + std::to_string(line_no) + ": '" + std::string(line) + "'");
    }
    std::string id(line.substr(0, sep));
    if (!truth.emplace(id, *label).second) {
      throw Error(ErrorCode::DuplicateId, "truth lists '" + id + "' more than once");
    }
    if (end == text.size()) break;
  }
  return truth;
}

std::string clean_tweet(std::string_view text) {
  const std::string stripped = strip_entities(text);
  std::string out;
  out.reserve(stripped.size());
  std::size_t i = 0;
  while (i < stripped.size()) {
    while (i < stripped.size() && is_space(stripped[i])) ++i;
    std::size_t j = i;
    while (j < stripped.size() && !is_space(stripped[j])) ++j;
    if (j > i) {
      std::string_view token(stripped.data() + i, j - i);
      bool drop = std::find(kMasks.begin(), kMasks.end(), token) != kMasks.end() ||
                  utf8_length(token) > kMaxTokenChars;
      if (!drop) {
        if (!out.empty()) out.push_back(' ');
        out.append(token);
      }
    }
    i = j;
  }
  return out;
}

SplitPlan split_users(const Corpus& corpus, double ratio, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (n < 2) {
    throw Error(ErrorCode::TooFewAuthors, "a split needs at least 2 authors, got " + std::to_string(n));
  }
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::TooFewAuthors,
                "train ratio must lie strictly inside (0, 1) so both sides are non-empty");
  }
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorCode::TooFewAuthors, "ratio " + std::to_string(ratio) + " leaves one side of a " +
                                              std::to_string(n) + "-author split empty");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  SplitPlan plan;
  plan.seed = seed;
  plan.ratio = ratio;
  for (auto i : train) plan.train_ids.push_back(corpus[i].author_id);
  for (auto i : test) plan.test_ids.push_back(corpus[i].author_id);
  return plan;
}

// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<AuthorRecord> load_directory(const std::filesystem::path& xml_dir,
                                         const std::optional<std::filesystem::path>& truth_path) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(xml_dir)) {
    throw Error(ErrorCode::Io, xml_dir.string() + " is not a readable directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(xml_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::EmptyCorpus, "no .xml files in " + xml_dir.string());
  std::sort(files.begin(), files.end());

  std::map<std::string, Label> truth;
  if (truth_path) truth = load_truth(read_file(*truth_path));

  std::vector<AuthorRecord> authors(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    const auto& file = files[i];
    std::string id = file.stem().string();
    try {
      AuthorRecord rec = parse_author_xml(read_file(file), id);
      for (auto& t : rec.tweets) t = clean_tweet(t);
      if (truth_path) {
        auto it = truth.find(id);
        if (it == truth.end()) {
          throw Error(ErrorCode::BadLine, "no truth entry for author '" + id + "'");
        }
        rec.label = it->second;
      }
      authors[i] = std::move(rec);
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.detail());
    }
  });
  return authors;
}

void write_jsonl(std::ostream& out, const std::vector<AuthorRecord>& authors) {
  for (const auto& a : authors) {
    nlohmann::ordered_json row;
    row["author_id"] = a.author_id;
    if (a.label == Label::Unknown) {
      row["label"] = nullptr;
    } else {
      row["label"] = std::string(to_string(a.label));
    }
    row["tweets"] = a.tweets;
    out << row.dump() << '\n';
  }
}

std::vector<AuthorRecord> read_jsonl(std::istream& in) {
  std::vector<AuthorRecord> authors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto row = nlohmann::json::parse(line);
      AuthorRecord a;
      a.author_id = row.at("author_id").get<std::string>();
      const auto& label = row.at("label");
      if (!label.is_null()) {
        auto parsed = parse_label(label.get<std::string>());
        if (!parsed) throw Error(ErrorCode::BadLine, "label must be \"I\", \"NI\" or null");
        a.label = *parsed;
      }
      a.tweets = row.at("tweets").get<std::vector<std::string>>();
      authors.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadLine, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return authors;
}

std::vector<AuthorRecord> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
  try {
    return read_jsonl(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_jsonl_file(const std::filesystem::path& path, const std::vector<AuthorRecord>& authors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_jsonl(out, authors);
}

}  // namespace ironyprof::corpus
