#include "ironyprof/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/hash.hpp"

namespace ironyprof::features {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Sentiment: return "sentiment";
    case Category::Topic: return "topic";
    case Category::Lexical: return "lexical";
    case Category::Extra: return "extra";
  }
  return "";
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Tweet: return "tweet";
    case Level::User: return "user";
    case Level::Block: return "block";
  }
  return "";
}

const std::vector<FeatureDescriptor>& registry() {
  using C = Category;
  using L = Level;
  static const std::vector<FeatureDescriptor> features = {
      {"pos_sent_vecs", "pos_sent_vecs", C::Sentiment, L::Tweet, "sentiment::contrast(pos) over secondary trigram windows"},
      {"neg_sent_vecs", "neg_sent_vecs", C::Sentiment, L::Tweet, "sentiment::contrast(neg) over secondary trigram windows"},
      {"X_negative", "X_negative", C::Sentiment, L::Tweet, "sentiment::SecondaryAnalyzer neg"},
      {"X_neutral", "X_neutral", C::Sentiment, L::Tweet, "sentiment::SecondaryAnalyzer neu"},
      {"X_positive", "X_positive", C::Sentiment, L::Tweet, "sentiment::SecondaryAnalyzer pos"},
      {"negVader", "negVader", C::Sentiment, L::Tweet, "sentiment::RulesAnalyzer neg"},
      {"neuVader", "neuVader", C::Sentiment, L::Tweet, "sentiment::RulesAnalyzer neu"},
      {"posVader", "posVader", C::Sentiment, L::Tweet, "sentiment::RulesAnalyzer pos"},
      {"compoundVader", "compoundVader", C::Sentiment, L::Tweet, "sentiment::RulesAnalyzer compound"},
      {"diff_neg", "diff_neg", C::Sentiment, L::Tweet, "sentiment::disagreement(neg)"},
      {"diff_pos", "diff_pos", C::Sentiment, L::Tweet, "sentiment::disagreement(pos)"},
      {"diff_neu", "diff_neu", C::Sentiment, L::Tweet, "sentiment::disagreement(neu)"},
      {"pos_sent_std", "pos_sent_std", C::Sentiment, L::User, "sentiment::contrast_std(pos)"},
      {"neg_sent_std", "neg_sent_std", C::Sentiment, L::User, "sentiment::contrast_std(neg)"},
      {"dominant_topic_user", "dominant_topic_user", C::Topic, L::User, "topics::dominant_topic"},
      {"cluster", "cluster", C::Topic, L::User, "topics::kmeans over TF-IDF rows"},
      {"max_probabilities", "max_probabilities", C::Topic, L::Tweet, "topics::infer max theta"},
      {"tfidf", "tfidf", C::Lexical, L::Block, "lexical::tfidf"},
      {"pos_unis", "pos_unis", C::Lexical, L::Block, "lexical::pos_unigrams"},
      {"mean_len", "mean_len", C::Lexical, L::User, "lexical::mean_len"},
      {"argmax_topic", "", C::Extra, L::Tweet, "topics::infer argmax topic"},
      {"pos_channel_std", "", C::Extra, L::User, "sentiment::channel_std(pos) of rules scores"},
      {"neg_channel_std", "", C::Extra, L::User, "sentiment::channel_std(neg) of rules scores"},
      {"neu_channel_std", "", C::Extra, L::User, "sentiment::channel_std(neu) of rules scores"},
  };
  return features;
}

const FeatureDescriptor& descriptor(std::string_view name) {
  for (const auto& f : registry()) {
    if (f.name == name) return f;
  }
  throw Error(ErrorCode::UnknownFeature, "no feature named '" + std::string(name) + "'");
}

std::size_t width(const FeatureDescriptor& feature, const Shape& shape) {
  switch (feature.level) {
    case Level::Tweet: return shape.tweet_slots;
    case Level::User: return 1;
    case Level::Block: return feature.name == "tfidf" ? shape.vocab_size : shape.tag_count;
  }
  return 0;
}

std::vector<std::string> category_features(Category category) {
  std::vector<std::string> names;
  for (const auto& f : registry()) {
    if (f.category == category) names.push_back(f.name);
  }
  return names;
}

const std::vector<std::string>& final_feature_set() {
  static const std::vector<std::string> names = {
      "max_probabilities", "neuVader", "posVader", "compoundVader", "diff_pos", "tfidf", "pos_unis"};
  return names;
}

std::vector<std::string> canonical_order(std::span<const std::string> names) {
  std::set<std::string> wanted(names.begin(), names.end());
  std::vector<std::string> out;
  for (const auto& n : final_feature_set()) {
    if (wanted.erase(n)) out.push_back(n);
  }
  out.insert(out.end(), wanted.begin(), wanted.end());
  return out;
}

std::vector<std::string> all_feature_names() {
  std::vector<std::string> names;
  for (const auto& f : registry()) names.push_back(f.name);
  return canonical_order(names);
}

double degenerate_value(std::string_view feature, std::size_t num_topics) {
  if (feature == "max_probabilities") {
    return num_topics == 0 ? 0.0 : 1.0 / static_cast<double>(num_topics);
  }
  return 0.0;
}

void impute_degenerate(std::span<double> values, std::span<const bool> padding,
                       std::string_view feature, std::size_t num_topics) {
  if (descriptor(feature).level != Level::Tweet) return;
  const double fill = degenerate_value(feature, num_topics);
  for (std::size_t i = 0; i < values.size() && i < padding.size(); ++i) {
    if (padding[i]) values[i] = fill;
  }
}

std::string fingerprint(std::span<const FeatureColumn> columns, std::size_t tweet_slots) {
  std::string spec = "T=" + std::to_string(tweet_slots);
  for (const auto& c : columns) spec += ";" + c.name + ":" + std::to_string(c.width);
  return hex64(fnv1a64(spec));
}

// ---------------------------------------------------------------------------
// FeatureMatrix

std::string FeatureMatrix::fingerprint() const {
  return features::fingerprint(columns, tweet_slots);
}

const FeatureColumn& FeatureMatrix::column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::UnknownFeature, "matrix has no feature '" + std::string(name) + "'");
}

bool FeatureMatrix::has(std::string_view name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const auto& c) { return c.name == name; });
}

std::vector<std::string> FeatureMatrix::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::string> names) const {
  FeatureMatrix out;
  out.author_ids = author_ids;
  out.labels = labels;
  out.tweet_slots = tweet_slots;
  out.vocab_size = vocab_size;
  out.num_topics = num_topics;
  out.seed = seed;
  out.config_hash = config_hash;
  std::vector<std::size_t> picked;
  for (const auto& name : names) {
    const auto& src = column(name);
    out.columns.push_back({src.name, picked.size(), src.width});
    for (std::size_t j = 0; j < src.width; ++j) picked.push_back(src.offset + j);
  }
  out.values = values.select_cols(picked);
  return out;
}

std::vector<int> FeatureMatrix::binary_labels() const {
  std::vector<int> y;
  y.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == corpus::Label::Unknown) {
      const std::string who = i < author_ids.size() ? author_ids[i] : "#" + std::to_string(i);
      throw Error(ErrorCode::MissingLabelClass, "author '" + who + "' has no label");
    }
    y.push_back(labels[i] == corpus::Label::Ironic ? 1 : 0);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr char kMagic[4] = {'I', 'R', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_uint(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      throw Error(ErrorCode::CorruptArtifact, "matrix file is truncated");
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void write_matrix(std::ostream& out, const FeatureMatrix& m) {
  nlohmann::ordered_json header;
  header["format"] = "ironyprof-feature-matrix";
  header["rows"] = m.values.rows();
  header["cols"] = m.values.cols();
  header["tweet_slots"] = m.tweet_slots;
  header["vocab_size"] = m.vocab_size;
  header["num_topics"] = m.num_topics;
  header["fingerprint"] = m.fingerprint();
  header["seed"] = m.seed;
  header["config_hash"] = m.config_hash;
  auto spec = nlohmann::ordered_json::array();
  for (const auto& c : m.columns) {
    spec.push_back({{"name", c.name}, {"offset", c.offset}, {"width", c.width}});
  }
  header["features"] = std::move(spec);
  header["author_ids"] = m.author_ids;
  auto labels = nlohmann::ordered_json::array();
  for (auto l : m.labels) {
    if (l == corpus::Label::Unknown) {
      labels.push_back(nullptr);
    } else {
      labels.push_back(std::string(corpus::to_string(l)));
    }
  }
  header["labels"] = std::move(labels);
  const std::string text = header.dump();

  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : m.values.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error(ErrorCode::Io, "failed writing feature matrix");
}

FeatureMatrix read_matrix(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::CorruptArtifact, "not a feature matrix (bad magic)");
  }
  const auto version = get_uint(in, 4);
  if (version != kVersion) {
    throw Error(ErrorCode::CorruptArtifact, "unsupported matrix version " + std::to_string(version));
  }
  const auto header_len = get_uint(in, 8);
  if (header_len == 0 || header_len > (std::uint64_t{1} << 32)) {
    throw Error(ErrorCode::CorruptArtifact, "implausible header length");
  }
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<std::uint64_t>(in.gcount()) != header_len) {
    throw Error(ErrorCode::CorruptArtifact, "matrix header is truncated");
  }

  FeatureMatrix m;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string stored_fingerprint;
  try {
    auto header = nlohmann::json::parse(text);
    if (header.at("format") != "ironyprof-feature-matrix") {
      throw Error(ErrorCode::CorruptArtifact, "unexpected format tag");
    }
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
    m.tweet_slots = header.at("tweet_slots").get<std::size_t>();
    m.vocab_size = header.at("vocab_size").get<std::size_t>();
    m.num_topics = header.at("num_topics").get<std::size_t>();
    m.seed = header.at("seed").get<std::uint64_t>();
    m.config_hash = header.at("config_hash").get<std::string>();
    stored_fingerprint = header.at("fingerprint").get<std::string>();
    for (const auto& c : header.at("features")) {
      m.columns.push_back({c.at("name").get<std::string>(), c.at("offset").get<std::size_t>(),
                           c.at("width").get<std::size_t>()});
    }
    m.author_ids = header.at("author_ids").get<std::vector<std::string>>();
    for (const auto& l : header.at("labels")) {
      m.labels.push_back(l.is_null() ? corpus::Label::Unknown
                                     : corpus::parse_label(l.get<std::string>()).value_or(corpus::Label::Unknown));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, std::string("matrix header: ") + e.what());
  }
  std::size_t expected_offset = 0;
  for (const auto& c : m.columns) {
    if (c.offset != expected_offset) throw Error(ErrorCode::CorruptArtifact, "feature offsets are not contiguous");
    expected_offset += c.width;
  }
  if (expected_offset != cols || m.author_ids.size() != rows || m.labels.size() != rows) {
    throw Error(ErrorCode::CorruptArtifact, "matrix header dimensions disagree");
  }
  if (m.fingerprint() != stored_fingerprint) {
    throw Error(ErrorCode::CorruptArtifact, "matrix fingerprint does not match its feature spec");
  }
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = std::bit_cast<double>(get_uint(in, 8));
  m.values = Matrix(rows, cols, std::move(values));
  return m;
}

void write_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_matrix(out, matrix);
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open matrix " + path.string());
  try {
    return read_matrix(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "author_id,label";
  for (const auto& c : m.columns) {
    for (std::size_t j = 0; j < c.width; ++j) out << ',' << c.name << '[' << j << ']';
  }
  out << '\n';
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    out << m.author_ids[r] << ',' << corpus::to_string(m.labels[r]);
    for (double v : m.values.row(r)) {
      cell.str({});
      cell << v;
      out << ',' << cell.str();
    }
    out << '\n';
  }
}

}  // namespace ironyprof::features
