#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ironyprof/corpus.hpp"
#include "ironyprof/matrix.hpp"

namespace ironyprof::features {

enum class Category { Sentiment, Topic, Lexical, Extra };
/// Tweet-level features take T columns, user-level one, blocks a fixed d.
enum class Level { Tweet, User, Block };

std::string_view to_string(Category category);
std::string_view to_string(Level level);

struct FeatureDescriptor {
  std::string name;
  /// Predictor name as printed in the published selection tables; empty for
  /// features this library adds.
  std::string published_name;
  Category category;
  Level level;
  std::string producer;
};

/// Dimensions needed to size Block and Tweet features.
struct Shape {
  std::size_t tweet_slots = 200;
  std::size_t vocab_size = 0;
  std::size_t tag_count = 12;
};

std::size_t width(const FeatureDescriptor& feature, const Shape& shape);

/// Every feature, in registry order: the 14 sentiment features, 3 topic
/// features and 3 lexical features in published-table order, then extras.
const std::vector<FeatureDescriptor>& registry();

/// Throws UnknownFeature.
const FeatureDescriptor& descriptor(std::string_view name);

/// Names in a category, registry order.
std::vector<std::string> category_features(Category category);

/// The seven features of the final model.
const std::vector<std::string>& final_feature_set();

/// Final-model features first (in their listed order), then the remaining
/// names alphabetically. Duplicates are dropped.
std::vector<std::string> canonical_order(std::span<const std::string> names);

/// All registry names in canonical order.
std::vector<std::string> all_feature_names();

/// Value used for a tweet slot with no text.
double degenerate_value(std::string_view feature, std::size_t num_topics);

/// Overwrites padding slots of a tweet-level feature with its degenerate
/// value; other features and non-padding slots are left unchanged.
void impute_degenerate(std::span<double> values, std::span<const bool> padding,
                       std::string_view feature, std::size_t num_topics);

struct FeatureColumn {
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;

  bool operator==(const FeatureColumn&) const = default;
};

/// Hash of (T, ordered feature names and widths); models refuse matrices
/// whose fingerprint differs from the one they were trained on.
std::string fingerprint(std::span<const FeatureColumn> columns, std::size_t tweet_slots);

/// Rows are authors in corpus order; columns are feature blocks in the
/// requested order.
struct FeatureMatrix {
  std::vector<std::string> author_ids;
  std::vector<corpus::Label> labels;
  std::vector<FeatureColumn> columns;
  Matrix values;
  std::size_t tweet_slots = 0;
  std::size_t vocab_size = 0;
  std::size_t num_topics = 0;
  /// Free-form provenance (seed, config hash) carried into the artifact.
  std::uint64_t seed = 0;
  std::string config_hash;

  std::string fingerprint() const;
  const FeatureColumn& column(std::string_view name) const;
  bool has(std::string_view name) const;
  std::vector<std::string> feature_names() const;

  /// Column concatenation of the named blocks, in the order given.
  FeatureMatrix select(std::span<const std::string> names) const;

  /// 1 for ironic, 0 for not ironic; throws MissingLabelClass on Unknown.
  std::vector<int> binary_labels() const;

  bool operator==(const FeatureMatrix&) const = default;
};

/// Binary container: magic "IRFM", u32 version, u64 header length, JSON
/// header (feature spec, offsets, T, V, ids, labels), then row-major
/// little-endian float64 values.
void write_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const FeatureMatrix& matrix);
FeatureMatrix read_matrix(std::istream& in);

/// Debug export: author_id, label, then one column per value named
/// `feature[i]`.
void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix);

}  // namespace ironyprof::features
