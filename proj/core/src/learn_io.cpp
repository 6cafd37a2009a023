#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ironyprof/error.hpp"
#include "ironyprof/learn.hpp"

namespace ironyprof::learn {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered node_to_json(const Tree& tree, std::uint32_t at) {
  const auto& n = tree.nodes[at];
  ordered j;
  if (n.feature < 0) {
    j["leaf"] = {n.counts[0], n.counts[1]};
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["counts"] = {n.counts[0], n.counts[1]};
  j["left"] = node_to_json(tree, n.left);
  j["right"] = node_to_json(tree, n.right);
  return j;
}

std::uint32_t node_from_json(const json& j, Tree& tree) {
  const auto id = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[id].counts[0] = j.at("leaf").at(0).get<std::uint64_t>();
    tree.nodes[id].counts[1] = j.at("leaf").at(1).get<std::uint64_t>();
    return id;
  }
  TreeNode n;
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.counts[0] = j.at("counts").at(0).get<std::uint64_t>();
  n.counts[1] = j.at("counts").at(1).get<std::uint64_t>();
  if (n.feature < 0) throw Error(ErrorCode::CorruptArtifact, "split node with negative feature");
  n.left = node_from_json(j.at("left"), tree);
  n.right = node_from_json(j.at("right"), tree);
  tree.nodes[id] = n;
  return id;
}

ordered linear_to_json(const LinearModel& m) { return {{"weights", m.weights}, {"bias", m.bias}}; }

LinearModel linear_from_json(const json& j) {
  return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

}  // namespace

std::string Classifier::to_json() const {
  ordered j;
  j["format"] = "ironyprof-model";
  j["version"] = 1;
  j["root_seed"] = root_seed;
  j["config_hash"] = config_hash;
  j["fingerprint"] = fingerprint;
  j["tweet_slots"] = tweet_slots;
  j["feature_names"] = feature_names;
  j["feature_count"] = feature_count_;
  ordered spec;
  spec["kind"] = std::string(to_string(spec_.kind));
  spec["seed"] = spec_.seed;
  if (spec_.kind == ModelKind::RandomForest) {
    spec["n_estimators"] = spec_.n_estimators;
    spec["bootstrap"] = spec_.bootstrap;
    spec["criterion"] = std::string(to_string(spec_.tree.criterion));
    spec["max_depth"] = spec_.tree.max_depth;
    spec["max_features"] = std::string(to_string(spec_.tree.max_features));
    spec["min_samples_split"] = spec_.tree.min_samples_split;
  } else {
    spec["C"] = spec_.c;
    if (spec_.kind == ModelKind::LogisticRegression) spec["penalty"] = "l2";
    else spec["kernel"] = "linear";
  }
  j["spec"] = std::move(spec);

  if (const auto* forest = std::get_if<ForestModel>(&model_)) {
    ordered trees = ordered::array();
    for (std::size_t i = 0; i < forest->trees.size(); ++i) {
      trees.push_back({{"seed", forest->tree_seeds[i]}, {"root", node_to_json(forest->trees[i], 0)}});
    }
    j["trees"] = std::move(trees);
  } else if (const auto* lr = std::get_if<LogRegFit>(&model_)) {
    j["linear"] = linear_to_json(lr->model);
    j["iterations"] = lr->iterations;
    j["gradient_norm"] = lr->gradient_norm;
  } else {
    j["linear"] = linear_to_json(std::get<LinearModel>(model_));
  }
  return j.dump();
}

Classifier Classifier::from_json(std::string_view text) {
  Classifier clf;
  try {
    auto j = json::parse(text);
    if (j.at("format") != "ironyprof-model") throw Error(ErrorCode::CorruptArtifact, "not a model artifact");
    j.at("root_seed").get_to(clf.root_seed);
    j.at("config_hash").get_to(clf.config_hash);
    j.at("fingerprint").get_to(clf.fingerprint);
    j.at("tweet_slots").get_to(clf.tweet_slots);
    j.at("feature_names").get_to(clf.feature_names);
    j.at("feature_count").get_to(clf.feature_count_);
    const auto& s = j.at("spec");
    auto& spec = clf.spec_;
    spec.kind = parse_model_kind(s.at("kind").get<std::string>());
    s.at("seed").get_to(spec.seed);
    if (spec.kind == ModelKind::RandomForest) {
      s.at("n_estimators").get_to(spec.n_estimators);
      s.at("bootstrap").get_to(spec.bootstrap);
      spec.tree.criterion = parse_criterion(s.at("criterion").get<std::string>());
      s.at("max_depth").get_to(spec.tree.max_depth);
      spec.tree.max_features = parse_max_features(s.at("max_features").get<std::string>());
      s.at("min_samples_split").get_to(spec.tree.min_samples_split);
      ForestModel forest;
      forest.params = spec.tree;
      forest.n_estimators = spec.n_estimators;
      forest.seed = spec.seed;
      forest.bootstrap = spec.bootstrap;
      for (const auto& t : j.at("trees")) {
        forest.tree_seeds.push_back(t.at("seed").get<std::uint64_t>());
        Tree tree;
        node_from_json(t.at("root"), tree);
        for (const auto& n : tree.nodes) {
          if (n.feature >= static_cast<int>(clf.feature_count_)) {
            throw Error(ErrorCode::CorruptArtifact, "tree splits on a feature beyond the matrix width");
          }
        }
        forest.trees.push_back(std::move(tree));
      }
      if (forest.trees.size() != forest.n_estimators) {
        throw Error(ErrorCode::CorruptArtifact, "tree count does not match n_estimators");
      }
      clf.model_ = std::move(forest);
    } else {
      s.at("C").get_to(spec.c);
      auto linear = linear_from_json(j.at("linear"));
      if (linear.weights.size() != clf.feature_count_) {
        throw Error(ErrorCode::CorruptArtifact, "weight count does not match the feature count");
      }
      if (spec.kind == ModelKind::LogisticRegression) {
        LogRegFit fit;
        fit.model = std::move(linear);
        j.at("iterations").get_to(fit.iterations);
        j.at("gradient_norm").get_to(fit.gradient_norm);
        clf.model_ = std::move(fit);
      } else {
        clf.model_ = std::move(linear);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, std::string("model artifact: ") + e.what());
  }
  return clf;
}

void Classifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json() << '\n';
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace ironyprof::learn
