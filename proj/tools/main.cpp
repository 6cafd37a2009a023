// ironyprof command-line tool.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ironyprof/corpus.hpp"
#include "ironyprof/error.hpp"
#include "ironyprof/features.hpp"
#include "ironyprof/parallel.hpp"
#include "ironyprof/pipeline.hpp"
#include "ironyprof/synth.hpp"

namespace fs = std::filesystem;
namespace ip = ironyprof::pipeline;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<fs::path> maybe_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Irony author profiling: ingest, featurize, select, train and evaluate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  ip::RunConfig config;
  auto& ex = config.extractor;
  std::string features_list;
  std::string lexicon;
  std::string tag_lexicon;
  std::string suffix_rules;
  std::string secondary_scores;
  std::string rules_mode = "default";

  app.add_option("--seed", config.seed, "Root seed")->capture_default_str();
  app.add_option("--tweet-slots", config.tweet_slots, "Tweets per author (T)")->capture_default_str();
  app.add_option("--folds", config.folds, "Cross-validation folds")->capture_default_str();
  app.add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();
  app.add_option("--train-ratio", config.train_ratio, "Share of authors used for training")->capture_default_str();
  app.add_flag("--stratified", config.stratified_folds, "Stratify folds by label");
  app.add_option("--features", features_list, "Comma-separated feature blocks (default: all)");
  app.add_option("--k-min", ex.k_min, "Smallest topic count tried")->capture_default_str();
  app.add_option("--k-max", ex.k_max, "Largest topic count tried")->capture_default_str();
  app.add_option("--lda-iterations", ex.lda_iterations, "Gibbs sweeps per topic model")->capture_default_str();
  app.add_option("--infer-iterations", ex.infer_iterations, "Gibbs sweeps per inferred document")
      ->capture_default_str();
  app.add_option("--lda-min-count", ex.lda_min_count, "Minimum token count for the topic vocabulary")
      ->capture_default_str();
  app.add_option("--lda-alpha", ex.lda_alpha_numerator, "alpha = value / K")->capture_default_str();
  app.add_option("--lda-beta", ex.lda_beta, "Topic-word prior")->capture_default_str();
  app.add_flag("--lda-per-user", ex.lda_per_user, "One topic-model document per author");
  app.add_option("--min-df", ex.vocab.min_df, "Lower document-frequency cutoff")->capture_default_str();
  app.add_option("--max-df", ex.vocab.max_df, "Upper document-frequency cutoff")->capture_default_str();
  app.add_option("--ngram-max", ex.vocab.ngram_max, "Longest n-gram in the TF-IDF vocabulary")
      ->capture_default_str();
  app.add_option("--clusters", ex.clusters, "k-means clusters")->capture_default_str();
  app.add_option("--lexicon", lexicon, "Sentiment lexicon TSV (default: bundled)");
  app.add_option("--tag-lexicon", tag_lexicon, "POS tag lexicon TSV (default: bundled)");
  app.add_option("--suffix-rules", suffix_rules, "POS suffix rules TSV (default: bundled)");
  app.add_option("--secondary-scores", secondary_scores, "Ingested second-analyzer scores (JSON lines)");
  app.add_option("--rules", rules_mode, "Rule modifiers of the rules analyzer")
      ->check(CLI::IsMember({"default", "none"}))
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Collect author XML files into a JSON-lines corpus");
  std::string xml_dir;
  std::string truth;
  std::string ingest_out;
  ingest->add_option("--xml-dir", xml_dir, "Directory of <author>.xml files")->required();
  ingest->add_option("--truth", truth, "truth.txt with id:::I|NI lines");
  ingest->add_option("--out", ingest_out, "Output corpus (.jsonl)")->required();

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Fit extractors on the training split and write matrices");
  std::string corpus_path;
  std::string out_dir;
  featurize->add_option("--corpus", corpus_path, "Corpus (.jsonl)")->required();
  featurize->add_option("--out", out_dir, "Output directory")->required();

  // select
  auto* select = app.add_subcommand("select", "Run the per-category feature selection");
  std::string train_matrix;
  select->add_option("--train", train_matrix, "Training matrix (.irfm)")->required();
  select->add_option("--out", out_dir, "Output directory")->required();

  // grid-search
  auto* grid = app.add_subcommand("grid-search", "Cross-validated hyperparameter grid");
  std::string family = "rf";
  std::string selection_path;
  grid->add_option("--train", train_matrix, "Training matrix (.irfm)")->required();
  grid->add_option("--family", family, "Model family")->check(CLI::IsMember({"rf", "lr", "svm"}))->capture_default_str();
  grid->add_option("--selection", selection_path, "selection.json whose features to use");
  grid->add_option("--out", out_dir, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model artifact");
  std::string target = "final-rf";
  std::string params_path;
  std::string model_path;
  train->add_option("--train", train_matrix, "Training matrix (.irfm)")->required();
  train->add_option("--target", target, "baseline-lr, baseline-rf, final-rf, final-lr or final-svm")
      ->check(CLI::IsMember({"baseline-lr", "baseline-rf", "final-rf", "final-lr", "final-svm"}))
      ->capture_default_str();
  train->add_option("--selection", selection_path, "selection.json whose features to use");
  train->add_option("--params", params_path, "best_params JSON from grid-search");
  train->add_option("--out", model_path, "Model artifact (.json)")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a labelled matrix");
  std::string test_matrix;
  evaluate->add_option("--model", model_path, "Model artifact")->required();
  evaluate->add_option("--test", test_matrix, "Test matrix (.irfm)")->required();
  evaluate->add_option("--out", out_dir, "Output directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Label authors with a trained model");
  std::string matrix_path;
  std::string extractors_path;
  std::string predict_out;
  predict->add_option("--model", model_path, "Model artifact")->required();
  auto* m_opt = predict->add_option("--matrix", matrix_path, "Feature matrix (.irfm)");
  auto* e_opt = predict->add_option("--extractors", extractors_path, "extractors.json from featurize");
  predict->add_option("--corpus", corpus_path, "Corpus (.jsonl) to featurize with --extractors");
  predict->add_option("--out", predict_out, "Predictions CSV")->required();
  m_opt->excludes(e_opt);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled corpus");
  ironyprof::synth::SynthOptions synth_options;
  synth->add_option("--authors", synth_options.authors, "Author count (even)")->capture_default_str();
  synth->add_option("--tweets", synth_options.tweets_per_author, "Tweets per author")->capture_default_str();
  synth->add_option("--signal", synth_options.signal_strength, "Signal strength in [0, 1]")->capture_default_str();
  synth->add_option("--out", out_dir, "Output directory (XML files + truth.txt)")->required();

  // report
  auto* report = app.add_subcommand("report", "Top terms, TF-IDF export, PCA projection and topic words");
  std::string features_dir;
  report->add_option("--features-dir", features_dir, "featurize output directory")->required();
  report->add_option("--corpus", corpus_path, "Corpus (.jsonl)")->required();
  report->add_option("--out", out_dir, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "featurize, select, train final-rf and evaluate");
  run->add_option("--corpus", corpus_path, "Corpus (.jsonl)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    config.features = split_list(features_list);
    ex.lexicon_path = maybe_path(lexicon);
    ex.tag_lexicon_path = maybe_path(tag_lexicon);
    ex.suffix_rules_path = maybe_path(suffix_rules);
    ex.secondary_scores_path = maybe_path(secondary_scores);
    if (rules_mode == "none") ex.rules = ironyprof::sentiment::RuleConfig::none();
    ironyprof::set_default_jobs(config.jobs);
    auto selected_features = [&]() -> std::vector<std::string> {
      if (!selection_path.empty()) return ip::read_selection(selection_path);
      return config.features;
    };

    if (*ingest) {
      auto s = ip::ingest(xml_dir, maybe_path(truth), ingest_out);
      std::cout << "authors " << s.authors << " (I " << s.ironic << ", NI " << s.not_ironic << ", unlabeled "
                << s.unlabeled << ") -> " << ingest_out << '\n';
    } else if (*featurize) {
      auto paths = ip::featurize(corpus_path, config, out_dir);
      std::cout << "wrote " << paths.train_matrix.string() << ", " << paths.test_matrix.string() << ", "
                << paths.manifest.string() << '\n';
    } else if (*select) {
      auto outcome = ip::select(train_matrix, config, out_dir);
      for (const auto* r : {&outcome.sentiment, &outcome.topic, &outcome.lexical}) {
        std::cout << r->category << ": " << r->rows.size() << " subsets, best F1 "
                  << f4(r->rows[r->best].result.mean_f1) << '\n';
      }
      std::cout << "selected:";
      for (const auto& n : outcome.selected) std::cout << ' ' << n;
      std::cout << '\n';
    } else if (*grid) {
      auto fam = family == "rf"   ? ip::GridFamily::RandomForest
                 : family == "lr" ? ip::GridFamily::LogisticRegression
                                  : ip::GridFamily::LinearSvm;
      auto result = ip::grid_search(train_matrix, fam, selected_features(), config, out_dir);
      std::cout << result.table.size() << " candidates, best: " << result.best_spec().describe() << " (F1 "
                << f4(result.table[result.best].result.mean_f1) << ")\n";
    } else if (*train) {
      std::optional<ironyprof::learn::ModelSpec> params;
      if (!params_path.empty()) params = ip::read_params(params_path);
      auto model = ip::train(train_matrix, ip::parse_target(target), selected_features(), params, config, model_path);
      std::cout << "trained " << model.spec().describe() << " on " << model.feature_count() << " columns -> "
                << model_path << '\n';
    } else if (*evaluate) {
      auto m = ip::evaluate(model_path, test_matrix, out_dir);
      std::cout << "F1 " << f4(m.f1.f1) << "  precision " << f4(m.f1.precision) << "  recall " << f4(m.f1.recall)
                << "  AUC " << f4(m.roc.auc) << '\n';
    } else if (*predict) {
      if (!matrix_path.empty()) {
        ip::predict_matrix_file(model_path, matrix_path, predict_out);
      } else {
        if (extractors_path.empty() || corpus_path.empty()) {
          throw ironyprof::Error(ironyprof::ErrorCode::InvalidArgument,
                                 "predict needs --matrix, or --extractors with --corpus");
        }
        ip::predict_corpus(model_path, extractors_path, corpus_path, predict_out);
      }
      std::cout << "wrote " << predict_out << '\n';
    } else if (*synth) {
      synth_options.seed = config.seed;
      auto authors = ironyprof::synth::generate(synth_options);
      ironyprof::synth::write_directory(out_dir, authors);
      std::cout << "wrote " << authors.size() << " authors to " << out_dir << '\n';
    } else if (*report) {
      ip::report(features_dir, corpus_path, config, out_dir);
      std::cout << "wrote reports to " << out_dir << '\n';
    } else if (*run) {
      auto r = ip::run_pipeline(corpus_path, config, out_dir);
      std::cout << "selected:";
      for (const auto& n : r.selection.selected) std::cout << ' ' << n;
      std::cout << "\nF1 " << f4(r.metrics.f1.f1) << "  AUC " << f4(r.metrics.roc.auc) << '\n';
    }
  } catch (const ironyprof::Error& e) {
    std::cerr << "ironyprof: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ironyprof: " << e.what() << '\n';
    return 100;
  }
  return 0;
}
