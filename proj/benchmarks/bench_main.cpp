#include <benchmark/benchmark.h>

#include "ironyprof/eval.hpp"
#include "ironyprof/learn.hpp"
#include "ironyprof/lexical.hpp"
#include "ironyprof/random.hpp"
#include "ironyprof/topics.hpp"

namespace ironyprof {
namespace {

std::vector<lexical::AuthorDoc> random_docs(std::size_t authors, std::size_t tweets, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<lexical::AuthorDoc> docs(authors);
  for (auto& doc : docs) {
    for (std::size_t t = 0; t < tweets; ++t) {
      std::vector<std::string> tw;
      for (int i = 0; i < 10; ++i) tw.push_back("w" + std::to_string(rng.below(500)));
      doc.push_back(std::move(tw));
    }
  }
  return docs;
}

void BM_Tfidf(benchmark::State& state) {
  auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 50, 1);
  auto vocab = lexical::build_vocab(docs);
  for (auto _ : state) benchmark::DoNotOptimize(lexical::tfidf(docs, vocab));
}
BENCHMARK(BM_Tfidf)->Arg(100)->Arg(400);

void BM_LdaSweeps(benchmark::State& state) {
  auto authors = random_docs(50, 20, 2);
  std::vector<topics::TokenDoc> docs;
  for (auto& a : authors) docs.insert(docs.end(), a.begin(), a.end());
  topics::LdaOptions opt;
  opt.num_topics = static_cast<std::size_t>(state.range(0));
  opt.iterations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(topics::fit_lda(docs, opt));
}
BENCHMARK(BM_LdaSweeps)->Arg(5)->Arg(14);

void BM_ForestFit(benchmark::State& state) {
  Rng rng(3);
  const std::size_t n = 300, d = static_cast<std::size_t>(state.range(0));
  Matrix x(n, d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal() + 0.3 * y[i];
  }
  learn::TreeParams p;
  for (auto _ : state) benchmark::DoNotOptimize(learn::fit_forest(x, y, p, 50, 7));
}
BENCHMARK(BM_ForestFit)->Arg(20)->Arg(200);

void BM_RocAuc(benchmark::State& state) {
  Rng rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<int> y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::roc_auc(y, s));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace ironyprof

BENCHMARK_MAIN();
