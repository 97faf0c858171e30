#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "fans/baselines.hpp"
#include "fans/matchers.hpp"
#include "fans/metaeval.hpp"
#include "fans/scoring.hpp"

namespace {

const std::vector<std::string> kWords = {"president", "israel", "talks", "peace", "treaty", "signed",
                                         "border",    "troops", "city",  "east",  "minister", "deal"};

std::string words(std::mt19937_64& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + kWords[rng() % kWords.size()];
  return s;
}

void BM_KendallTau(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 4);
    y[i] = static_cast<double>(rng() % 1000) / 1000.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fans::kendall_tau_b(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

void BM_FuzzyRatio(benchmark::State& state) {
  const std::string a = "israeli prime minister benjamin netanyahu";
  const std::string b = "mr. netanyahu of israel";
  for (auto _ : state) benchmark::DoNotOptimize(fans::fuzzy_ratio(a, b));
}
BENCHMARK(BM_FuzzyRatio);

void BM_ScorePair(benchmark::State& state) {
  std::mt19937_64 rng(2);
  fans::StubEmbedder stub;
  fans::CachingEmbedder emb(stub);
  fans::GazetteerNer ner;
  fans::FacetSet a, b;
  a.who = {"president trump", "israeli prime minister benjamin netanyahu", "palestinians"};
  b.who = {"president trump", "israel", "mr. netanyahu"};
  a.when = {"Thursday", "1967", "August 13"};
  b.when = {"Thursday"};
  a.where = {"arab lands", "israel"};
  b.where = {"middle east"};
  a.where_text = "Arab lands, Israel";
  b.where_text = "Middle East";
  a.what = words(rng, 20) + ". " + words(rng, 15) + ".";
  b.what = words(rng, 18) + ".";
  a.why = b.why = words(rng, 12) + ".";
  a.how = words(rng, 10) + ".";
  b.how = words(rng, 10) + ".";
  const fans::Providers providers{emb, ner, nullptr};
  for (auto _ : state) benchmark::DoNotOptimize(fans::score_pair(a, b, {}, providers));
}
BENCHMARK(BM_ScorePair);

void BM_Rouge(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto a = words(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = words(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fans::rouge_n(a, b, 1));
    benchmark::DoNotOptimize(fans::rouge_n(a, b, 2));
    benchmark::DoNotOptimize(fans::rouge_l(a, b));
  }
}
BENCHMARK(BM_Rouge)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
