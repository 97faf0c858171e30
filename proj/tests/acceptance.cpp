// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fans/baselines.hpp"
#include "fans/concurrency.hpp"
#include "fans/corpus.hpp"
#include "fans/extraction.hpp"
#include "fans/matchers.hpp"
#include "fans/metaeval.hpp"
#include "fans/scoring.hpp"
#include "fans/text.hpp"
#include "fans_cli.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace fans;
namespace ft = fans::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && secs >= budget_seconds) {
    o.pass = false;
    o.detail += fmt::format(" (over the {:.0f} s budget)", budget_seconds);
  }
  if (!o.pass) ++failures;
  std::cout << fmt::format("{} {} [{:.2f} s] {}", o.pass ? "PASS" : "FAIL", name, secs, o.detail) << std::endl;
}

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& xs) { return xs[rng() % xs.size()]; }

std::vector<std::string> distinct_sample(std::mt19937_64& rng, const std::vector<std::string>& pool, std::size_t n) {
  std::vector<std::string> out = pool;
  std::shuffle(out.begin(), out.end(), rng);
  out.resize(std::min(n, out.size()));
  return out;
}

const std::vector<std::string> kEntityWords = {"north", "river", "council", "state", "union", "port", "new",
                                               "york",  "mr.",   "smith",   "army",  "bank",  "gulf", "east"};

std::string random_entity(std::mt19937_64& rng) {
  std::string s;
  for (std::size_t i = 0, n = 1 + rng() % 3; i < n; ++i) s += (i ? " " : "") + pick(rng, kEntityWords);
  return s;
}

Outcome f1_oracle() {
  std::mt19937_64 rng(1001);
  StubEmbedder emb;
  const EntityMatchOptions opts;
  std::size_t augmented = 0;
  for (int round = 0; round < 1000; ++round) {
    // Fresh random concept table each round so overlap edges create contention.
    std::vector<std::string> pool;
    while (pool.size() < 14) {
      auto e = random_entity(rng);
      if (std::find(pool.begin(), pool.end(), e) == pool.end()) pool.push_back(e);
    }
    std::map<std::string, std::vector<std::string>> table;
    for (const auto& e : pool) table[e] = {"c" + std::to_string(rng() % 5), "c" + std::to_string(rng() % 5)};
    FixtureConcepts concepts(table);
    const auto a = distinct_sample(rng, pool, rng() % 7);
    const auto b = distinct_sample(rng, pool, rng() % 7);

    std::vector<std::vector<bool>> adj(a.size(), std::vector<bool>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) {
        const auto ca = concepts.neighbors(a[i]), cb = concepts.neighbors(b[j]);
        adj[i][j] = decide_pair(a[i], b[j], stub_embed(a[i]), stub_embed(b[j]), &ca, &cb, opts).matched;
      }
    const std::size_t m = ft::brute_force_max_matching(adj);
    const double oracle = (a.empty() && b.empty()) ? 1.0 : 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
    const auto r = match_entity_sets(a, b, opts, emb, &concepts);
    if (r.f1 != oracle || r.matched.size() != m)
      return {false, fmt::format("round {}: f1 {} vs oracle {}", round, r.f1, oracle)};
    augmented += m > 0;
  }
  return {true, fmt::format("1000 pairs agree ({} with nonempty matchings)", augmented)};
}

Outcome when_coverage() {
  struct Case {
    std::vector<std::string> items;
    std::set<std::string> expected;
  };
  const std::vector<Case> cases = {
      {{"Thursday", "1967", "August 13"}, {"day:thursday", "year:1967", "month_day:august 13"}},
      {{"03/04/2020"}, {"date:2020-03-04"}},
      {{"25/12/2020"}, {"date:2020-12-25"}},
      {{"12-25-2020"}, {"date:2020-12-25"}},
      {{"monday", "TUESDAY", "Wednesday", "friday", "Saturday", "sunday"},
       {"day:monday", "day:tuesday", "day:wednesday", "day:friday", "day:saturday", "day:sunday"}},
      {{"January", "feb", "Dec."}, {"month:january", "month:february", "month:december"}},
      {{"3 PM", "10:30 a.m.", "11am"}, {"clock:3:00 pm", "clock:10:30 am", "clock:11:00 am"}},
      {{"morning", "Afternoon", "late evening", "at night"},
       {"daypart:morning", "daypart:afternoon", "daypart:evening", "daypart:night"}},
      {{"no time was given"}, {}},
  };
  auto labels = [](const std::vector<std::string>& items, DateOrder order) {
    std::set<std::string> out;
    for (const auto& t : extract_time_mentions(items, order)) out.insert(std::string(to_string(t.kind)) + ":" + t.surface);
    return out;
  };
  for (const auto& c : cases)
    if (labels(c.items, DateOrder::mdy) != c.expected) return {false, "mismatch on '" + c.items.front() + "'"};
  if (labels({"03/04/2020"}, DateOrder::dmy) != std::set<std::string>{"date:2020-04-03"})
    return {false, "day-first order ignored"};

  FacetSet left, right;
  left.when = {"Thursday", "1967", "August 13"};
  right.when = {"Thursday"};
  const double f1 = score_when(left, right).f1;
  if (std::abs(f1 - 0.5) > 1e-12) return {false, fmt::format("Table pair F1 {}", f1)};
  return {true, fmt::format("{} pattern cases; left/right F1 = {}", cases.size() + 1, f1)};
}

Outcome aggregation_identities() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    FacetScores s;
    for (auto& v : s.values) v = u(rng);
    if (aggregate(s, AggregationConfig::alpha_split(0.0)) != s.descriptive_mean()) return {false, "alpha 0"};
    if (aggregate(s, AggregationConfig::alpha_split(1.0)) != s.entity_mean()) return {false, "alpha 1"};
    const double a = u(rng);
    WeightVector w;
    w.values = {a / 3, a / 3, a / 3, (1 - a) / 3, (1 - a) / 3, (1 - a) / 3};
    worst = std::max(worst, std::abs(aggregate(s, AggregationConfig::alpha_split(a)) -
                                     aggregate(s, AggregationConfig::weighted(w))));
  }
  return {worst <= 1e-12, fmt::format("max |alpha_split - weighted| = {:.3g}", worst)};
}

Outcome kendall_oracle() {
  std::mt19937_64 rng(500);
  double worst = 0.0;
  int checked = 0;
  while (checked < 500) {
    const std::size_t n = 2 + rng() % 49;
    const bool tied = checked % 2 == 0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = tied ? static_cast<double>(rng() % 5) : static_cast<double>(rng()) / 1e12;
      y[i] = tied ? static_cast<double>(rng() % 4) : static_cast<double>(rng()) / 1e12;
    }
    const double oracle = ft::brute_force_kendall(x, y, TauVariant::b);
    if (std::isnan(oracle)) continue;
    worst = std::max(worst, std::abs(kendall_tau_b(x, y) - oracle));
    ++checked;
  }
  return {worst <= 1e-12, fmt::format("500 lists, max error {:.3g}", worst)};
}

Outcome synthetic_monotone() {
  const auto synth = ft::make_monotone_corpus();
  const auto& corpus = synth.corpus;
  ft::MapLlmProvider llm;
  for (const auto& [id, text] : synth.transcripts) llm.add(corpus.at(id), PromptLevel::L3, text);
  std::map<std::string, FacetSet> facets;
  for (const auto& n : corpus.narratives()) {
    const auto outcome = extract_facets(n, PromptLevel::L3, llm, nullptr);
    if (!outcome.ok()) return {false, "extraction failed for " + n.id};
    facets.emplace(n.id, outcome.facets());
  }
  const auto sample = sample_pairs(corpus, kDefaultPerLabelCap, kDefaultSeed);
  StubEmbedder stub(synth.embed_dim);
  CachingEmbedder emb(stub);
  GazetteerNer ner;
  const Providers providers{emb, ner, nullptr};
  const auto& lps = sample.labeled_pairs;
  std::vector<FacetScores> scores(lps.size());
  std::vector<double> rouge(lps.size());
  parallel_for(lps.size(), std::max(1u, std::thread::hardware_concurrency()), [&](std::size_t i) {
    const auto& p = lps[i].pair;
    scores[i] = score_pair(facets.at(p.first), facets.at(p.second), {}, providers);
    rouge[i] = rouge_n(corpus.at(p.first).payload(), corpus.at(p.second).payload(), 1).f1;
  });
  std::vector<ScoredPair> star, dagger, r1;
  for (std::size_t i = 0; i < lps.size(); ++i) {
    star.push_back({lps[i].pair, aggregate(scores[i], AggregationConfig::alpha_split(kDefaultAlpha))});
    dagger.push_back({lps[i].pair, aggregate(scores[i], AggregationConfig::weighted(default_weights()))});
    r1.push_back({lps[i].pair, rouge[i]});
  }
  const double t_star = evaluate_metric("FaNS*", star, sample).tau;
  const double t_dagger = evaluate_metric("FaNS+", dagger, sample).tau;
  const double t_rouge = evaluate_metric("ROUGE-1", r1, sample).tau;
  const bool ok = t_star == 1.0 && t_dagger == 1.0 && t_rouge < 1.0;
  return {ok, fmt::format("{} narratives, {} pairs: FaNS* tau {}, weighted tau {}, ROUGE-1 tau {:.4f}", corpus.size(),
                          lps.size(), t_star, t_dagger, t_rouge)};
}

Outcome rouge_checks() {
  const auto hand = rouge_n("the cat sat", "the cat", 1);
  if (std::abs(hand.f1 - 0.8) > 1e-12) return {false, fmt::format("hand F1 {}", hand.f1)};
  if (rouge_n("a b c d e", "a b c d e", 1).f1 != 1.0 || rouge_n("a b c d e", "a b c d e", 2).f1 != 1.0 ||
      rouge_l("a b c d e", "a b c d e").f1 != 1.0)
    return {false, "identity"};
  std::mt19937_64 rng(36);
  const std::vector<std::string> vocab = {"the", "cat", "sat", "on", "mat", "a", "dog", "ran", "to", "it"};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> c, r;
    for (std::size_t k = 1 + rng() % 25; k > 0; --k) c.push_back(pick(rng, vocab));
    for (std::size_t k = 1 + rng() % 25; k > 0; --k) r.push_back(pick(rng, vocab));
    for (std::size_t n : {1u, 2u}) {
      const auto got = rouge_n(c, r, n);
      const auto overlap = static_cast<double>(ft::multiset_ngram_overlap(c, r, n));
      const auto tc = ft::ngram_total(c, n), tr = ft::ngram_total(r, n);
      if (tc == 0 || tr == 0) continue;
      if (got.precision != overlap / static_cast<double>(tc) || got.recall != overlap / static_cast<double>(tr))
        return {false, fmt::format("text {} n={} disagrees with the oracle", i, n)};
    }
  }
  return {true, fmt::format("hand F1 = {}; 500 texts agree with the oracle", hand.f1)};
}

struct PipelineOutputs {
  std::string stats, scores, metaeval_csv, metaeval_json, metaeval_stdout;
  bool operator==(const PipelineOutputs&) const = default;
};

PipelineOutputs run_pipeline(const ft::TempDir& dir, const std::string& tag, int workers, const std::string& llm) {
  const std::string corpus = ft::fixture_path("corpus.jsonl").string();
  const std::string cache = (dir / (tag + "-cache")).string();
  const std::string out = (dir / tag).string();
  std::vector<std::string> common = {"--corpus", corpus, "--cache", cache, "--level", "3", "--offline",
                                     "--llm-fixtures", llm, "--workers", std::to_string(workers),
                                     "--concept-fixtures", ft::fixture_path("concepts.json").string()};
  auto with = [&](std::string cmd, std::vector<std::string> extra) {
    std::vector<std::string> args{std::move(cmd)};
    args.insert(args.end(), common.begin(), common.end());
    args.insert(args.end(), extra.begin(), extra.end());
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (code != 0) throw std::runtime_error(fmt::format("{} exited {}: {}", args.front(), code, e.str()));
    return o.str();
  };
  std::filesystem::create_directories(out);
  PipelineOutputs p;
  with("extract", {"--out", out + "/stats.tsv"});
  with("score", {"--skip-missing", "--weights", "reference", "--alpha", "0.2", "--out", out + "/scores.jsonl"});
  with("baselines", {"--out", out + "/baselines.jsonl"});
  p.metaeval_stdout = with("metaeval", {"--scores", out + "/scores.jsonl", "--baselines", out + "/baselines.jsonl",
                                        "--out", out + "/meta.csv"});
  p.stats = ft::read_text(out + "/stats.tsv");
  p.scores = ft::read_text(out + "/scores.jsonl");
  p.metaeval_csv = ft::read_text(out + "/meta.csv");
  p.metaeval_json = ft::read_text(out + "/meta.csv.json");
  return p;
}

Outcome determinism() {
  ft::TempDir dir;
  const auto corpus = load_corpus(ft::fixture_path("corpus.jsonl"));
  const std::string llm = (dir / "llm").string();
  ft::materialize_llm_fixtures(corpus, PromptLevel::L3, ft::fixture_path("transcripts"), llm);
  const auto a = run_pipeline(dir, "run1", 1, llm);
  const auto b = run_pipeline(dir, "run2", 1, llm);
  const auto c = run_pipeline(dir, "run8", 8, llm);
  if (a.scores.find("\"uae-left\",\"uae-right\"") == std::string::npos) return {false, "Table pair not scored"};
  if (!(a == b)) return {false, "two 1-worker runs differ"};
  if (!(a == c)) return {false, "1-worker and 8-worker runs differ"};
  return {true, fmt::format("{} bytes of reports identical across 3 runs", a.stats.size() + a.scores.size() +
                                                                              a.metaeval_csv.size() + a.metaeval_json.size())};
}

Outcome stats_table() {
  const auto synth = ft::make_stats_corpus(200, {{Leaning::left, 6}, {Leaning::right, 6}, {Leaning::center, 6},
                                                 {Leaning::theme, 6}});
  ft::MapLlmProvider llm;
  for (const auto& [id, text] : synth.transcripts) llm.add(synth.corpus.at(id), PromptLevel::L1, text);
  ExtractionStats stats;
  for (const auto& n : synth.corpus.narratives()) extract_facets(n, PromptLevel::L1, llm, nullptr, {}, &stats);
  const auto table = stats.to_table();
  const auto last = table.substr(table.rfind('\n', table.size() - 2) + 1);
  const bool ok = table.find("\t97.0%") != std::string::npos && stats.total().attempted == 800;
  return {ok, fmt::format("{} of {} succeeded; {}", stats.total().succeeded, stats.total().attempted,
                          last.substr(0, last.find_last_not_of('\n') + 1))};
}

Outcome reference_weights() {
  const std::array<double, kFacetCount> taus = {0.273, 0.158, 0.145, 0.414, 0.271, 0.248};
  double total = 0.0;
  for (double t : taus) total += t;
  const double expected = 0.414 / total;
  const double w = weights_from_correlations(taus)[Facet::what];
  return {std::abs(w - expected) <= 1e-3 && std::abs(w - 0.2743) <= 1e-3, fmt::format("w_what = {:.6f}", w)};
}

Outcome symmetry_suite() {
  std::mt19937_64 rng(640);
  StubEmbedder stub;
  CachingEmbedder emb(stub);
  GazetteerNer ner;
  auto concepts = FixtureConcepts::load(ft::fixture_path("concepts.json"));
  const Providers providers{emb, ner, &concepts};
  const std::vector<std::string> who = {"president trump", "mr. netanyahu", "israel", "united arab emirates",
                                        "u.s. diplomats", "palestinians", "benjamin netanyahu", "trump", "iran"};
  const std::vector<std::string> when = {"Thursday", "1967", "August 13", "03/04/2020", "3 pm",
                                         "morning",  "May",  "2020-08-13", "Sept. 3rd"};
  const std::vector<std::string> where = {"Israel", "Middle East", "West Bank", "Arab lands", "Abu Dhabi", "Washington"};
  const std::vector<std::string> words = {"talks", "resumed", "the", "deal", "was", "signed", "leaders", "met",
                                          "peace", "troops", "left", "markets", "rose", "quickly"};
  auto sentence = [&] {
    std::string s;
    for (std::size_t k = 2 + rng() % 5; k > 0; --k) s += (s.empty() ? "" : " ") + pick(rng, words);
    return s + ".";
  };
  auto random_set = [&] {
    FacetSet fs;
    fs.who = distinct_sample(rng, who, rng() % 4);
    fs.when = distinct_sample(rng, when, rng() % 4);
    const auto places = distinct_sample(rng, where, rng() % 3);
    for (const auto& p : places) {
      fs.where.push_back(p);
      fs.where_text += (fs.where_text.empty() ? "" : ", ") + p;
    }
    for (auto* t : {&fs.what, &fs.why, &fs.how})
      for (std::size_t k = rng() % 3; k > 0; --k) *t += (t->empty() ? "" : " ") + sentence();
    return fs;
  };
  const auto star = AggregationConfig::alpha_split(kDefaultAlpha);
  const auto dagger = AggregationConfig::weighted(default_weights());
  for (int i = 0; i < 500; ++i) {
    const auto a = random_set(), b = random_set();
    const auto ab = score_pair(a, b, {}, providers), ba = score_pair(b, a, {}, providers);
    const auto aa = score_pair(a, a, {}, providers);
    for (Facet f : kAllFacets) {
      if (ab[f] != ba[f]) return {false, fmt::format("input {}: {} not symmetric", i, facet_name(f))};
      if (aa[f] != 1.0) return {false, fmt::format("input {}: {} identity gives {}", i, facet_name(f), aa[f])};
      if (ab[f] < 0.0 || ab[f] > 1.0) return {false, fmt::format("input {}: {} out of range", i, facet_name(f))};
      const auto& ev = ab.evidence[index_of(f)];
      const auto& rev = ba.evidence[index_of(f)];
      if (ev.precision != rev.recall) return {false, fmt::format("input {}: {} P/R not swapped", i, facet_name(f))};
    }
    for (const auto& cfg : {star, dagger}) {
      if (aggregate(ab, cfg) != aggregate(ba, cfg)) return {false, fmt::format("input {}: aggregate asymmetric", i)};
      if (aggregate(aa, cfg) != 1.0) return {false, fmt::format("input {}: aggregate identity", i)};
    }
    const std::string ta = a.what + " " + a.why, tb = b.what + " " + b.how;
    const auto r = rouge_n(ta, tb, 1), rr = rouge_n(tb, ta, 1);
    const auto s = bertscore_like(ta, tb, emb), sr = bertscore_like(tb, ta, emb);
    if (r.f1 != rr.f1 || r.precision != rr.recall) return {false, fmt::format("input {}: ROUGE asymmetric", i)};
    if (s.f1 != sr.f1 || s.precision != sr.recall) return {false, fmt::format("input {}: BERTScore asymmetric", i)};
    if (!text::is_blank(ta) &&
        (rouge_n(ta, ta, 1).f1 != 1.0 || rouge_l(ta, ta).f1 != 1.0 || bertscore_like(ta, ta, emb).f1 != 1.0))
      return {false, fmt::format("input {}: baseline identity", i)};
  }
  return {true, "500 random facet-set pairs: 6 facets, 2 aggregators, 2 baselines"};
}

}  // namespace

int main() {
  criterion("F1 oracle equivalence", 10, f1_oracle);
  criterion("When extractor coverage", 0, when_coverage);
  criterion("Aggregation identities", 0, aggregation_identities);
  criterion("Kendall tau-b oracle", 0, kendall_oracle);
  criterion("Synthetic monotone corpus", 60, synthetic_monotone);
  criterion("ROUGE hand checks", 0, rouge_checks);
  criterion("Determinism", 0, determinism);
  criterion("Success-rate table", 0, stats_table);
  criterion("Weights from reference taus", 0, reference_weights);
  criterion("Symmetry suite", 0, symmetry_suite);
  std::cout << (failures == 0 ? "ALL PASS" : fmt::format("{} FAILED", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
