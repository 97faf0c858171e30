#include "fans_cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fans/baselines.hpp"
#include "fans/concurrency.hpp"
#include "fans/corpus.hpp"
#include "fans/errors.hpp"
#include "fans/extraction.hpp"
#include "fans/hashing.hpp"
#include "fans/matchers.hpp"
#include "fans/metaeval.hpp"
#include "fans/prompts.hpp"
#include "fans/providers.hpp"
#include "fans/scoring.hpp"
#include "fans/text.hpp"

namespace fans::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBlockSize = 512;

struct Options {
  std::string command;
  std::vector<std::string> raw_args;

  std::string corpus;
  std::string cache = ".fans-cache";
  std::vector<std::string> levels{"3"};
  std::optional<double> alpha;
  std::string weights_file;
  bool offline = false;
  std::uint64_t seed = kDefaultSeed;
  std::size_t cap = kDefaultPerLabelCap;
  std::string date_order = "mdy";
  std::string pairs_file;
  std::string scores_file;
  std::string baselines_file;
  std::string out;
  std::string manifest;

  std::string llm_fixtures;
  std::string model = "gpt-3.5-turbo";
  std::string prompt_dir;
  std::string refusal_patterns;
  std::string concept_fixtures;
  std::string gazetteer;
  std::size_t embed_dim = kDefaultStubDim;
  std::size_t workers = 1;
  bool refresh_refusals = false;
  bool skip_missing = false;
  bool extract_missing = false;
  std::string tau_variant = "b";
  bool verbose = false;

  MatchConfig match;
};

struct RunRecord {
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> outputs;
  std::string started_at;
};

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) throw ConfigError(fmt::format("cannot write {}", path.string()));
    o << content;
    if (!o.flush()) throw ConfigError(fmt::format("write failed for {}", path.string()));
  }
  fs::rename(tmp, path);
}

void note_input(RunRecord& rec, const std::string& path) {
  if (!path.empty() && fs::is_regular_file(path)) rec.inputs[path] = sha256_hex(read_file(path));
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

PromptLevel single_level(const Options& o) {
  if (o.levels.size() != 1) throw ConfigError("this command takes exactly one --level");
  const auto l = parse_level(o.levels.front());
  if (!l) throw ConfigError(fmt::format("bad --level '{}'", o.levels.front()));
  return *l;
}

std::vector<PromptLevel> all_levels(const Options& o) {
  std::vector<PromptLevel> out;
  for (const auto& s : o.levels) {
    const auto l = parse_level(s);
    if (!l) throw ConfigError(fmt::format("bad --level '{}'", s));
    if (std::find(out.begin(), out.end(), *l) == out.end()) out.push_back(*l);
  }
  if (out.empty()) throw ConfigError("no --level given");
  return out;
}

TauVariant tau_variant(const Options& o) { return o.tau_variant == "a" ? TauVariant::a : TauVariant::b; }

Corpus require_corpus(const Options& o, RunRecord& rec) {
  if (o.corpus.empty()) throw ConfigError("--corpus is required");
  note_input(rec, o.corpus);
  return load_corpus(o.corpus);
}

PairSample select_pairs(const Options& o, const Corpus& corpus, RunRecord& rec) {
  if (o.pairs_file.empty()) return sample_pairs(corpus, o.cap, o.seed);
  note_input(rec, o.pairs_file);
  std::istringstream in(read_file(o.pairs_file));
  std::vector<PairKey> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::vector<std::string>> rows;
    if (t.front() == '[') {
      // Either one ["a","b"] pair per line or a whole [["a","b"], ...] list.
      try {
        const auto j = nlohmann::json::parse(t);
        if (!j.empty() && j.front().is_array())
          rows = j.get<std::vector<std::vector<std::string>>>();
        else
          rows.push_back(j.get<std::vector<std::string>>());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(o.pairs_file, lineno, e.what());
      }
    } else {
      rows.push_back(text::split_whitespace(t));
    }
    for (const auto& ids : rows) {
      if (ids.size() != 2) throw ParseError(o.pairs_file, lineno, "expected two narrative ids");
      keys.push_back(make_pair_key(ids[0], ids[1]));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return label_pairs(corpus, keys);
}

std::vector<PairKey> sorted_pairs(const PairSample& sample) {
  std::vector<PairKey> keys;
  for (const auto& lp : sample.labeled_pairs) keys.push_back(lp.pair);
  std::sort(keys.begin(), keys.end());
  return keys;
}

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

class OfflineLlm final : public LlmProvider {
 public:
  explicit OfflineLlm(std::string model) : model_(std::move(model)) {}
  std::string complete(const PromptText&) override {
    throw TransportError("offline mode: transcript not cached and no --llm-fixtures given", false);
  }
  std::string model_id() const override { return model_; }

 private:
  std::string model_;
};

struct LlmStack {
  std::unique_ptr<LlmProvider> base;
  std::unique_ptr<LlmProvider> throttled;
  LlmProvider& provider() { return throttled ? *throttled : *base; }
};

LlmStack make_llm(const Options& o) {
  LlmStack s;
  if (!o.llm_fixtures.empty()) {
    s.base = std::make_unique<FixtureLlmProvider>(o.llm_fixtures, o.model);
    return s;
  }
  if (o.offline) {
    s.base = std::make_unique<OfflineLlm>(o.model);
    return s;
  }
  LlmEndpoint ep;
  const auto key = env("FANS_LLM_API_KEY");
  if (!key) throw ConfigError("FANS_LLM_API_KEY is not set; pass --offline or --llm-fixtures to run without an LLM");
  ep.api_key = *key;
  ep.model = o.model;
  if (auto url = env("FANS_LLM_ENDPOINT")) ep.url = *url;
  s.base = std::make_unique<HttpLlmProvider>(ep);
  s.throttled = std::make_unique<ThrottledLlmProvider>(*s.base, static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, o.workers)));
  return s;
}

struct ExtractionSetup {
  std::optional<PromptTemplates> templates;
  std::optional<RefusalDetector> refusals;

  ExtractOptions options(const Options& o) const {
    ExtractOptions eo;
    eo.templates = templates ? &*templates : nullptr;
    eo.refusals = refusals ? &*refusals : nullptr;
    eo.refresh_refusals = o.refresh_refusals;
    return eo;
  }
  const RefusalDetector& detector() const { return refusals ? *refusals : RefusalDetector::defaults(); }
};

ExtractionSetup make_extraction_setup(const Options& o, RunRecord& rec) {
  ExtractionSetup s;
  if (!o.prompt_dir.empty()) s.templates = PromptTemplates::load_dir(o.prompt_dir);
  if (!o.refusal_patterns.empty()) {
    note_input(rec, o.refusal_patterns);
    s.refusals = RefusalDetector::load(o.refusal_patterns);
  }
  return s;
}

struct ScoringStack {
  std::unique_ptr<Embedder> base_embedder;
  std::unique_ptr<CachingEmbedder> embedder;
  std::unique_ptr<NerProvider> ner;
  std::unique_ptr<ConceptProvider> base_concepts;
  std::unique_ptr<CachingConceptProvider> concepts;

  Providers providers() { return Providers{*embedder, *ner, concepts.get()}; }
};

ScoringStack make_scoring_stack(const Options& o, RunRecord& rec) {
  ScoringStack s;
  const auto embed_url = env("FANS_EMBED_ENDPOINT");
  if (!o.offline && embed_url) {
    HttpEndpoint ep;
    ep.url = *embed_url;
    ep.api_key = env("FANS_EMBED_KEY").value_or("");
    ep.model = env("FANS_EMBED_MODEL").value_or("text-embedding-3-small");
    s.base_embedder = std::make_unique<HttpEmbedder>(ep);
  } else {
    s.base_embedder = std::make_unique<StubEmbedder>(o.embed_dim);
  }
  s.embedder = std::make_unique<CachingEmbedder>(*s.base_embedder);

  const auto ner_url = env("FANS_NER_ENDPOINT");
  if (!o.offline && ner_url) {
    HttpEndpoint ep;
    ep.url = *ner_url;
    s.ner = std::make_unique<HttpNer>(ep);
  } else if (!o.gazetteer.empty()) {
    note_input(rec, o.gazetteer);
    s.ner = std::make_unique<GazetteerNer>(Gazetteer::load(o.gazetteer));
  } else {
    s.ner = std::make_unique<GazetteerNer>();
  }

  if (!o.concept_fixtures.empty()) {
    note_input(rec, o.concept_fixtures);
    s.base_concepts = std::make_unique<FixtureConcepts>(FixtureConcepts::load(o.concept_fixtures));
  } else if (!o.offline) {
    s.base_concepts = std::make_unique<ConceptNetClient>(env("FANS_CONCEPTNET_URL").value_or("https://api.conceptnet.io"));
  } else {
    spdlog::info("offline without --concept-fixtures: Where concept fallback disabled");
  }
  if (s.base_concepts) s.concepts = std::make_unique<CachingConceptProvider>(*s.base_concepts);
  return s;
}

/// `{"weights": {...}}`, `{"taus": {...}}`, or the keyword "reference".
WeightVector load_weights(const std::string& spec, RunRecord& rec) {
  if (spec == "reference") return default_weights();
  note_input(rec, spec);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(spec));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", spec, e.what()));
  }
  if (j.contains("weights")) return weights_from_json(j["weights"]);
  if (j.contains("taus")) {
    std::array<double, kFacetCount> taus{};
    for (Facet f : kAllFacets) {
      const auto it = j["taus"].find(std::string(facet_name(f)));
      if (it == j["taus"].end() || !it->is_number())
        throw ConfigError(fmt::format("{}: missing tau for '{}'", spec, facet_name(f)));
      taus[index_of(f)] = it->get<double>();
    }
    return weights_from_correlations(taus);
  }
  throw ConfigError(fmt::format("{}: expected a 'weights' or 'taus' object", spec));
}

std::vector<AggregationConfig> schemes(const Options& o, RunRecord& rec) {
  std::vector<AggregationConfig> out;
  if (o.alpha || o.weights_file.empty()) out.push_back(AggregationConfig::alpha_split(o.alpha.value_or(kDefaultAlpha)));
  if (!o.weights_file.empty()) out.push_back(AggregationConfig::weighted(load_weights(o.weights_file, rec)));
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_prompts(const Options& o, RunRecord& rec, std::ostream& out) {
  const Corpus corpus = require_corpus(o, rec);
  auto setup = make_extraction_setup(o, rec);
  const PromptTemplates& templates = setup.templates ? *setup.templates : PromptTemplates::defaults();
  for (PromptLevel level : all_levels(o)) {
    for (const auto& n : corpus.narratives()) {
      const PromptText p = build_prompt(n, level, templates);
      const std::string h = prompt_hash(p);
      out << n.id << '\t' << to_string(level) << '\t' << h << '\n';
      if (!o.out.empty()) {
        const fs::path path = fs::path(o.out) / (h + ".prompt.txt");
        write_atomically(path, p.render());
        rec.outputs.push_back(path.string());
      }
    }
  }
  return kExitOk;
}

int cmd_extract(const Options& o, RunRecord& rec, std::ostream& out, std::ostream& err) {
  const Corpus corpus = require_corpus(o, rec);
  const auto levels = all_levels(o);
  auto setup = make_extraction_setup(o, rec);
  auto llm = make_llm(o);
  TranscriptCache cache(o.cache);
  const ExtractOptions eo = setup.options(o);

  struct Job {
    const Narrative* narrative;
    PromptLevel level;
  };
  std::vector<Job> jobs;
  for (PromptLevel level : levels)
    for (const auto& n : corpus.narratives()) jobs.push_back({&n, level});

  ExtractionStats stats;
  parallel_for(jobs.size(), o.workers, [&](std::size_t i) {
    extract_facets(*jobs[i].narrative, jobs[i].level, llm.provider(), &cache, eo, &stats);
  });

  const std::string table = stats.to_table();
  out << table;
  if (!o.out.empty()) {
    write_atomically(o.out, table);
    write_atomically(o.out + ".json", stats.to_json() + "\n");
    rec.outputs.push_back(o.out);
    rec.outputs.push_back(o.out + ".json");
  }

  const auto total = stats.total();
  if (total.attempted > 0 && 2 * total.transport_errors > total.attempted) {
    err << fmt::format("error: {} of {} extractions failed in transport\n", total.transport_errors, total.attempted);
    return kExitTransport;
  }
  return kExitOk;
}

int cmd_score(const Options& o, RunRecord& rec, std::ostream& out, std::ostream& err) {
  const Corpus corpus = require_corpus(o, rec);
  const PromptLevel level = single_level(o);
  const PairSample sample = select_pairs(o, corpus, rec);
  const auto keys = sorted_pairs(sample);
  const auto configs = schemes(o, rec);
  auto setup = make_extraction_setup(o, rec);
  TranscriptCache cache(o.cache);

  std::set<std::string> needed;
  for (const auto& k : keys) {
    needed.insert(k.first);
    needed.insert(k.second);
  }
  std::vector<std::string> ids(needed.begin(), needed.end());
  std::vector<std::optional<FacetSet>> found(ids.size());
  std::optional<LlmStack> llm;
  if (o.extract_missing) llm = make_llm(o);
  const ExtractOptions eo = setup.options(o);
  parallel_for(ids.size(), o.workers, [&](std::size_t i) {
    const Narrative& n = corpus.at(ids[i]);
    std::optional<ExtractionOutcome> outcome = cached_outcome(n, level, o.model, cache, setup.detector());
    if ((!outcome || !outcome->ok()) && llm) outcome = extract_facets(n, level, llm->provider(), &cache, eo);
    if (outcome && outcome->ok()) found[i] = outcome->facets();
  });

  std::map<std::string, const FacetSet*> facets;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (found[i])
      facets[ids[i]] = &*found[i];
    else
      missing.push_back(ids[i]);
  }
  if (!missing.empty()) {
    err << fmt::format("missing facets for {} narrative(s): {}\n", missing.size(), text::join(missing, ", "));
    if (!o.skip_missing) return kExitMissingFacets;
  }

  std::vector<PairKey> scorable;
  for (const auto& k : keys)
    if (facets.count(k.first) && facets.count(k.second)) scorable.push_back(k);

  auto stack = make_scoring_stack(o, rec);
  const Providers providers = stack.providers();

  std::unique_ptr<std::ofstream> file;
  fs::path tmp;
  if (!o.out.empty()) {
    if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
    tmp = o.out + ".tmp";
    file = std::make_unique<std::ofstream>(tmp, std::ios::binary | std::ios::trunc);
    if (!*file) throw ConfigError(fmt::format("cannot write {}", o.out));
  }
  std::ostream& sink = file ? static_cast<std::ostream&>(*file) : out;

  for (std::size_t start = 0; start < scorable.size(); start += kBlockSize) {
    const std::size_t end = std::min(scorable.size(), start + kBlockSize);
    std::vector<FacetScores> block(end - start);
    parallel_for(block.size(), o.workers, [&](std::size_t i) {
      const auto& k = scorable[start + i];
      block[i] = score_pair(*facets.at(k.first), *facets.at(k.second), o.match, providers);
    });
    for (std::size_t i = 0; i < block.size(); ++i)
      for (const auto& cfg : configs)
        sink << to_json(make_report(scorable[start + i], level, block[i], cfg)).dump() << '\n';
  }
  if (file) {
    file->close();
    fs::rename(tmp, o.out);
    rec.outputs.push_back(o.out);
  }
  return kExitOk;
}

int cmd_baselines(const Options& o, RunRecord& rec, std::ostream& out) {
  const Corpus corpus = require_corpus(o, rec);
  const PairSample sample = select_pairs(o, corpus, rec);
  const auto keys = sorted_pairs(sample);
  auto stack = make_scoring_stack(o, rec);

  std::ostringstream body;
  for (std::size_t start = 0; start < keys.size(); start += kBlockSize) {
    const std::size_t end = std::min(keys.size(), start + kBlockSize);
    std::vector<BaselineScores> block(end - start);
    parallel_for(block.size(), o.workers, [&](std::size_t i) {
      const auto& k = keys[start + i];
      block[i] = compute_baselines(corpus.at(k.first).payload(), corpus.at(k.second).payload(), *stack.embedder);
    });
    for (std::size_t i = 0; i < block.size(); ++i)
      for (BaselineMetric m : kAllBaselines) body << to_json(keys[start + i], m, block[i][m]).dump() << '\n';
  }
  if (o.out.empty()) {
    out << body.str();
  } else {
    write_atomically(o.out, body.str());
    rec.outputs.push_back(o.out);
  }
  return kExitOk;
}

std::string fmt_tau(const std::optional<double>& t) { return t ? fmt::format("{:.4f}", *t) : "undefined"; }

int cmd_metaeval(const Options& o, RunRecord& rec, std::ostream& out) {
  if (o.scores_file.empty()) throw ConfigError("metaeval needs --scores <reports.jsonl>");
  const Corpus corpus = require_corpus(o, rec);
  note_input(rec, o.scores_file);
  const TauVariant variant = tau_variant(o);

  std::map<PairKey, PairFacetScores> by_pair;
  std::optional<PromptLevel> level;
  {
    std::istringstream in(read_file(o.scores_file));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::is_blank(line)) continue;
      SimilarityReport r;
      try {
        r = report_from_json(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(o.scores_file, lineno, e.what());
      }
      if (level && *level != r.level) throw ConfigError("score file mixes prompt levels");
      level = r.level;
      by_pair.try_emplace(r.pair, PairFacetScores{r.pair, r.scores.values});
    }
  }
  if (by_pair.empty()) throw LabelMismatch("score file holds no reports");

  std::vector<PairFacetScores> pairs;
  std::vector<PairKey> keys;
  for (auto& [k, v] : by_pair) {
    pairs.push_back(v);
    keys.push_back(k);
  }
  const PairSample labels = label_pairs(corpus, keys);

  const auto facet_taus = facet_correlations(pairs, labels, variant);

  WeightVector weights;
  std::string weights_source;
  if (!o.weights_file.empty()) {
    weights = load_weights(o.weights_file, rec);
    weights_source = o.weights_file;
  } else {
    try {
      weights = weights_from_correlations(facet_taus);
      weights_source = "facet correlations";
    } catch (const ConfigError&) {
      spdlog::warn("no facet correlates positively; FaNS weights fall back to the reference averages");
      weights = default_weights();
      weights_source = "reference";
    }
  }
  const auto star_cfg = AggregationConfig::alpha_split(o.alpha.value_or(kDefaultAlpha));
  const auto dagger_cfg = AggregationConfig::weighted(weights);

  std::vector<MetaEvalResult> rows;
  if (!o.baselines_file.empty()) {
    note_input(rec, o.baselines_file);
    std::map<std::string, std::vector<ScoredPair>> per_metric;
    std::istringstream in(read_file(o.baselines_file));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::is_blank(line)) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        PairKey k{j.at("pair").at(0).get<std::string>(), j.at("pair").at(1).get<std::string>()};
        if (!by_pair.count(k)) continue;
        per_metric[j.at("metric").get<std::string>()].push_back({k, j.at("f1").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(o.baselines_file, lineno, e.what());
      }
    }
    for (BaselineMetric m : kAllBaselines) {
      const std::string name(to_string(m));
      if (auto it = per_metric.find(name); it != per_metric.end())
        rows.push_back(evaluate_metric(name, it->second, labels, *level, variant));
    }
  }
  auto fans_row = [&](const std::string& name, const AggregationConfig& cfg) {
    std::vector<ScoredPair> sp;
    for (const auto& p : pairs) sp.push_back({p.pair, aggregate(p.values, cfg)});
    rows.push_back(evaluate_metric(name, sp, labels, *level, variant));
  };
  fans_row("FaNS*", star_cfg);
  fans_row("FaNS\xe2\x80\xa0", dagger_cfg);

  const auto grid = default_alpha_grid();
  const auto sweep = alpha_sweep(pairs, labels, grid, variant, o.workers);

  const std::string lvl(to_string(*level));
  std::ostringstream table;
  table << fmt::format("facet\t{}\n", lvl);
  for (Facet f : kAllFacets) table << fmt::format("{}\t{}\n", facet_label(f), fmt_tau(facet_taus[index_of(f)]));
  table << '\n' << fmt::format("metric\t{}\n", lvl);
  for (const auto& r : rows) table << fmt::format("{}\t{:.4f}\n", r.metric_name, r.tau);
  table << '\n' << "alpha\ttau\n";
  for (const auto& p : sweep) table << fmt::format("{:.1f}\t{:.4f}\n", p.alpha, p.tau);
  out << table.str();

  if (!o.out.empty()) {
    std::ostringstream csv;
    csv << "section,name,level,tau,n_pairs\n";
    for (Facet f : kAllFacets) {
      const auto& t = facet_taus[index_of(f)];
      csv << fmt::format("facet,{},{},{},{}\n", facet_name(f), lvl, t ? fmt::format("{}", *t) : "", pairs.size());
    }
    for (const auto& r : rows) csv << fmt::format("metric,{},{},{},{}\n", r.metric_name, lvl, r.tau, r.n_pairs);
    for (const auto& p : sweep) csv << fmt::format("alpha,{},{},{},{}\n", p.alpha, lvl, p.tau, pairs.size());

    nlohmann::ordered_json j;
    j["level"] = lvl;
    j["tau_variant"] = std::string(to_string(variant));
    j["n_pairs"] = pairs.size();
    nlohmann::ordered_json ft;
    for (Facet f : kAllFacets) {
      const auto& t = facet_taus[index_of(f)];
      ft[std::string(facet_name(f))] = t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
    }
    j["facets"] = std::move(ft);
    auto metrics = nlohmann::ordered_json::array();
    for (const auto& r : rows) metrics.push_back({{"metric", r.metric_name}, {"tau", r.tau}, {"n_pairs", r.n_pairs}});
    j["metrics"] = std::move(metrics);
    j["fans_star"] = to_json(star_cfg);
    j["fans_dagger"] = to_json(dagger_cfg);
    j["fans_dagger"]["source"] = weights_source;
    auto sw = nlohmann::ordered_json::array();
    for (const auto& p : sweep) sw.push_back({{"alpha", p.alpha}, {"tau", p.tau}});
    j["alpha_sweep"] = std::move(sw);

    write_atomically(o.out, csv.str());
    write_atomically(o.out + ".json", j.dump(2) + "\n");
    rec.outputs.push_back(o.out);
    rec.outputs.push_back(o.out + ".json");
  }
  return kExitOk;
}

nlohmann::ordered_json config_snapshot(const Options& o) {
  nlohmann::ordered_json c;
  c["corpus"] = o.corpus;
  c["cache"] = o.cache;
  c["level"] = o.levels;
  c["alpha"] = o.alpha ? nlohmann::ordered_json(*o.alpha) : nlohmann::ordered_json(nullptr);
  c["weights"] = o.weights_file;
  c["offline"] = o.offline;
  c["seed"] = o.seed;
  c["cap"] = o.cap;
  c["pairs"] = o.pairs_file;
  c["date_order"] = o.date_order;
  c["model"] = o.model;
  c["llm_fixtures"] = o.llm_fixtures;
  c["prompt_dir"] = o.prompt_dir;
  c["refusal_patterns"] = o.refusal_patterns;
  c["concept_fixtures"] = o.concept_fixtures;
  c["gazetteer"] = o.gazetteer;
  c["embed_dim"] = o.embed_dim;
  c["workers"] = o.workers;
  c["tau_variant"] = o.tau_variant;
  c["fuzzy_threshold"] = o.match.fuzzy_threshold;
  c["embed_threshold"] = o.match.embed_threshold;
  c["who_embed_threshold"] = o.match.who_embed_threshold;
  c["concept_k"] = o.match.concept_k;
  c["concept_min_overlap"] = o.match.concept_min_overlap;
  return c;
}

void write_manifest(const Options& o, const RunRecord& rec, int exit_code) {
  std::string path = o.manifest;
  if (path.empty() && !o.out.empty()) path = o.out + ".manifest.json";
  if (path.empty()) return;
  nlohmann::ordered_json m;
  m["command"] = o.command;
  m["args"] = o.raw_args;
  m["config"] = config_snapshot(o);
  m["inputs"] = rec.inputs;
  m["outputs"] = rec.outputs;
  m["exit_code"] = exit_code;
  m["started_at"] = rec.started_at;
  m["finished_at"] = utc_now();
  write_atomically(path, m.dump(2) + "\n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.raw_args = args;
  CLI::App app{"Facet-based narrative similarity", "fans"};
  app.set_config("--config", "", "TOML config file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--corpus", o.corpus, "Corpus JSONL");
  app.add_option("--cache", o.cache, "Transcript cache directory")->capture_default_str();
  app.add_option("--level", o.levels, "Prompt level(s) 1, 2 or 3")->delimiter(',')->capture_default_str();
  app.add_option("--alpha", o.alpha, "Entity weight for the alpha-split scheme")->check(CLI::Range(0.0, 1.0));
  app.add_option("--weights", o.weights_file, "Weights JSON ({\"weights\"} or {\"taus\"}) or 'reference'");
  app.add_flag("--offline", o.offline, "Never contact remote services");
  app.add_option("--seed", o.seed, "Pair sampling seed")->capture_default_str();
  app.add_option("--cap", o.cap, "Pairs per label when sampling")->capture_default_str();
  app.add_option("--pairs", o.pairs_file, "Explicit pair list (JSON arrays or two ids per line)");
  app.add_option("--date-order", o.date_order, "Numeric date order")->check(CLI::IsMember({"mdy", "dmy"}))->capture_default_str();
  app.add_option("--scores", o.scores_file, "Score reports JSONL (metaeval)");
  app.add_option("--baselines", o.baselines_file, "Baseline JSONL (metaeval)");
  app.add_option("--out", o.out, "Output file (directory for 'prompts')");
  app.add_option("--manifest", o.manifest, "Run manifest path (default <out>.manifest.json)");
  app.add_option("--llm-fixtures", o.llm_fixtures, "Directory of <prompt-hash>.txt transcripts");
  app.add_option("--model", o.model, "Extractor model id")->capture_default_str();
  app.add_option("--prompt-dir", o.prompt_dir, "Directory overriding the prompt templates");
  app.add_option("--refusal-patterns", o.refusal_patterns, "Refusal pattern file");
  app.add_option("--concept-fixtures", o.concept_fixtures, "Concept table JSON used instead of ConceptNet");
  app.add_option("--gazetteer", o.gazetteer, "Gazetteer TSV for the offline NER");
  app.add_option("--embed-dim", o.embed_dim, "Stub embedding dimension")->capture_default_str();
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--refresh-refusals", o.refresh_refusals, "Re-query cached refusals");
  app.add_flag("--skip-missing", o.skip_missing, "Score what is available when facets are missing");
  app.add_flag("--extract-missing", o.extract_missing, "Extract facets that are not cached");
  app.add_option("--tau-variant", o.tau_variant, "Kendall tau variant")->check(CLI::IsMember({"a", "b"}))->capture_default_str();
  app.add_option("--fuzzy-threshold", o.match.fuzzy_threshold)->capture_default_str();
  app.add_option("--embed-threshold", o.match.embed_threshold)->capture_default_str();
  app.add_option("--who-embed-threshold", o.match.who_embed_threshold)->capture_default_str();
  app.add_option("--concept-k", o.match.concept_k)->capture_default_str();
  app.add_option("--concept-min-overlap", o.match.concept_min_overlap)->capture_default_str();
  app.add_flag("-v,--verbose", o.verbose);

  app.add_subcommand("extract", "Extract 5W1H facets and report success statistics");
  app.add_subcommand("score", "Score narrative pairs and stream JSONL reports");
  app.add_subcommand("metaeval", "Correlate scores with ground-truth labels");
  app.add_subcommand("baselines", "Compute ROUGE and BERTScore-style baselines");
  app.add_subcommand("prompts", "Print rendered prompt hashes for fixture authoring");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  o.command = app.get_subcommands().front()->get_name();
  spdlog::set_level(o.verbose ? spdlog::level::info : spdlog::level::warn);

  RunRecord rec;
  rec.started_at = utc_now();
  int code = kExitFailure;
  try {
    o.match.date_order = o.date_order == "dmy" ? DateOrder::dmy : DateOrder::mdy;
    o.match.validate();
    if (o.command == "extract")
      code = cmd_extract(o, rec, out, err);
    else if (o.command == "score")
      code = cmd_score(o, rec, out, err);
    else if (o.command == "metaeval")
      code = cmd_metaeval(o, rec, out);
    else if (o.command == "baselines")
      code = cmd_baselines(o, rec, out);
    else
      code = cmd_prompts(o, rec, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const UndefinedCorrelation& e) {
    err << "undefined correlation: " << e.what() << '\n';
    code = kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitFailure;
  }
  try {
    write_manifest(o, rec, code);
  } catch (const std::exception& e) {
    err << "could not write manifest: " << e.what() << '\n';
  }
  return code;
}

}  // namespace fans::cli
