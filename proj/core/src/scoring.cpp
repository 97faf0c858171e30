#include "fans/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fans/errors.hpp"

namespace fans {

double FacetScores::entity_mean() const noexcept {
  return (values[0] + values[1] + values[2]) / 3.0;
}

double FacetScores::descriptive_mean() const noexcept {
  return (values[3] + values[4] + values[5]) / 3.0;
}

std::string_view to_string(AggregationScheme s) noexcept {
  return s == AggregationScheme::alpha_split ? "alpha_split" : "weighted";
}

WeightVector default_weights() {
  double total = 0.0;
  for (double t : kReferenceFacetTaus) total += t;
  WeightVector w;
  for (std::size_t i = 0; i < kFacetCount; ++i) w.values[i] = kReferenceFacetTaus[i] / total;
  return w;
}

AggregationConfig AggregationConfig::alpha_split(double alpha) {
  AggregationConfig cfg;
  cfg.scheme = AggregationScheme::alpha_split;
  cfg.alpha = alpha;
  cfg.validate();
  return cfg;
}

AggregationConfig AggregationConfig::weighted(const WeightVector& weights) {
  AggregationConfig cfg;
  cfg.scheme = AggregationScheme::weighted;
  cfg.weights = weights;
  cfg.validate();
  return cfg;
}

void AggregationConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0)
    throw ConfigError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
  weights.validate();
}

double aggregate(const std::array<double, kFacetCount>& s, const AggregationConfig& cfg) {
  double out;
  if (cfg.scheme == AggregationScheme::alpha_split) {
    const double entity = (s[0] + s[1] + s[2]) / 3.0;
    const double descriptive = (s[3] + s[4] + s[5]) / 3.0;
    out = cfg.alpha * entity + (1.0 - cfg.alpha) * descriptive;
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < kFacetCount; ++i) {
      num += cfg.weights.values[i] * s[i];
      den += cfg.weights.values[i];
    }
    out = num / den;
  }
  return std::clamp(out, 0.0, 1.0);
}

double aggregate(const FacetScores& scores, const AggregationConfig& cfg) { return aggregate(scores.values, cfg); }

FacetScores score_pair(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, const Providers& providers) {
  if (fa.level != fb.level)
    spdlog::warn("scoring facets from different prompt levels ({} vs {}) for {} / {}", to_string(fa.level),
                 to_string(fb.level), fa.source_narrative, fb.source_narrative);
  FacetScores out;
  for (Facet f : kAllFacets) {
    MatchResult r;
    try {
      switch (f) {
        case Facet::who: r = score_who(fa, fb, cfg, providers.embedder); break;
        case Facet::when: r = score_when(fa, fb, cfg.date_order); break;
        case Facet::where: r = score_where(fa, fb, cfg, providers.embedder, providers.ner, providers.concepts); break;
        default: r = sem_f1(fa.text(f), fb.text(f), providers.embedder); break;
      }
    } catch (const ProviderError& e) {
      throw ProviderError(fmt::format("{}: {}", facet_name(f), e.what()));
    } catch (const TransportError& e) {
      throw ProviderError(fmt::format("{}: {}", facet_name(f), e.what()));
    }
    out.values[index_of(f)] = r.f1;
    out.evidence[index_of(f)] = std::move(r);
  }
  return out;
}

SimilarityReport make_report(PairKey pair, PromptLevel level, FacetScores scores, const AggregationConfig& cfg) {
  SimilarityReport r;
  r.pair = std::move(pair);
  r.level = level;
  r.scores = std::move(scores);
  r.config = cfg;
  r.final_score = aggregate(r.scores, cfg);
  return r;
}

nlohmann::ordered_json weights_to_json(const WeightVector& w) {
  nlohmann::ordered_json j;
  for (Facet f : kAllFacets) j[std::string(facet_name(f))] = w[f];
  return j;
}

WeightVector weights_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("weights must be a JSON object keyed by facet");
  WeightVector w;
  for (Facet f : kAllFacets) {
    const auto it = j.find(std::string(facet_name(f)));
    if (it == j.end() || !it->is_number()) throw ConfigError(fmt::format("weights: missing number for '{}'", facet_name(f)));
    w[f] = it->get<double>();
  }
  for (const auto& [k, v] : j.items())
    if (!parse_facet(k)) throw ConfigError(fmt::format("weights: unknown facet '{}'", k));
  w.validate();
  return w;
}

nlohmann::ordered_json to_json(const AggregationConfig& cfg) {
  nlohmann::ordered_json j;
  j["scheme"] = std::string(to_string(cfg.scheme));
  if (cfg.scheme == AggregationScheme::alpha_split)
    j["alpha"] = cfg.alpha;
  else
    j["weights"] = weights_to_json(cfg.weights);
  return j;
}

AggregationConfig aggregation_from_json(const nlohmann::json& j) {
  const auto scheme = j.at("scheme").get<std::string>();
  if (scheme == "alpha_split") return AggregationConfig::alpha_split(j.at("alpha").get<double>());
  if (scheme == "weighted") return AggregationConfig::weighted(weights_from_json(j.at("weights")));
  throw ConfigError(fmt::format("unknown aggregation scheme '{}'", scheme));
}

nlohmann::ordered_json to_json(const SimilarityReport& report) {
  nlohmann::ordered_json j;
  j["pair"] = {report.pair.first, report.pair.second};
  j["level"] = std::string(to_string(report.level));
  nlohmann::ordered_json scores, evidence;
  for (Facet f : kAllFacets) {
    scores[std::string(facet_name(f))] = report.scores[f];
    evidence[std::string(facet_name(f))] = to_json(report.scores.evidence[index_of(f)]);
  }
  j["scores"] = std::move(scores);
  j["evidence"] = std::move(evidence);
  j["aggregate"] = to_json(report.config);
  j["final"] = report.final_score;
  return j;
}

SimilarityReport report_from_json(const nlohmann::json& j) {
  SimilarityReport r;
  try {
    const auto& pair = j.at("pair");
    r.pair = PairKey{pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    const auto level = parse_level(j.at("level").get<std::string>());
    if (!level) throw ConfigError("report: bad level");
    r.level = *level;
    for (Facet f : kAllFacets) r.scores[f] = j.at("scores").at(std::string(facet_name(f))).get<double>();
    r.config = aggregation_from_json(j.at("aggregate"));
    r.final_score = j.at("final").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed report: {}", e.what()));
  }
  return r;
}

}  // namespace fans
