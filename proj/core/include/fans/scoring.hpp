#pragma once

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fans/corpus.hpp"
#include "fans/extraction.hpp"
#include "fans/facets.hpp"
#include "fans/matchers.hpp"
#include "fans/prompts.hpp"
#include "fans/providers.hpp"

namespace fans {

struct FacetScores {
  std::array<double, kFacetCount> values{};
  std::array<MatchResult, kFacetCount> evidence{};

  double operator[](Facet f) const noexcept { return values[index_of(f)]; }
  double& operator[](Facet f) noexcept { return values[index_of(f)]; }

  double entity_mean() const noexcept;
  double descriptive_mean() const noexcept;
};

enum class AggregationScheme { alpha_split, weighted };

std::string_view to_string(AggregationScheme s) noexcept;

inline constexpr double kDefaultAlpha = 0.2;

/// Average per-facet taus of the ChatGPT extractor (who, when, where, what, why, how).
inline constexpr std::array<double, kFacetCount> kReferenceFacetTaus = {0.273, 0.158, 0.145, 0.414, 0.271, 0.248};

/// kReferenceFacetTaus normalised to sum to one.
WeightVector default_weights();

struct AggregationConfig {
  AggregationScheme scheme = AggregationScheme::alpha_split;
  double alpha = kDefaultAlpha;
  WeightVector weights = WeightVector::uniform();

  /// Throw ConfigError on alpha outside [0, 1] or invalid weights.
  static AggregationConfig alpha_split(double alpha = kDefaultAlpha);
  static AggregationConfig weighted(const WeightVector& weights);

  void validate() const;
  bool operator==(const AggregationConfig&) const = default;
};

/// alpha_split: alpha * mean(who, when, where) + (1 - alpha) * mean(what, why, how).
/// weighted: sum of w_f * s_f over the weight total.
double aggregate(const std::array<double, kFacetCount>& scores, const AggregationConfig& cfg);
double aggregate(const FacetScores& scores, const AggregationConfig& cfg);

struct Providers {
  Embedder& embedder;
  NerProvider& ner;
  ConceptProvider* concepts = nullptr;
};

/// Scores all six facets. ProviderError is rethrown with the facet name prefixed.
FacetScores score_pair(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, const Providers& providers);

struct SimilarityReport {
  PairKey pair;
  PromptLevel level = PromptLevel::L3;
  FacetScores scores;
  AggregationConfig config;
  double final_score = 0.0;
};

SimilarityReport make_report(PairKey pair, PromptLevel level, FacetScores scores, const AggregationConfig& cfg);

/// {pair, level, scores, evidence, aggregate, final} in that key order.
nlohmann::ordered_json to_json(const SimilarityReport& report);

/// Inverse of to_json for everything but evidence.
SimilarityReport report_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const AggregationConfig& cfg);
AggregationConfig aggregation_from_json(const nlohmann::json& j);

nlohmann::ordered_json weights_to_json(const WeightVector& w);
WeightVector weights_from_json(const nlohmann::json& j);

}  // namespace fans
