#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fans/corpus.hpp"
#include "fans/facets.hpp"
#include "fans/prompts.hpp"
#include "fans/scoring.hpp"

namespace fans {

enum class TauVariant { a, b };

std::string_view to_string(TauVariant v) noexcept;

/// Kendall rank correlation in O(n log n). Variant b applies the tie
/// correction. Throws std::invalid_argument on length mismatch or NaN, and
/// UndefinedCorrelation when n < 2 or either side is constant.
double kendall_tau(std::span<const double> xs, std::span<const double> ys, TauVariant variant = TauVariant::b);

inline double kendall_tau_b(std::span<const double> xs, std::span<const double> ys) {
  return kendall_tau(xs, ys, TauVariant::b);
}

struct ScoredPair {
  PairKey pair;
  double score = 0.0;
};

struct MetaEvalResult {
  std::string metric_name;
  double tau = 0.0;
  std::size_t n_pairs = 0;
  PromptLevel level = PromptLevel::L3;
};

/// Correlates scores with labels in score order. Throws LabelMismatch when a
/// scored pair has no label or nothing is scored.
MetaEvalResult evaluate_metric(std::string metric_name, std::span<const ScoredPair> scores, const PairSample& labels,
                               PromptLevel level = PromptLevel::L3, TauVariant variant = TauVariant::b);

/// Facet scores of one pair with the evidence dropped.
struct PairFacetScores {
  PairKey pair;
  std::array<double, kFacetCount> values{};
};

struct AlphaPoint {
  double alpha = 0.0;
  double tau = 0.0;
};

/// 0.0, 0.1, ..., 1.0.
std::vector<double> default_alpha_grid();

std::vector<AlphaPoint> alpha_sweep(std::span<const PairFacetScores> pairs, const PairSample& labels,
                                    std::span<const double> grid, TauVariant variant = TauVariant::b,
                                    std::size_t workers = 1);

/// Tau of each facet alone; nullopt where the correlation is undefined.
std::array<std::optional<double>, kFacetCount> facet_correlations(std::span<const PairFacetScores> pairs,
                                                                  const PairSample& labels,
                                                                  TauVariant variant = TauVariant::b);

/// Floors negative taus at zero and normalises. Throws ConfigError when no tau is positive.
WeightVector weights_from_correlations(const std::array<double, kFacetCount>& taus);
WeightVector weights_from_correlations(const std::array<std::optional<double>, kFacetCount>& taus);

}  // namespace fans
