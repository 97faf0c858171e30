#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fans/extraction.hpp"
#include "fans/providers.hpp"

namespace fans {

enum class DateOrder { mdy, dmy };

struct MatchConfig {
  double fuzzy_threshold = 0.80;
  double embed_threshold = 0.75;      // Where
  double who_embed_threshold = 0.75;  // Who
  std::size_t concept_k = kDefaultConceptK;
  std::size_t concept_min_overlap = 1;
  DateOrder date_order = DateOrder::mdy;

  /// Throws ConfigError unless thresholds lie in (0, 1] and k, min overlap >= 1.
  void validate() const;
};

enum class MatchMethod { exact, fuzzy, embedding, concept_net, sentence };

std::string_view to_string(MatchMethod m) noexcept;

struct MatchedItem {
  std::string a;
  std::string b;
  MatchMethod method = MatchMethod::exact;
  double score = 0.0;

  bool operator==(const MatchedItem&) const = default;
};

/// Evidence and scores for one facet. precision = |matched| / |A| and
/// recall = |matched| / |B| (A is the first argument); f1 is symmetric.
struct MatchResult {
  std::vector<MatchedItem> matched;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::string> unmatched_a;
  std::vector<std::string> unmatched_b;
};

nlohmann::ordered_json to_json(const MatchResult& r);

/// Harmonic mean with f1 = 0 when p + r = 0; exactly symmetric in (p, r).
double harmonic_f1(double precision, double recall) noexcept;

/// Set-overlap F1 = 2m / (na + nb): 1 when both sets are empty, 0 when exactly one is.
double overlap_f1(std::size_t matched, std::size_t na, std::size_t nb) noexcept;

// ---------------------------------------------------------------------------
// Entity matching (Who, Where)
// ---------------------------------------------------------------------------

/// Indel-normalised similarity of two strings: 1 - indel / (|a| + |b|).
double normalized_similarity(std::string_view a, std::string_view b);

/// Max of plain and token-set similarity on lowercased inputs. Symmetric, in [0, 1].
double fuzzy_ratio(std::string_view a, std::string_view b);

struct EntityMatchOptions {
  double fuzzy_threshold = 0.80;
  double embed_threshold = 0.75;
  std::size_t concept_k = kDefaultConceptK;
  std::size_t concept_min_overlap = 1;
};

/// One candidate edge between items of A and B.
struct PairDecision {
  bool matched = false;
  MatchMethod method = MatchMethod::fuzzy;
  double score = 0.0;
};

/// The per-pair predicate: fuzzy >= threshold, else cosine >= threshold,
/// else (with concept sets) an overlap of at least `min_overlap` between
/// concepts-plus-term of each side.
PairDecision decide_pair(std::string_view a, std::string_view b, const EmbeddingVector& ea,
                         const EmbeddingVector& eb, const ConceptSet* ca, const ConceptSet* cb,
                         const EntityMatchOptions& opts);

/// Deduplicates both lists, evaluates every pair with decide_pair, and builds a
/// maximum-cardinality one-to-one matching: greedy by descending score (ties by
/// index) followed by augmenting paths.
MatchResult match_entity_sets(std::span<const std::string> a, std::span<const std::string> b,
                              const EntityMatchOptions& opts, Embedder& embedder,
                              ConceptProvider* concepts = nullptr);

MatchResult score_who(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, Embedder& embedder);

/// Where set = parsed items plus geopolitical/location/facility/organisation
/// mentions found by `ner` in the Where text, deduplicated; concept fallback on.
std::vector<std::string> location_set(const FacetSet& fs, NerProvider& ner);

MatchResult score_where(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, Embedder& embedder,
                        NerProvider& ner, ConceptProvider* concepts);

// ---------------------------------------------------------------------------
// Time mentions (When)
// ---------------------------------------------------------------------------

enum class TimeKind { date, day, month, clock, daypart, year, month_day };

std::string_view to_string(TimeKind k) noexcept;

struct TimeToken {
  TimeKind kind = TimeKind::date;
  std::string surface;  // canonical: lowercase, dates as YYYY-MM-DD, clocks as h:mm am/pm

  auto operator<=>(const TimeToken&) const = default;
  bool operator==(const TimeToken&) const = default;
};

/// Scans each item for numeric dates, weekday names, month names, "Month DD"
/// forms, AM/PM clock times, dayparts and standalone years 1000-2999.
std::set<TimeToken> extract_time_mentions(std::span<const std::string> items, DateOrder order = DateOrder::mdy);

MatchResult score_when(const FacetSet& fa, const FacetSet& fb, DateOrder order = DateOrder::mdy);

// ---------------------------------------------------------------------------
// Descriptive facets (What, Why, How)
// ---------------------------------------------------------------------------

/// Splits on . ! ? followed by whitespace or end, except after known
/// abbreviations and single-letter initials.
std::vector<std::string> split_sentences(std::string_view text);

/// Sentence-level semantic F1: precision is the mean over A's sentences of the
/// best (clamped) cosine against B's sentences, recall the converse.
MatchResult sem_f1(std::string_view text_a, std::string_view text_b, Embedder& embedder);

}  // namespace fans
