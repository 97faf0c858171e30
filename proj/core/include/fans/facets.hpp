#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace fans {

enum class Facet : std::size_t { who = 0, when, where, what, why, how };

inline constexpr std::size_t kFacetCount = 6;

inline constexpr std::array<Facet, kFacetCount> kAllFacets = {
    Facet::who, Facet::when, Facet::where, Facet::what, Facet::why, Facet::how};

/// Who/When/Where are list-valued, What/Why/How are free text.
constexpr bool is_entity_facet(Facet f) noexcept {
  return f == Facet::who || f == Facet::when || f == Facet::where;
}

constexpr std::size_t index_of(Facet f) noexcept { return static_cast<std::size_t>(f); }

constexpr std::string_view facet_name(Facet f) noexcept {
  switch (f) {
    case Facet::who: return "who";
    case Facet::when: return "when";
    case Facet::where: return "where";
    case Facet::what: return "what";
    case Facet::why: return "why";
    case Facet::how: return "how";
  }
  return "?";
}

/// Output label used in prompts and responses ("Who", "When", ...).
constexpr std::string_view facet_label(Facet f) noexcept {
  switch (f) {
    case Facet::who: return "Who";
    case Facet::when: return "When";
    case Facet::where: return "Where";
    case Facet::what: return "What";
    case Facet::why: return "Why";
    case Facet::how: return "How";
  }
  return "?";
}

std::optional<Facet> parse_facet(std::string_view name) noexcept;

/// Per-facet nonnegative weights summing to one.
struct WeightVector {
  std::array<double, kFacetCount> values{};

  double operator[](Facet f) const noexcept { return values[index_of(f)]; }
  double& operator[](Facet f) noexcept { return values[index_of(f)]; }

  static WeightVector uniform() noexcept;
  /// Throws ConfigError unless every weight is finite, >= 0, and the sum is 1 within 1e-9.
  void validate() const;

  bool operator==(const WeightVector&) const = default;
};

}  // namespace fans
