#include "fans/facets.hpp"

#include <cmath>
#include <string>

#include "fans/errors.hpp"
#include "fans/text.hpp"

namespace fans {

std::optional<Facet> parse_facet(std::string_view name) noexcept {
  const std::string lowered = text::to_lower(text::trim(name));
  for (Facet f : kAllFacets)
    if (facet_name(f) == lowered) return f;
  return std::nullopt;
}

WeightVector WeightVector::uniform() noexcept {
  WeightVector w;
  w.values.fill(1.0 / static_cast<double>(kFacetCount));
  return w;
}

void WeightVector::validate() const {
  double sum = 0.0;
  for (Facet f : kAllFacets) {
    const double v = (*this)[f];
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("weight for '" + std::string(facet_name(f)) + "' must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("facet weights must sum to 1 (got " + std::to_string(sum) + ")");
}

}  // namespace fans
