#include "fans/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "fans/concurrency.hpp"
#include "fans/errors.hpp"

namespace fans {

std::string_view to_string(TauVariant v) noexcept { return v == TauVariant::a ? "tau-a" : "tau-b"; }

namespace {

// Counts pairs (i, j), i < j, tied in v over a run-sorted sequence.
std::int64_t tied_pairs(const std::vector<double>& sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto run = static_cast<std::int64_t>(j - i);
    total += run * (run - 1) / 2;
    i = j;
  }
  return total;
}

// Bottom-up merge sort that counts strict inversions.
std::int64_t count_swaps(std::vector<double>& v) {
  std::int64_t swaps = 0;
  std::vector<double> buf(v.size());
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> xs, std::span<const double> ys, TauVariant variant) {
  if (xs.size() != ys.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i)
    if (std::isnan(xs[i]) || std::isnan(ys[i])) throw std::invalid_argument("kendall_tau: NaN input");
  if (n < 2) throw UndefinedCorrelation(fmt::format("kendall_tau needs at least two pairs, got {}", n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return ys[a] < ys[b];
  });

  std::vector<double> x_sorted(n), y_by_x(n);
  for (std::size_t k = 0; k < n; ++k) {
    x_sorted[k] = xs[order[k]];
    y_by_x[k] = ys[order[k]];
  }
  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = tied_pairs(x_sorted);

  std::int64_t n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && x_sorted[j] == x_sorted[i] && y_by_x[j] == y_by_x[i]) ++j;
      const auto run = static_cast<std::int64_t>(j - i);
      n3 += run * (run - 1) / 2;
      i = j;
    }
  }

  std::vector<double> y_work = y_by_x;
  const std::int64_t swaps = count_swaps(y_work);
  const std::int64_t n2 = tied_pairs(y_work);

  if (n1 == n0 || n2 == n0) throw UndefinedCorrelation("kendall_tau: constant input");

  const std::int64_t s = n0 - n1 - n2 + n3 - 2 * swaps;
  double tau;
  if (variant == TauVariant::a) {
    tau = static_cast<double>(s) / static_cast<double>(n0);
  } else {
    tau = static_cast<double>(s) / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  }
  return std::clamp(tau, -1.0, 1.0);
}

namespace {

std::map<PairKey, int> label_index(const PairSample& labels) {
  std::map<PairKey, int> out;
  for (const auto& lp : labels.labeled_pairs) out.emplace(lp.pair, lp.label);
  return out;
}

std::vector<double> aligned_labels(const std::map<PairKey, int>& index, std::span<const PairKey> pairs) {
  if (pairs.empty()) throw LabelMismatch("no scored pairs to evaluate");
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto it = index.find(p);
    if (it == index.end()) throw LabelMismatch(fmt::format("pair ({}, {}) has no label", p.first, p.second));
    out.push_back(static_cast<double>(it->second));
  }
  return out;
}

}  // namespace

MetaEvalResult evaluate_metric(std::string metric_name, std::span<const ScoredPair> scores, const PairSample& labels,
                               PromptLevel level, TauVariant variant) {
  std::vector<PairKey> keys;
  std::vector<double> xs;
  for (const auto& s : scores) {
    keys.push_back(s.pair);
    xs.push_back(s.score);
  }
  const auto ys = aligned_labels(label_index(labels), keys);
  MetaEvalResult r;
  r.metric_name = std::move(metric_name);
  r.tau = kendall_tau(xs, ys, variant);
  r.n_pairs = xs.size();
  r.level = level;
  return r;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(static_cast<double>(i) / 10.0);
  return g;
}

std::vector<AlphaPoint> alpha_sweep(std::span<const PairFacetScores> pairs, const PairSample& labels,
                                    std::span<const double> grid, TauVariant variant, std::size_t workers) {
  for (double a : grid)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(fmt::format("alpha grid value {} outside [0, 1]", a));
  std::vector<PairKey> keys;
  for (const auto& p : pairs) keys.push_back(p.pair);
  const auto ys = aligned_labels(label_index(labels), keys);

  std::vector<AlphaPoint> out(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    const auto cfg = AggregationConfig::alpha_split(grid[g]);
    std::vector<double> xs;
    xs.reserve(pairs.size());
    for (const auto& p : pairs) xs.push_back(aggregate(p.values, cfg));
    out[g] = AlphaPoint{grid[g], kendall_tau(xs, ys, variant)};
  });
  return out;
}

std::array<std::optional<double>, kFacetCount> facet_correlations(std::span<const PairFacetScores> pairs,
                                                                  const PairSample& labels, TauVariant variant) {
  std::vector<PairKey> keys;
  for (const auto& p : pairs) keys.push_back(p.pair);
  const auto ys = aligned_labels(label_index(labels), keys);
  std::array<std::optional<double>, kFacetCount> out;
  for (std::size_t f = 0; f < kFacetCount; ++f) {
    std::vector<double> xs;
    xs.reserve(pairs.size());
    for (const auto& p : pairs) xs.push_back(p.values[f]);
    try {
      out[f] = kendall_tau(xs, ys, variant);
    } catch (const UndefinedCorrelation&) {
      out[f] = std::nullopt;
    }
  }
  return out;
}

WeightVector weights_from_correlations(const std::array<double, kFacetCount>& taus) {
  WeightVector w;
  double total = 0.0;
  for (std::size_t f = 0; f < kFacetCount; ++f) {
    if (!std::isfinite(taus[f])) throw ConfigError("weights_from_correlations: non-finite tau");
    w.values[f] = std::max(0.0, taus[f]);
    total += w.values[f];
  }
  if (total <= 0.0) throw ConfigError("weights_from_correlations: no facet has a positive correlation");
  for (auto& v : w.values) v /= total;
  return w;
}

WeightVector weights_from_correlations(const std::array<std::optional<double>, kFacetCount>& taus) {
  std::array<double, kFacetCount> plain{};
  for (std::size_t f = 0; f < kFacetCount; ++f) plain[f] = taus[f].value_or(0.0);
  return weights_from_correlations(plain);
}

}  // namespace fans
