#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fans/corpus.hpp"
#include "fans/providers.hpp"

namespace fans {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PRF&) const = default;
};

/// Lowercases, drops apostrophes, turns other ASCII punctuation into spaces and
/// splits on whitespace. Shared by every baseline.
std::vector<std::string> baseline_tokens(std::string_view text);

/// Clipped n-gram overlap. Throws std::invalid_argument for n == 0.
PRF rouge_n(std::string_view candidate, std::string_view reference, std::size_t n);
PRF rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, std::size_t n);

/// Longest common subsequence over tokens.
PRF rouge_l(std::string_view candidate, std::string_view reference);
PRF rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

/// Greedy max-cosine token matching with independently embedded tokens; no idf.
PRF bertscore_like(std::string_view candidate, std::string_view reference, Embedder& embedder);

enum class BaselineMetric { rouge1, rouge2, rougeL, bertscore };

inline constexpr std::array<BaselineMetric, 4> kAllBaselines = {BaselineMetric::rouge1, BaselineMetric::rouge2,
                                                                BaselineMetric::rougeL, BaselineMetric::bertscore};

std::string_view to_string(BaselineMetric m) noexcept;  // "ROUGE-1", ..., "BERTScore"

struct BaselineScores {
  std::array<PRF, 4> values{};

  const PRF& operator[](BaselineMetric m) const noexcept { return values[static_cast<std::size_t>(m)]; }
  PRF& operator[](BaselineMetric m) noexcept { return values[static_cast<std::size_t>(m)]; }
};

BaselineScores compute_baselines(std::string_view candidate, std::string_view reference, Embedder& embedder);

/// One JSON line per metric: {pair, metric, precision, recall, f1}.
nlohmann::ordered_json to_json(const PairKey& pair, BaselineMetric metric, const PRF& prf);

}  // namespace fans
