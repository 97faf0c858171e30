#include "fans/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fans/errors.hpp"
#include "fans/matchers.hpp"

namespace fans {

namespace {

PRF from_counts(std::size_t overlap, std::size_t n_cand, std::size_t n_ref) {
  if (n_cand == 0 && n_ref == 0) return {1.0, 1.0, 1.0};
  PRF out;
  out.precision = n_cand == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(n_cand);
  out.recall = n_ref == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(n_ref);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

std::vector<std::string> baseline_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '\'') continue;
    if (std::ispunct(u))
      cleaned.push_back(' ');
    else
      cleaned.push_back(static_cast<char>(std::tolower(u)));
  }
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j > i) out.push_back(cleaned.substr(i, j - i));
    i = j;
  }
  return out;
}

PRF rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto c = ngram_counts(candidate, n);
  const auto r = ngram_counts(reference, n);
  std::size_t overlap = 0, nc = 0, nr = 0;
  for (const auto& [g, k] : c) {
    nc += k;
    if (auto it = r.find(g); it != r.end()) overlap += std::min(k, it->second);
  }
  for (const auto& [g, k] : r) nr += k;
  return from_counts(overlap, nc, nr);
}

PRF rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  return rouge_n(baseline_tokens(candidate), baseline_tokens(reference), n);
}

PRF rouge_l(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return from_counts(prev[b.size()], a.size(), b.size());
}

PRF rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l(baseline_tokens(candidate), baseline_tokens(reference));
}

PRF bertscore_like(std::string_view candidate, std::string_view reference, Embedder& embedder) {
  const auto ct = baseline_tokens(candidate);
  const auto rt = baseline_tokens(reference);
  if (ct.empty() || rt.empty()) return from_counts(0, ct.size(), rt.size());

  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto* toks : {&ct, &rt})
    for (const auto& t : *toks)
      if (slot.emplace(t, vocab.size()).second) vocab.push_back(t);
  const auto vecs = embedder.embed(vocab);
  if (vecs.size() != vocab.size()) throw ProviderError("embedder returned a short batch");

  std::vector<std::vector<double>> sim(ct.size(), std::vector<double>(rt.size()));
  for (std::size_t i = 0; i < ct.size(); ++i)
    for (std::size_t j = 0; j < rt.size(); ++j)
      sim[i][j] = std::max(0.0, cosine(vecs[slot.at(ct[i])], vecs[slot.at(rt[j])]));

  double p = 0.0;
  for (std::size_t i = 0; i < ct.size(); ++i) p += *std::max_element(sim[i].begin(), sim[i].end());
  double r = 0.0;
  for (std::size_t j = 0; j < rt.size(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < ct.size(); ++i) best = std::max(best, sim[i][j]);
    r += best;
  }
  PRF out;
  out.precision = p / static_cast<double>(ct.size());
  out.recall = r / static_cast<double>(rt.size());
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

std::string_view to_string(BaselineMetric m) noexcept {
  switch (m) {
    case BaselineMetric::rouge1: return "ROUGE-1";
    case BaselineMetric::rouge2: return "ROUGE-2";
    case BaselineMetric::rougeL: return "ROUGE-L";
    case BaselineMetric::bertscore: return "BERTScore";
  }
  return "?";
}

BaselineScores compute_baselines(std::string_view candidate, std::string_view reference, Embedder& embedder) {
  const auto ct = baseline_tokens(candidate);
  const auto rt = baseline_tokens(reference);
  BaselineScores s;
  s[BaselineMetric::rouge1] = rouge_n(ct, rt, 1);
  s[BaselineMetric::rouge2] = rouge_n(ct, rt, 2);
  s[BaselineMetric::rougeL] = rouge_l(ct, rt);
  s[BaselineMetric::bertscore] = bertscore_like(candidate, reference, embedder);
  return s;
}

nlohmann::ordered_json to_json(const PairKey& pair, BaselineMetric metric, const PRF& prf) {
  nlohmann::ordered_json j;
  j["pair"] = {pair.first, pair.second};
  j["metric"] = std::string(to_string(metric));
  j["precision"] = prf.precision;
  j["recall"] = prf.recall;
  j["f1"] = prf.f1;
  return j;
}

}  // namespace fans
