#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fans {

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

/// Unit-norm vector, or the zero vector for empty text.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool is_zero() const noexcept;
  bool operator==(const EmbeddingVector&) const = default;
};

/// Raw cosine in [-1, 1]; 0 when either side is the zero vector.
/// cosine(u, u) is exactly 1 for any nonzero u.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Embedding provider contract. Implementations must be thread-safe and
/// deterministic; failures surface as ProviderError.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  /// Identifies the model/configuration; used in score cache keys.
  virtual std::string fingerprint() const = 0;

  EmbeddingVector embed_one(const std::string& text);
};

inline constexpr std::size_t kDefaultStubDim = 256;

/// Deterministic test embedding: trims and lowercases, hashes each character
/// trigram (FNV-1a) into `dim` buckets, counts, L2-normalises. Texts shorter
/// than three characters hash as a single token.
EmbeddingVector stub_embed(std::string_view text, std::size_t dim = kDefaultStubDim);

class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::size_t dim = kDefaultStubDim);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string fingerprint() const override;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
};

/// Memoises another embedder per text. Safe for concurrent use.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(Embedder& inner) : inner_(inner) {}
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string fingerprint() const override { return inner_.fingerprint(); }
  std::size_t cached() const;

 private:
  Embedder& inner_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> memo_;
};

struct HttpEndpoint {
  std::string url;      // e.g. https://api.openai.com/v1/embeddings
  std::string api_key;  // sent as a Bearer token when non-empty
  std::string model;
  int timeout_seconds = 60;
};

/// OpenAI-compatible `/embeddings` client: POST {model, input:[...]},
/// reads data[i].embedding, L2-normalises. Empty texts never leave the process.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpEndpoint endpoint);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string fingerprint() const override;

 private:
  HttpEndpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Named entities
// ---------------------------------------------------------------------------

enum class EntityLabel { geopolitical, location, facility, organization, person, other };

std::string_view to_string(EntityLabel label) noexcept;

struct EntityMention {
  std::string surface;  // lowercased
  EntityLabel label = EntityLabel::other;

  bool operator==(const EntityMention&) const = default;
};

class NerProvider {
 public:
  virtual ~NerProvider() = default;
  /// Mentions in document order.
  virtual std::vector<EntityMention> extract(std::string_view text) = 0;
};

/// Phrase lists and span-classification cues for the rule-based tagger.
struct Gazetteer {
  std::map<std::string, EntityLabel> phrases;  // lowercase phrase -> label
  std::vector<std::string> org_suffixes;
  std::vector<std::string> location_heads;
  std::vector<std::string> facility_heads;
  std::vector<std::string> person_titles;

  /// Parses `<kind>\t<phrase>` lines (see core/data/gazetteer.tsv).
  static Gazetteer parse(std::string_view tsv);
  static Gazetteer load(const std::filesystem::path& path);
  static const Gazetteer& builtin();
};

/// Offline NER: longest gazetteer phrase match first, then maximal
/// capitalised spans classified by suffix/head/title cues.
class GazetteerNer final : public NerProvider {
 public:
  GazetteerNer();
  explicit GazetteerNer(Gazetteer gazetteer);
  std::vector<EntityMention> extract(std::string_view text) override;

 private:
  Gazetteer gaz_;
  std::size_t max_phrase_tokens_ = 1;
};

/// Remote NER: POST {"text": ...} -> [{"text": ..., "label": "GPE"}, ...]
/// with spaCy label names.
class HttpNer final : public NerProvider {
 public:
  explicit HttpNer(HttpEndpoint endpoint);
  std::vector<EntityMention> extract(std::string_view text) override;

 private:
  HttpEndpoint endpoint_;
};

EntityLabel entity_label_from_spacy(std::string_view spacy_label) noexcept;

// ---------------------------------------------------------------------------
// ConceptNet neighbours
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultConceptK = 5;

struct ConceptSet {
  std::string term;
  std::vector<std::string> concepts;  // deduplicated, lowercased, size <= k

  bool operator==(const ConceptSet&) const = default;
};

class ConceptProvider {
 public:
  virtual ~ConceptProvider() = default;
  virtual ConceptSet neighbors(const std::string& term, std::size_t k = kDefaultConceptK) = 0;
};

/// Local table term -> ordered concepts. Unknown terms yield an empty set.
class FixtureConcepts final : public ConceptProvider {
 public:
  FixtureConcepts() = default;
  explicit FixtureConcepts(std::map<std::string, std::vector<std::string>> table);
  /// JSON object {"term": ["concept", ...], ...}.
  static FixtureConcepts load(const std::filesystem::path& path);

  ConceptSet neighbors(const std::string& term, std::size_t k = kDefaultConceptK) override;

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

/// ConceptNet 5 REST client: GET <base>/c/en/<term>?limit=N, collects the
/// English node on the far side of each edge, ordered by edge weight.
class ConceptNetClient final : public ConceptProvider {
 public:
  explicit ConceptNetClient(std::string base_url = "https://api.conceptnet.io", int timeout_seconds = 30);
  ConceptSet neighbors(const std::string& term, std::size_t k = kDefaultConceptK) override;

 private:
  std::string base_url_;
  int timeout_seconds_;
};

/// Memoises another provider per (term, k). Thread-safe.
class CachingConceptProvider final : public ConceptProvider {
 public:
  explicit CachingConceptProvider(ConceptProvider& inner) : inner_(inner) {}
  ConceptSet neighbors(const std::string& term, std::size_t k = kDefaultConceptK) override;
  std::size_t upstream_calls() const noexcept { return upstream_calls_.load(); }

 private:
  ConceptProvider& inner_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>, ConceptSet> memo_;
  std::atomic<std::size_t> upstream_calls_{0};
};

/// Lowercase, trim, drop empties and duplicates (first occurrence wins), truncate to k.
std::vector<std::string> normalize_concepts(const std::vector<std::string>& raw, std::size_t k);

}  // namespace fans
