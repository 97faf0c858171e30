#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fans/corpus.hpp"
#include "fans/facets.hpp"
#include "fans/prompts.hpp"

namespace fans {

/// 5W1H facets of one narrative, as extracted at one prompt level.
struct FacetSet {
  std::vector<std::string> who;
  std::vector<std::string> when;
  std::vector<std::string> where;
  /// Unsplit Where content as the model wrote it (original case); NER input.
  std::string where_text;
  std::string what;
  std::string why;
  std::string how;
  /// Labels absent from the response. Missing facets are empty, never filled in.
  std::vector<Facet> missing;

  std::string source_narrative;
  PromptLevel level = PromptLevel::L3;
  std::string extractor_id;

  const std::vector<std::string>& list(Facet f) const;
  const std::string& text(Facet f) const;

  bool operator==(const FacetSet&) const = default;
};

inline constexpr std::size_t kMinLabelsForParse = 4;

/// Parses `Label: content` blocks. Labels are matched case-insensitively at
/// line starts, optionally wrapped in markup (`**Who:**`, `## Who`, `1. Who:`).
/// Who/When/Where content is split on commas, semicolons and newlines, then
/// trimmed and lowercased. Throws MalformedResponse when fewer than four of the
/// six labels are present. Provenance fields are left default.
FacetSet parse_facet_response(std::string_view raw);

/// Canonical `Label: content` lines; parse_facet_response inverts it.
std::string serialize_facets(const FacetSet& facets);

// ---------------------------------------------------------------------------
// Refusals
// ---------------------------------------------------------------------------

class RefusalDetector {
 public:
  static const RefusalDetector& defaults();
  /// One pattern per line; blank lines and '#' comments ignored.
  static RefusalDetector parse(std::string_view patterns_text);
  static RefusalDetector load(const std::filesystem::path& path);

  explicit RefusalDetector(std::vector<std::string> patterns);

  /// True for blank output or when any pattern occurs (case-insensitive).
  bool is_refusal(std::string_view raw) const;
  const std::vector<std::string>& patterns() const noexcept { return patterns_; }

 private:
  std::vector<std::string> patterns_;
};

bool detect_refusal(std::string_view raw, const RefusalDetector& detector = RefusalDetector::defaults());

// ---------------------------------------------------------------------------
// LLM providers
// ---------------------------------------------------------------------------

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  /// Raw completion text. Throws TransportError.
  virtual std::string complete(const PromptText& prompt) = 0;
  virtual std::string model_id() const = 0;
};

/// Key under which fixture transcripts are stored: sha256 of PromptText::render().
std::string prompt_hash(const PromptText& prompt);

/// Serves `<dir>/<prompt_hash>.txt`. A missing file is a non-retryable TransportError.
class FixtureLlmProvider final : public LlmProvider {
 public:
  FixtureLlmProvider(std::filesystem::path dir, std::string model_id);
  std::string complete(const PromptText& prompt) override;
  std::string model_id() const override { return model_id_; }

 private:
  std::filesystem::path dir_;
  std::string model_id_;
};

struct LlmEndpoint {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int timeout_seconds = 120;
};

/// OpenAI-compatible chat completions client. The preamble goes in the
/// system message, the filled instruction in the user message.
class HttpLlmProvider final : public LlmProvider {
 public:
  explicit HttpLlmProvider(LlmEndpoint endpoint);
  std::string complete(const PromptText& prompt) override;
  std::string model_id() const override { return endpoint_.model; }

 private:
  LlmEndpoint endpoint_;
};

/// Bounds in-flight requests and spaces request starts by `min_interval`.
class ThrottledLlmProvider final : public LlmProvider {
 public:
  ThrottledLlmProvider(LlmProvider& inner, std::ptrdiff_t max_in_flight = 4,
                       std::chrono::milliseconds min_interval = std::chrono::milliseconds(0));
  std::string complete(const PromptText& prompt) override;
  std::string model_id() const override { return inner_.model_id(); }

 private:
  LlmProvider& inner_;
  std::counting_semaphore<1024> slots_;
  std::chrono::milliseconds min_interval_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_start_{};
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct Completion {
  std::string text;
  int attempts = 0;
};

/// Calls the provider, retrying retryable TransportErrors with exponential
/// backoff. Rethrows the last TransportError once attempts are exhausted.
Completion llm_complete(LlmProvider& provider, const PromptText& prompt, const RetryPolicy& policy = {},
                        const Sleeper& sleep = {});

// ---------------------------------------------------------------------------
// Transcript cache
// ---------------------------------------------------------------------------

struct TranscriptEntry {
  std::string prompt;
  std::string raw;
  std::string timestamp;  // ISO-8601 UTC
  std::string model;
};

/// Content-addressed transcript store: one JSON file per key. Writes go
/// through a temp file and rename; concurrent writers to one key serialise.
class TranscriptCache {
 public:
  explicit TranscriptCache(std::filesystem::path dir);

  static std::string key(std::string_view extractor_id, PromptLevel level, std::string_view narrative_body);

  std::optional<TranscriptEntry> get(const std::string& key) const;
  void put(const std::string& key, const TranscriptEntry& entry);
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::array<std::mutex, 32> stripes_;
};

// ---------------------------------------------------------------------------
// Outcomes and statistics
// ---------------------------------------------------------------------------

struct RefusalOutcome {
  std::string raw;
  bool operator==(const RefusalOutcome&) const = default;
};
struct EmptyOutput {
  bool operator==(const EmptyOutput&) const = default;
};
struct TransportFailure {
  std::string message;
  bool operator==(const TransportFailure&) const = default;
};

enum class OutcomeKind { success, refusal, empty_output, transport_error };

std::string_view to_string(OutcomeKind kind) noexcept;

struct ExtractionOutcome {
  std::variant<FacetSet, RefusalOutcome, EmptyOutput, TransportFailure> value;
  bool from_cache = false;
  int attempts = 0;

  OutcomeKind kind() const noexcept { return static_cast<OutcomeKind>(value.index()); }
  bool ok() const noexcept { return kind() == OutcomeKind::success; }
  const FacetSet& facets() const { return std::get<FacetSet>(value); }
};

/// Counts per (leaning, level). Thread-safe recording.
class ExtractionStats {
 public:
  struct Counts {
    std::size_t attempted = 0;
    std::size_t succeeded = 0;
    std::size_t refusals = 0;
    std::size_t empties = 0;
    std::size_t transport_errors = 0;

    double success_rate() const noexcept;
    Counts& operator+=(const Counts& other) noexcept;
    bool operator==(const Counts&) const = default;
  };

  ExtractionStats() = default;
  ExtractionStats(const ExtractionStats& other);
  ExtractionStats& operator=(const ExtractionStats& other);

  void record(Leaning leaning, PromptLevel level, OutcomeKind kind);

  Counts cell(Leaning leaning, PromptLevel level) const;
  Counts level_total(PromptLevel level) const;
  Counts total() const;
  std::vector<PromptLevel> levels() const;

  /// Rows left/right/center/theme hold succeeded counts, final row the
  /// success rate, one column per level. Tab-separated.
  std::string to_table() const;
  std::string to_json() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<Leaning, PromptLevel>, Counts> cells_;
};

struct ExtractOptions {
  const PromptTemplates* templates = nullptr;    // defaults() when null
  const RefusalDetector* refusals = nullptr;     // defaults() when null
  RetryPolicy retry;
  Sleeper sleep;
  /// Re-query the provider when the cached transcript is a refusal or empty.
  bool refresh_refusals = false;
};

/// Cache lookup by (extractor, level, body hash); on a miss calls the
/// provider with retries and stores the raw transcript. Refusals, empty
/// output and malformed responses are outcomes, not exceptions. Transport
/// failures are reported as TransportFailure and never cached.
ExtractionOutcome extract_facets(const Narrative& narrative, PromptLevel level, LlmProvider& provider,
                                 TranscriptCache* cache, const ExtractOptions& options = {},
                                 ExtractionStats* stats = nullptr);

/// Classifies a raw transcript without calling any provider.
ExtractionOutcome classify_transcript(std::string_view raw, const Narrative& narrative, PromptLevel level,
                                      std::string_view extractor_id, const RefusalDetector& refusals);

/// Reads a narrative's facets from the cache only; nullopt on a cache miss.
std::optional<ExtractionOutcome> cached_outcome(const Narrative& narrative, PromptLevel level,
                                                std::string_view extractor_id, const TranscriptCache& cache,
                                                const RefusalDetector& refusals = RefusalDetector::defaults());

}  // namespace fans
