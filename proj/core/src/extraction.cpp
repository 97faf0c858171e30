#include "fans/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "embedded_data.hpp"
#include "fans/errors.hpp"
#include "fans/hashing.hpp"
#include "fans/text.hpp"
#include "http_client.hpp"

namespace fans {

// ---------------------------------------------------------------------------
// FacetSet parsing
// ---------------------------------------------------------------------------

const std::vector<std::string>& FacetSet::list(Facet f) const {
  switch (f) {
    case Facet::who: return who;
    case Facet::when: return when;
    case Facet::where: return where;
    default: throw std::invalid_argument("facet '" + std::string(facet_name(f)) + "' is not list-valued");
  }
}

const std::string& FacetSet::text(Facet f) const {
  switch (f) {
    case Facet::what: return what;
    case Facet::why: return why;
    case Facet::how: return how;
    default: throw std::invalid_argument("facet '" + std::string(facet_name(f)) + "' is not free text");
  }
}

namespace {

constexpr std::string_view kMarkup = "*_`#>";

bool is_markup(char c) { return kMarkup.find(c) != std::string_view::npos; }

std::string_view strip_markup(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && is_markup(s.front())) s = text::trim(s.substr(1));
  while (!s.empty() && is_markup(s.back())) s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

// Leading list markers: "-", "*", "•", "1.", "2)".
std::string_view strip_bullet(std::string_view s) {
  s = text::trim(s);
  if (s.rfind("\xE2\x80\xA2", 0) == 0) return text::trim(s.substr(3));
  if (!s.empty() && (s.front() == '-' || s.front() == '*') && (s.size() == 1 || s[1] == ' '))
    return text::trim(s.substr(1));
  std::size_t d = 0;
  while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
  if (d > 0 && d < s.size() && (s[d] == '.' || s[d] == ')') && (d + 1 == s.size() || s[d + 1] == ' '))
    return text::trim(s.substr(d + 1));
  return s;
}

struct LabelHit {
  Facet facet;
  std::string_view rest;  // content after the separator, may be empty
};

std::optional<LabelHit> match_label_line(std::string_view line) {
  std::string_view s = text::trim(line);
  while (!s.empty() && (is_markup(s.front()) || s.front() == '-')) s = text::trim(s.substr(1));
  s = strip_bullet(s);
  while (!s.empty() && is_markup(s.front())) s = text::trim(s.substr(1));

  // Longest label first so "where" is not read as "whe..." of another label.
  static constexpr std::array<Facet, kFacetCount> kOrder = {Facet::where, Facet::what, Facet::when,
                                                            Facet::who,   Facet::why,  Facet::how};
  for (Facet f : kOrder) {
    const std::string_view label = facet_label(f);
    if (!text::starts_with_icase(s, label)) continue;
    std::string_view after = s.substr(label.size());
    if (!after.empty() && (std::isalnum(static_cast<unsigned char>(after.front())) || after.front() == '\''))
      return std::nullopt;
    auto skip_markup = [&] {
      while (!after.empty() && (is_markup(after.front()) || after.front() == ' ' || after.front() == '\t'))
        after.remove_prefix(1);
    };
    skip_markup();
    if (!after.empty() && after.front() == '(') {
      const auto close = after.find(')');
      if (close == std::string_view::npos) return std::nullopt;
      after.remove_prefix(close + 1);
      skip_markup();
    }
    if (after.empty()) return LabelHit{f, {}};  // heading-style label, content follows
    if (after.front() != ':') return std::nullopt;
    after.remove_prefix(1);
    skip_markup();
    return LabelHit{f, text::trim(after)};
  }
  return std::nullopt;
}

const std::vector<std::string>& placeholder_items() {
  static const std::vector<std::string> kPlaceholders = {
      "n/a", "na", "none", "unknown", "not mentioned", "not specified", "not stated", "not provided",
      "not available", "unspecified", "-"};
  return kPlaceholders;
}

// Original-case cleaned items of a list facet.
std::vector<std::string> split_list_items(const std::vector<std::string>& lines) {
  std::vector<std::string> items;
  for (const auto& line : lines) {
    for (auto& piece : text::split_any(line, ",;")) {
      std::string_view s = strip_markup(strip_bullet(piece));
      if (text::starts_with_icase(s, "and ")) s = text::trim(s.substr(4));
      s = strip_markup(s);
      while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == '"' || s.back() == '\'')) s.remove_suffix(1);
      if (!s.empty() && s.back() == '.' && s.find('.') == s.size() - 1) s.remove_suffix(1);
      std::string item = text::collapse_whitespace(s);
      if (item.empty()) continue;
      const std::string lowered = text::to_lower(item);
      if (std::find(placeholder_items().begin(), placeholder_items().end(), lowered) !=
          placeholder_items().end())
        continue;
      items.push_back(std::move(item));
    }
  }
  return items;
}

std::string join_text_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> parts;
  for (const auto& l : lines) {
    auto s = strip_markup(strip_bullet(l));
    if (!s.empty()) parts.emplace_back(s);
  }
  return text::collapse_whitespace(text::join(parts, " "));
}

}  // namespace

FacetSet parse_facet_response(std::string_view raw) {
  std::array<std::optional<std::vector<std::string>>, kFacetCount> blocks;
  std::optional<Facet> current;
  bool current_is_duplicate = false;

  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto hit = match_label_line(line)) {
      current = hit->facet;
      auto& block = blocks[index_of(hit->facet)];
      current_is_duplicate = block.has_value();
      if (!current_is_duplicate) {
        block.emplace();
        if (!hit->rest.empty()) block->emplace_back(hit->rest);
      }
      continue;
    }
    if (current && !current_is_duplicate && !text::is_blank(line))
      blocks[index_of(*current)]->push_back(std::string(text::trim(line)));
  }

  const auto found = static_cast<std::size_t>(
      std::count_if(blocks.begin(), blocks.end(), [](const auto& b) { return b.has_value(); }));
  if (found < kMinLabelsForParse)
    throw MalformedResponse("response has " + std::to_string(found) + " of 6 facet labels (need " +
                            std::to_string(kMinLabelsForParse) + ")");

  FacetSet fs;
  for (Facet f : kAllFacets) {
    const auto& block = blocks[index_of(f)];
    if (!block) {
      fs.missing.push_back(f);
      continue;
    }
    if (is_entity_facet(f)) {
      auto items = split_list_items(*block);
      std::vector<std::string> lowered;
      for (const auto& it : items) lowered.push_back(text::to_lower(it));
      if (f == Facet::who) fs.who = std::move(lowered);
      if (f == Facet::when) fs.when = std::move(lowered);
      if (f == Facet::where) {
        fs.where = std::move(lowered);
        fs.where_text = text::join(items, ", ");
      }
    } else {
      std::string t = join_text_lines(*block);
      if (f == Facet::what) fs.what = std::move(t);
      if (f == Facet::why) fs.why = std::move(t);
      if (f == Facet::how) fs.how = std::move(t);
    }
  }
  return fs;
}

std::string serialize_facets(const FacetSet& fs) {
  std::string out;
  for (Facet f : kAllFacets) {
    if (std::find(fs.missing.begin(), fs.missing.end(), f) != fs.missing.end()) continue;
    std::string content;
    if (f == Facet::where && !fs.where_text.empty())
      content = fs.where_text;
    else if (is_entity_facet(f))
      content = text::join(fs.list(f), ", ");
    else
      content = fs.text(f);
    out += facet_label(f);
    out += ": ";
    out += content;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refusals
// ---------------------------------------------------------------------------

RefusalDetector::RefusalDetector(std::vector<std::string> patterns) {
  for (auto& p : patterns) {
    auto t = text::trim(p);
    if (!t.empty()) patterns_.push_back(text::to_lower(t));
  }
}

RefusalDetector RefusalDetector::parse(std::string_view patterns_text) {
  std::vector<std::string> patterns;
  std::istringstream in{std::string(patterns_text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    patterns.emplace_back(t);
  }
  return RefusalDetector(std::move(patterns));
}

RefusalDetector RefusalDetector::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open refusal patterns " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const RefusalDetector& RefusalDetector::defaults() {
  static const RefusalDetector kDefaults = parse(embedded::kRefusalPatterns);
  return kDefaults;
}

bool RefusalDetector::is_refusal(std::string_view raw) const {
  if (text::is_blank(raw)) return true;
  return std::any_of(patterns_.begin(), patterns_.end(),
                     [&](const std::string& p) { return text::contains_icase(raw, p); });
}

bool detect_refusal(std::string_view raw, const RefusalDetector& detector) { return detector.is_refusal(raw); }

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

std::string prompt_hash(const PromptText& prompt) { return sha256_hex(prompt.render()); }

FixtureLlmProvider::FixtureLlmProvider(std::filesystem::path dir, std::string model_id)
    : dir_(std::move(dir)), model_id_(std::move(model_id)) {
  if (!std::filesystem::is_directory(dir_)) throw ConfigError("LLM fixture directory not found: " + dir_.string());
}

std::string FixtureLlmProvider::complete(const PromptText& prompt) {
  const auto path = dir_ / (prompt_hash(prompt) + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("no fixture transcript " + path.filename().string(), /*retryable=*/false);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpLlmProvider::HttpLlmProvider(LlmEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.api_key.empty()) throw ConfigError("LLM API key is not set");
  http::parse_url(endpoint_.url);
}

std::string HttpLlmProvider::complete(const PromptText& prompt) {
  nlohmann::json req{
      {"model", endpoint_.model},
      {"temperature", endpoint_.temperature},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", prompt.system_preamble}},
                              {{"role", "user"}, {"content", prompt.user_message()}}})}};
  std::string err;
  auto res = http::post_json(endpoint_.url, req.dump(), endpoint_.api_key, endpoint_.timeout_seconds, err);
  if (!res) throw TransportError("LLM request failed: " + err);
  if (res->status != 200) {
    const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
    throw TransportError("LLM endpoint returned HTTP " + std::to_string(res->status), retryable);
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto& content = body.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed LLM response: ") + e.what());
  }
}

ThrottledLlmProvider::ThrottledLlmProvider(LlmProvider& inner, std::ptrdiff_t max_in_flight,
                                           std::chrono::milliseconds min_interval)
    : inner_(inner), slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)), min_interval_(min_interval) {}

std::string ThrottledLlmProvider::complete(const PromptText& prompt) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  if (min_interval_.count() > 0) {
    std::chrono::steady_clock::time_point start;
    {
      std::lock_guard lock(pace_mu_);
      start = std::max(std::chrono::steady_clock::now(), next_start_);
      next_start_ = start + min_interval_;
    }
    std::this_thread::sleep_until(start);
  }
  return inner_.complete(prompt);
}

Completion llm_complete(LlmProvider& provider, const PromptText& prompt, const RetryPolicy& policy,
                        const Sleeper& sleep) {
  const int max_attempts = std::max(1, policy.max_attempts);
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return Completion{provider.complete(prompt), attempt};
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= max_attempts) {
        spdlog::warn("LLM call failed after {} attempt(s): {}", attempt, e.what());
        throw;
      }
      spdlog::info("LLM call attempt {} failed ({}); retrying in {} ms", attempt, e.what(), backoff.count());
      if (sleep)
        sleep(backoff);
      else
        std::this_thread::sleep_for(backoff);
      const auto next = std::chrono::milliseconds(
          static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * policy.multiplier));
      backoff = std::min(next, policy.max_backoff);
    }
  }
}

// ---------------------------------------------------------------------------
// Transcript cache
// ---------------------------------------------------------------------------

TranscriptCache::TranscriptCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string TranscriptCache::key(std::string_view extractor_id, PromptLevel level, std::string_view narrative_body) {
  std::string material(extractor_id);
  material += '\0';
  material += to_string(level);
  material += '\0';
  material += sha256_hex(narrative_body);
  return sha256_hex(material);
}

std::filesystem::path TranscriptCache::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<TranscriptEntry> TranscriptCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    return TranscriptEntry{j.at("prompt").get<std::string>(), j.at("raw").get<std::string>(),
                           j.value("timestamp", ""), j.value("model", "")};
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt transcript cache entry " + path_for(key).string() + ": " + e.what());
  }
}

void TranscriptCache::put(const std::string& key, const TranscriptEntry& entry) {
  nlohmann::ordered_json j;
  j["prompt"] = entry.prompt;
  j["raw"] = entry.raw;
  j["timestamp"] = entry.timestamp;
  j["model"] = entry.model;

  std::lock_guard lock(stripes_[fnv1a64(key) % stripes_.size()]);
  const auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write transcript cache entry " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, final_path);
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

std::string_view to_string(OutcomeKind kind) noexcept {
  switch (kind) {
    case OutcomeKind::success: return "success";
    case OutcomeKind::refusal: return "refusal";
    case OutcomeKind::empty_output: return "empty_output";
    case OutcomeKind::transport_error: return "transport_error";
  }
  return "?";
}

double ExtractionStats::Counts::success_rate() const noexcept {
  return attempted == 0 ? 0.0 : static_cast<double>(succeeded) / static_cast<double>(attempted);
}

ExtractionStats::Counts& ExtractionStats::Counts::operator+=(const Counts& o) noexcept {
  attempted += o.attempted;
  succeeded += o.succeeded;
  refusals += o.refusals;
  empties += o.empties;
  transport_errors += o.transport_errors;
  return *this;
}

ExtractionStats::ExtractionStats(const ExtractionStats& other) {
  std::lock_guard lock(other.mu_);
  cells_ = other.cells_;
}

ExtractionStats& ExtractionStats::operator=(const ExtractionStats& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  cells_ = other.cells_;
  return *this;
}

void ExtractionStats::record(Leaning leaning, PromptLevel level, OutcomeKind kind) {
  std::lock_guard lock(mu_);
  auto& c = cells_[{leaning, level}];
  ++c.attempted;
  switch (kind) {
    case OutcomeKind::success: ++c.succeeded; break;
    case OutcomeKind::refusal: ++c.refusals; break;
    case OutcomeKind::empty_output: ++c.empties; break;
    case OutcomeKind::transport_error: ++c.transport_errors; break;
  }
}

ExtractionStats::Counts ExtractionStats::cell(Leaning leaning, PromptLevel level) const {
  std::lock_guard lock(mu_);
  auto it = cells_.find({leaning, level});
  return it == cells_.end() ? Counts{} : it->second;
}

ExtractionStats::Counts ExtractionStats::level_total(PromptLevel level) const {
  std::lock_guard lock(mu_);
  Counts sum;
  for (const auto& [k, c] : cells_)
    if (k.second == level) sum += c;
  return sum;
}

ExtractionStats::Counts ExtractionStats::total() const {
  std::lock_guard lock(mu_);
  Counts sum;
  for (const auto& [k, c] : cells_) sum += c;
  return sum;
}

std::vector<PromptLevel> ExtractionStats::levels() const {
  std::lock_guard lock(mu_);
  std::vector<PromptLevel> out;
  for (const auto& [k, c] : cells_)
    if (std::find(out.begin(), out.end(), k.second) == out.end()) out.push_back(k.second);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string title_case(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}
}  // namespace

std::string ExtractionStats::to_table() const {
  const auto lvls = levels();
  std::string out = "leaning";
  for (auto l : lvls) out += fmt::format("\tLevel {}", to_int(l));
  out += '\n';
  for (Leaning le : kLeanings) {
    out += title_case(to_string(le));
    for (auto l : lvls) out += fmt::format("\t{}", cell(le, l).succeeded);
    out += '\n';
  }
  out += "Success";
  for (auto l : lvls) out += fmt::format("\t{:.1f}%", 100.0 * level_total(l).success_rate());
  out += '\n';
  return out;
}

std::string ExtractionStats::to_json() const {
  nlohmann::ordered_json j;
  for (auto l : levels()) {
    nlohmann::ordered_json lvl;
    for (Leaning le : kLeanings) {
      const auto c = cell(le, l);
      lvl[std::string(to_string(le))] = {{"attempted", c.attempted},
                                         {"succeeded", c.succeeded},
                                         {"refusals", c.refusals},
                                         {"empty_outputs", c.empties},
                                         {"transport_errors", c.transport_errors}};
    }
    const auto t = level_total(l);
    lvl["attempted"] = t.attempted;
    lvl["succeeded"] = t.succeeded;
    lvl["success_rate"] = t.success_rate();
    j[std::string(to_string(l))] = std::move(lvl);
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

ExtractionOutcome classify_transcript(std::string_view raw, const Narrative& narrative, PromptLevel level,
                                      std::string_view extractor_id, const RefusalDetector& refusals) {
  ExtractionOutcome out;
  if (text::is_blank(raw)) {
    out.value = EmptyOutput{};
    return out;
  }
  if (refusals.is_refusal(raw)) {
    out.value = RefusalOutcome{std::string(raw)};
    return out;
  }
  try {
    FacetSet fs = parse_facet_response(raw);
    fs.source_narrative = narrative.id;
    fs.level = level;
    fs.extractor_id = std::string(extractor_id);
    out.value = std::move(fs);
  } catch (const MalformedResponse&) {
    // Unusable output is a failed extraction like any refusal.
    out.value = RefusalOutcome{std::string(raw)};
  }
  return out;
}

ExtractionOutcome extract_facets(const Narrative& narrative, PromptLevel level, LlmProvider& provider,
                                 TranscriptCache* cache, const ExtractOptions& options, ExtractionStats* stats) {
  const RefusalDetector& refusals = options.refusals ? *options.refusals : RefusalDetector::defaults();
  const PromptTemplates& templates = options.templates ? *options.templates : PromptTemplates::defaults();
  const std::string extractor_id = provider.model_id();
  const std::string key = TranscriptCache::key(extractor_id, level, narrative.body);

  auto finish = [&](ExtractionOutcome outcome) {
    if (stats) stats->record(narrative.leaning, level, outcome.kind());
    return outcome;
  };

  if (cache) {
    if (auto entry = cache->get(key)) {
      auto outcome = classify_transcript(entry->raw, narrative, level, extractor_id, refusals);
      const bool failed = outcome.kind() == OutcomeKind::refusal || outcome.kind() == OutcomeKind::empty_output;
      if (!(failed && options.refresh_refusals)) {
        outcome.from_cache = true;
        return finish(std::move(outcome));
      }
    }
  }

  const PromptText prompt = build_prompt(narrative, level, templates);
  Completion completion;
  try {
    completion = llm_complete(provider, prompt, options.retry, options.sleep);
  } catch (const TransportError& e) {
    ExtractionOutcome failed;
    failed.value = TransportFailure{e.what()};
    failed.attempts = e.retryable() ? std::max(1, options.retry.max_attempts) : 1;
    return finish(std::move(failed));
  }
  if (cache) cache->put(key, TranscriptEntry{prompt.render(), completion.text, utc_timestamp(), extractor_id});

  auto outcome = classify_transcript(completion.text, narrative, level, extractor_id, refusals);
  outcome.attempts = completion.attempts;
  return finish(std::move(outcome));
}

std::optional<ExtractionOutcome> cached_outcome(const Narrative& narrative, PromptLevel level,
                                                std::string_view extractor_id, const TranscriptCache& cache,
                                                const RefusalDetector& refusals) {
  auto entry = cache.get(TranscriptCache::key(extractor_id, level, narrative.body));
  if (!entry) return std::nullopt;
  auto outcome = classify_transcript(entry->raw, narrative, level, extractor_id, refusals);
  outcome.from_cache = true;
  return outcome;
}

}  // namespace fans
