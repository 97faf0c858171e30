#include "fans/matchers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <regex>

#include <fmt/format.h>

#include "fans/errors.hpp"
#include "fans/text.hpp"

namespace fans {

void MatchConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(fuzzy_threshold)) throw ConfigError("fuzzy_threshold must be in (0, 1]");
  if (!in_unit(embed_threshold)) throw ConfigError("embed_threshold must be in (0, 1]");
  if (!in_unit(who_embed_threshold)) throw ConfigError("who_embed_threshold must be in (0, 1]");
  if (concept_k < 1) throw ConfigError("concept_k must be >= 1");
  if (concept_min_overlap < 1) throw ConfigError("concept_min_overlap must be >= 1");
}

std::string_view to_string(MatchMethod m) noexcept {
  switch (m) {
    case MatchMethod::exact: return "exact";
    case MatchMethod::fuzzy: return "fuzzy";
    case MatchMethod::embedding: return "embedding";
    case MatchMethod::concept_net: return "concept";
    case MatchMethod::sentence: return "sentence";
  }
  return "?";
}

nlohmann::ordered_json to_json(const MatchResult& r) {
  nlohmann::ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  auto matched = nlohmann::ordered_json::array();
  for (const auto& m : r.matched) {
    nlohmann::ordered_json e;
    e["a"] = m.a;
    e["b"] = m.b;
    e["method"] = std::string(to_string(m.method));
    e["score"] = m.score;
    matched.push_back(std::move(e));
  }
  j["matched"] = std::move(matched);
  j["unmatched_a"] = r.unmatched_a;
  j["unmatched_b"] = r.unmatched_b;
  return j;
}

double harmonic_f1(double precision, double recall) noexcept {
  const double sum = precision + recall;
  if (sum == 0.0) return 0.0;
  return 2.0 * (precision * recall) / sum;
}

double overlap_f1(std::size_t matched, std::size_t na, std::size_t nb) noexcept {
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  return 2.0 * static_cast<double>(matched) / static_cast<double>(na + nb);
}

namespace {

void fill_ratios(MatchResult& r, std::size_t na, std::size_t nb) {
  const std::size_t m = r.matched.size();
  if (na == 0 && nb == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return;
  }
  r.precision = na == 0 ? 0.0 : static_cast<double>(m) / static_cast<double>(na);
  r.recall = nb == 0 ? 0.0 : static_cast<double>(m) / static_cast<double>(nb);
  r.f1 = overlap_f1(m, na, nb);
}

std::vector<std::string> dedupe(std::span<const std::string> xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) {
    auto t = text::collapse_whitespace(text::to_lower(x));
    if (!t.empty() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fuzzy matching
// ---------------------------------------------------------------------------

double normalized_similarity(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  // LCS length; indel distance = |a| + |b| - 2 * LCS.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return 2.0 * static_cast<double>(prev[b.size()]) / static_cast<double>(total);
}

double fuzzy_ratio(std::string_view a_raw, std::string_view b_raw) {
  const std::string a = text::collapse_whitespace(text::to_lower(a_raw));
  const std::string b = text::collapse_whitespace(text::to_lower(b_raw));
  if (a.empty() && b.empty()) return 1.0;
  const double plain = normalized_similarity(a, b);

  const auto ta_v = text::split_whitespace(a);
  const auto tb_v = text::split_whitespace(b);
  const std::set<std::string> ta(ta_v.begin(), ta_v.end()), tb(tb_v.begin(), tb_v.end());
  std::vector<std::string> inter, only_a, only_b;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(inter));
  std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(only_a));
  std::set_difference(tb.begin(), tb.end(), ta.begin(), ta.end(), std::back_inserter(only_b));

  const std::string t0 = text::join(inter, " ");
  auto combine = [&](const std::vector<std::string>& rest) {
    const std::string tail = text::join(rest, " ");
    if (t0.empty()) return tail;
    if (tail.empty()) return t0;
    return t0 + " " + tail;
  };
  const std::string t1 = combine(only_a);
  const std::string t2 = combine(only_b);
  double token_set = normalized_similarity(t1, t2);
  if (!t0.empty()) token_set = std::max({token_set, normalized_similarity(t0, t1), normalized_similarity(t0, t2)});
  return std::max(plain, token_set);
}

PairDecision decide_pair(std::string_view a, std::string_view b, const EmbeddingVector& ea,
                         const EmbeddingVector& eb, const ConceptSet* ca, const ConceptSet* cb,
                         const EntityMatchOptions& opts) {
  const double fuzzy = fuzzy_ratio(a, b);
  if (fuzzy >= opts.fuzzy_threshold) return {true, MatchMethod::fuzzy, fuzzy};
  const double cos = std::max(0.0, cosine(ea, eb));
  if (cos >= opts.embed_threshold) return {true, MatchMethod::embedding, cos};
  if (ca && cb) {
    std::set<std::string> sa(ca->concepts.begin(), ca->concepts.end());
    std::set<std::string> sb(cb->concepts.begin(), cb->concepts.end());
    sa.insert(text::collapse_whitespace(text::to_lower(a)));
    sb.insert(text::collapse_whitespace(text::to_lower(b)));
    std::vector<std::string> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    if (common.size() >= opts.concept_min_overlap) {
      std::set<std::string> uni = sa;
      uni.insert(sb.begin(), sb.end());
      return {true, MatchMethod::concept_net, static_cast<double>(common.size()) / static_cast<double>(uni.size())};
    }
  }
  return {false, MatchMethod::fuzzy, 0.0};
}

namespace {

class BipartiteMatcher {
 public:
  BipartiteMatcher(const std::vector<std::vector<PairDecision>>& edges, std::size_t nb)
      : edges_(edges), match_a_(edges.size(), kNone), match_b_(nb, kNone), order_(edges.size()) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = 0; j < nb; ++j)
        if (edges[i][j].matched) order_[i].push_back(j);
      std::stable_sort(order_[i].begin(), order_[i].end(),
                       [&](std::size_t x, std::size_t y) { return edges[i][x].score > edges[i][y].score; });
    }
  }

  void run() {
    greedy();
    for (std::size_t i = 0; i < match_a_.size(); ++i) {
      if (match_a_[i] != kNone) continue;
      std::vector<char> seen(match_b_.size(), 0);
      augment(i, seen);
    }
  }

  std::size_t partner_of_a(std::size_t i) const { return match_a_[i]; }
  std::size_t partner_of_b(std::size_t j) const { return match_b_[j]; }
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

 private:
  void greedy() {
    struct Edge {
      std::size_t i, j;
      double score;
    };
    std::vector<Edge> all;
    for (std::size_t i = 0; i < edges_.size(); ++i)
      for (std::size_t j : order_[i]) all.push_back({i, j, edges_[i][j].score});
    std::stable_sort(all.begin(), all.end(), [](const Edge& x, const Edge& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.i != y.i) return x.i < y.i;
      return x.j < y.j;
    });
    for (const auto& e : all) {
      if (match_a_[e.i] == kNone && match_b_[e.j] == kNone) {
        match_a_[e.i] = e.j;
        match_b_[e.j] = e.i;
      }
    }
  }

  bool augment(std::size_t i, std::vector<char>& seen) {
    for (std::size_t j : order_[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (match_b_[j] == kNone || augment(match_b_[j], seen)) {
        match_a_[i] = j;
        match_b_[j] = i;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<PairDecision>>& edges_;
  std::vector<std::size_t> match_a_;
  std::vector<std::size_t> match_b_;
  std::vector<std::vector<std::size_t>> order_;
};

}  // namespace

MatchResult match_entity_sets(std::span<const std::string> a_in, std::span<const std::string> b_in,
                              const EntityMatchOptions& opts, Embedder& embedder, ConceptProvider* concepts) {
  const auto a = dedupe(a_in);
  const auto b = dedupe(b_in);
  MatchResult r;
  if (a.empty() || b.empty()) {
    r.unmatched_a = a;
    r.unmatched_b = b;
    fill_ratios(r, a.size(), b.size());
    return r;
  }

  std::vector<std::string> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const auto vecs = embedder.embed(all);
  if (vecs.size() != all.size()) throw ProviderError("embedder returned a short batch");

  std::vector<ConceptSet> ca, cb;
  if (concepts) {
    for (const auto& x : a) ca.push_back(concepts->neighbors(x, opts.concept_k));
    for (const auto& y : b) cb.push_back(concepts->neighbors(y, opts.concept_k));
  }

  std::vector<std::vector<PairDecision>> edges(a.size(), std::vector<PairDecision>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      edges[i][j] = decide_pair(a[i], b[j], vecs[i], vecs[a.size() + j], concepts ? &ca[i] : nullptr,
                                concepts ? &cb[j] : nullptr, opts);

  BipartiteMatcher matcher(edges, b.size());
  matcher.run();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t j = matcher.partner_of_a(i);
    if (j == BipartiteMatcher::kNone) {
      r.unmatched_a.push_back(a[i]);
    } else {
      r.matched.push_back({a[i], b[j], edges[i][j].method, edges[i][j].score});
    }
  }
  for (std::size_t j = 0; j < b.size(); ++j)
    if (matcher.partner_of_b(j) == BipartiteMatcher::kNone) r.unmatched_b.push_back(b[j]);
  fill_ratios(r, a.size(), b.size());
  return r;
}

MatchResult score_who(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, Embedder& embedder) {
  EntityMatchOptions opts{cfg.fuzzy_threshold, cfg.who_embed_threshold, cfg.concept_k, cfg.concept_min_overlap};
  return match_entity_sets(fa.who, fb.who, opts, embedder, nullptr);
}

std::vector<std::string> location_set(const FacetSet& fs, NerProvider& ner) {
  std::vector<std::string> out = dedupe(fs.where);
  const std::string source = fs.where_text.empty() ? text::join(fs.where, ", ") : fs.where_text;
  for (const auto& m : ner.extract(source)) {
    if (m.label == EntityLabel::person || m.label == EntityLabel::other) continue;
    auto surface = text::collapse_whitespace(text::to_lower(m.surface));
    if (!surface.empty() && std::find(out.begin(), out.end(), surface) == out.end()) out.push_back(std::move(surface));
  }
  return out;
}

MatchResult score_where(const FacetSet& fa, const FacetSet& fb, const MatchConfig& cfg, Embedder& embedder,
                        NerProvider& ner, ConceptProvider* concepts) {
  EntityMatchOptions opts{cfg.fuzzy_threshold, cfg.embed_threshold, cfg.concept_k, cfg.concept_min_overlap};
  return match_entity_sets(location_set(fa, ner), location_set(fb, ner), opts, embedder, concepts);
}

// ---------------------------------------------------------------------------
// Time mentions
// ---------------------------------------------------------------------------

std::string_view to_string(TimeKind k) noexcept {
  switch (k) {
    case TimeKind::date: return "date";
    case TimeKind::day: return "day";
    case TimeKind::month: return "month";
    case TimeKind::clock: return "clock";
    case TimeKind::daypart: return "daypart";
    case TimeKind::year: return "year";
    case TimeKind::month_day: return "month_day";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 7> kWeekdays = {"monday", "tuesday", "wednesday", "thursday",
                                                       "friday", "saturday", "sunday"};
constexpr std::array<std::string_view, 12> kMonths = {"january", "february", "march",     "april",
                                                      "may",     "june",     "july",      "august",
                                                      "september", "october", "november", "december"};
constexpr std::array<std::string_view, 4> kDayparts = {"morning", "afternoon", "evening", "night"};

std::optional<int> month_index(std::string_view w) {
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (w == kMonths[i]) return static_cast<int>(i);
    if (w.size() == 3 && kMonths[i].substr(0, 3) == w) return static_cast<int>(i);
  }
  if (w == "sept") return 8;
  return std::nullopt;
}

// "13", "13th", "1st" -> 13, 1.
std::optional<int> day_number(std::string_view w) {
  std::size_t d = 0;
  while (d < w.size() && std::isdigit(static_cast<unsigned char>(w[d]))) ++d;
  if (d == 0 || d > 2) return std::nullopt;
  const auto suffix = w.substr(d);
  if (!suffix.empty() && suffix != "st" && suffix != "nd" && suffix != "rd" && suffix != "th") return std::nullopt;
  const int v = std::stoi(std::string(w.substr(0, d)));
  if (v < 1 || v > 31) return std::nullopt;
  return v;
}

std::optional<int> year_number(std::string_view w) {
  if (w.size() != 4 || !std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  const int v = std::stoi(std::string(w));
  if (v < 1000 || v > 2999) return std::nullopt;
  return v;
}

void blank_out(std::string& s, std::size_t pos, std::size_t len) {
  std::fill(s.begin() + static_cast<std::ptrdiff_t>(pos), s.begin() + static_cast<std::ptrdiff_t>(pos + len), ' ');
}

void scan_numeric_dates(std::string& s, DateOrder order, std::set<TimeToken>& out) {
  static const std::regex kIso(R"((^|[^0-9])([0-9]{4})-([0-9]{1,2})-([0-9]{1,2})(?![0-9]))");
  static const std::regex kSlashed(R"((^|[^0-9])([0-9]{1,2})[/-]([0-9]{1,2})[/-]([0-9]{4})(?![0-9]))");

  auto emit = [&](int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    out.insert({TimeKind::date, fmt::format("{:04d}-{:02d}-{:02d}", y, m, d)});
    return true;
  };
  for (const auto* re : {&kIso, &kSlashed}) {
    std::smatch m;
    std::string::const_iterator from = s.cbegin();
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    while (std::regex_search(from, s.cend(), m, *re)) {
      const std::size_t start = static_cast<std::size_t>(m.position(2) + (from - s.cbegin()));
      const std::size_t len = static_cast<std::size_t>(m.position(0) + m.length(0)) -
                              static_cast<std::size_t>(m.position(2));
      bool ok;
      if (re == &kIso) {
        ok = emit(std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4]));
      } else {
        int first = std::stoi(m[2]), second = std::stoi(m[3]);
        int month = order == DateOrder::mdy ? first : second;
        int day = order == DateOrder::mdy ? second : first;
        if (month > 12 && day <= 12) std::swap(month, day);
        ok = emit(std::stoi(m[4]), month, day);
      }
      if (ok) spans.emplace_back(start, len);
      from = m.suffix().first;
    }
    for (auto [p, l] : spans) blank_out(s, p, l);
  }
}

void scan_clock_times(std::string& s, std::set<TimeToken>& out) {
  static const std::regex kClock(R"((^|[^0-9:])([0-9]{1,2})(?::([0-9]{2}))?\s*([ap])\.?\s?m\b\.?)");
  std::smatch m;
  std::string::const_iterator from = s.cbegin();
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  while (std::regex_search(from, s.cend(), m, kClock)) {
    const int hour = std::stoi(m[2]);
    const int minute = m[3].matched ? std::stoi(m[3]) : 0;
    if (hour >= 1 && hour <= 12 && minute <= 59) {
      out.insert({TimeKind::clock, fmt::format("{}:{:02d} {}m", hour, minute, m[4].str())});
      const auto start = static_cast<std::size_t>(m.position(2) + (from - s.cbegin()));
      spans.emplace_back(start, static_cast<std::size_t>(m.position(0) + m.length(0) - m.position(2)));
    }
    from = m.suffix().first;
  }
  for (auto [p, l] : spans) blank_out(s, p, l);
}

std::vector<std::string> words_of(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

void scan_words(const std::string& s, std::set<TimeToken>& out) {
  const auto words = words_of(s);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    if (std::find(kWeekdays.begin(), kWeekdays.end(), w) != kWeekdays.end()) {
      out.insert({TimeKind::day, w});
      continue;
    }
    if (std::find(kDayparts.begin(), kDayparts.end(), w) != kDayparts.end()) {
      out.insert({TimeKind::daypart, w});
      continue;
    }
    if (auto mi = month_index(w)) {
      const std::string month(kMonths[static_cast<std::size_t>(*mi)]);
      if (i + 1 < words.size()) {
        if (auto d = day_number(words[i + 1])) {
          out.insert({TimeKind::month_day, month + " " + std::to_string(*d)});
          ++i;
          continue;
        }
      }
      if (i > 0) {
        if (auto d = day_number(words[i - 1]); d && !year_number(words[i - 1])) {
          out.insert({TimeKind::month_day, month + " " + std::to_string(*d)});
          continue;
        }
      }
      // "may" is only a month next to a number or on its own.
      const bool has_number_neighbour = (i + 1 < words.size() && year_number(words[i + 1])) ||
                                        (i > 0 && year_number(words[i - 1]));
      if (w != "may" || has_number_neighbour || words.size() == 1) out.insert({TimeKind::month, month});
      continue;
    }
    if (auto y = year_number(w)) out.insert({TimeKind::year, w});
  }
}

}  // namespace

std::set<TimeToken> extract_time_mentions(std::span<const std::string> items, DateOrder order) {
  std::set<TimeToken> out;
  for (const auto& item : items) {
    std::string s = text::to_lower(item);
    scan_numeric_dates(s, order, out);
    scan_clock_times(s, out);
    scan_words(s, out);
  }
  return out;
}

MatchResult score_when(const FacetSet& fa, const FacetSet& fb, DateOrder order) {
  const auto ta = extract_time_mentions(fa.when, order);
  const auto tb = extract_time_mentions(fb.when, order);
  auto label = [](const TimeToken& t) { return std::string(to_string(t.kind)) + ":" + t.surface; };
  MatchResult r;
  for (const auto& t : ta) {
    if (tb.count(t))
      r.matched.push_back({label(t), label(t), MatchMethod::exact, 1.0});
    else
      r.unmatched_a.push_back(label(t));
  }
  for (const auto& t : tb)
    if (!ta.count(t)) r.unmatched_b.push_back(label(t));
  fill_ratios(r, ta.size(), tb.size());
  return r;
}

// ---------------------------------------------------------------------------
// Sentences
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> kAbbrev = {
      "mr",  "mrs",  "ms",   "dr",   "prof", "sr",   "jr",  "st",   "vs",   "etc",  "e.g", "i.e",
      "u.s", "u.k",  "u.n",  "inc",  "ltd",  "co",   "corp", "gen", "gov",  "sen",  "rep", "lt",
      "col", "capt", "sgt",  "no",   "jan",  "feb",  "mar", "apr",  "jun",  "jul",  "aug", "sep",
      "sept", "oct", "nov",  "dec",  "mt",   "ft",   "approx", "dept", "est", "fig", "al"};
  return kAbbrev;
}

bool is_abbreviation_before(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1])) && text[start - 1] != '(' &&
         text[start - 1] != '"')
    --start;
  std::string word = text::to_lower(text.substr(start, dot - start));
  if (word.empty()) return false;
  if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;  // initial
  return abbreviations().count(word) > 0;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    auto s = text::collapse_whitespace(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?' || text[j] == '"' ||
                                 text[j] == '\'' || text[j] == ')'))
        ++j;
      const bool at_boundary = j == text.size() || std::isspace(static_cast<unsigned char>(text[j]));
      if (at_boundary && !(c == '.' && j == i + 1 && is_abbreviation_before(text, i))) {
        flush(j);
        i = j;
        continue;
      }
      i = j;
      continue;
    }
    ++i;
  }
  flush(text.size());
  return out;
}

MatchResult sem_f1(std::string_view text_a, std::string_view text_b, Embedder& embedder) {
  const auto sa = split_sentences(text_a);
  const auto sb = split_sentences(text_b);
  MatchResult r;
  if (sa.empty() || sb.empty()) {
    r.unmatched_a = sa;
    r.unmatched_b = sb;
    const bool both = sa.empty() && sb.empty();
    r.precision = r.recall = r.f1 = both ? 1.0 : 0.0;
    return r;
  }
  std::vector<std::string> all(sa);
  all.insert(all.end(), sb.begin(), sb.end());
  const auto vecs = embedder.embed(all);
  if (vecs.size() != all.size()) throw ProviderError("embedder returned a short batch");

  std::vector<std::vector<double>> sim(sa.size(), std::vector<double>(sb.size()));
  for (std::size_t i = 0; i < sa.size(); ++i)
    for (std::size_t j = 0; j < sb.size(); ++j) sim[i][j] = std::max(0.0, cosine(vecs[i], vecs[sa.size() + j]));

  double p_sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < sb.size(); ++j)
      if (sim[i][j] > sim[i][best]) best = j;
    p_sum += sim[i][best];
    if (sim[i][best] > 0.0)
      r.matched.push_back({sa[i], sb[best], MatchMethod::sentence, sim[i][best]});
    else
      r.unmatched_a.push_back(sa[i]);
  }
  double r_sum = 0.0;
  for (std::size_t j = 0; j < sb.size(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) best = std::max(best, sim[i][j]);
    r_sum += best;
    if (best == 0.0) r.unmatched_b.push_back(sb[j]);
  }
  r.precision = p_sum / static_cast<double>(sa.size());
  r.recall = r_sum / static_cast<double>(sb.size());
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

}  // namespace fans
