#include "fans/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "embedded_data.hpp"
#include "fans/errors.hpp"
#include "fans/hashing.hpp"
#include "fans/text.hpp"
#include "http_client.hpp"

namespace fans {

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    uv += u.values[i] * v.values[i];
    uu += u.values[i] * u.values[i];
    vv += v.values[i] * v.values[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for u == v the quotient is exactly 1.
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

EmbeddingVector Embedder::embed_one(const std::string& text) {
  auto out = embed(std::span<const std::string>(&text, 1));
  if (out.size() != 1) throw ProviderError("embedder returned " + std::to_string(out.size()) + " vectors for 1 text");
  return std::move(out.front());
}

namespace {

void l2_normalize(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss == 0.0) return;
  const double norm = std::sqrt(ss);
  for (double& x : v) x /= norm;
}

}  // namespace

EmbeddingVector stub_embed(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("stub_embed: dim must be > 0");
  EmbeddingVector out;
  out.values.assign(dim, 0.0);
  const std::string t = text::to_lower(text::trim(text));
  if (t.empty()) return out;
  if (t.size() < 3) {
    out.values[fnv1a64(t) % dim] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i + 3 <= t.size(); ++i)
    out.values[fnv1a64(std::string_view(t).substr(i, 3)) % dim] += 1.0;
  l2_normalize(out.values);
  return out;
}

StubEmbedder::StubEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("StubEmbedder: dim must be > 0");
}

std::vector<EmbeddingVector> StubEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(stub_embed(t, dim_));
  return out;
}

std::string StubEmbedder::fingerprint() const { return "stub-trigram-" + std::to_string(dim_); }

std::vector<EmbeddingVector> CachingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> missing;
  {
    std::shared_lock lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto it = memo_.find(texts[i]); it != memo_.end())
        out[i] = it->second;
      else
        missing.push_back(i);
    }
  }
  if (missing.empty()) return out;

  std::vector<std::string> batch;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i : missing)
    if (slot.try_emplace(texts[i], batch.size()).second) batch.push_back(texts[i]);
  auto fresh = inner_.embed(batch);
  if (fresh.size() != batch.size()) throw ProviderError("embedder returned a short batch");

  std::unique_lock lock(mu_);
  for (std::size_t k = 0; k < batch.size(); ++k) memo_.try_emplace(batch[k], fresh[k]);
  for (std::size_t i : missing) out[i] = fresh[slot.at(texts[i])];
  return out;
}

std::size_t CachingEmbedder::cached() const {
  std::shared_lock lock(mu_);
  return memo_.size();
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  http::parse_url(endpoint_.url);
}

std::string HttpEmbedder::fingerprint() const { return "http:" + endpoint_.url + "#" + endpoint_.model; }

std::vector<EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> nonempty;
  nlohmann::json input = nlohmann::json::array();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto t = text::trim(texts[i]);
    if (t.empty()) continue;
    nonempty.push_back(i);
    input.push_back(std::string(t));
  }
  if (nonempty.empty()) return out;  // all zero vectors, dimension unknown

  nlohmann::json req{{"model", endpoint_.model}, {"input", input}};
  std::string err;
  auto res = http::post_json(endpoint_.url, req.dump(), endpoint_.api_key, endpoint_.timeout_seconds, err);
  if (!res) throw ProviderError("embedding request failed: " + err);
  if (res->status != 200)
    throw ProviderError("embedding endpoint returned HTTP " + std::to_string(res->status));

  std::size_t dim = 0;
  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto& data = body.at("data");
    if (data.size() != nonempty.size()) throw ProviderError("embedding endpoint returned a short batch");
    for (std::size_t k = 0; k < data.size(); ++k) {
      const std::size_t slot = data[k].contains("index") ? data[k]["index"].get<std::size_t>() : k;
      if (slot >= nonempty.size()) throw ProviderError("embedding index out of range");
      auto values = data[k].at("embedding").get<std::vector<double>>();
      for (double v : values)
        if (!std::isfinite(v)) throw ProviderError("embedding contains a non-finite value");
      l2_normalize(values);
      if (dim == 0) dim = values.size();
      if (values.size() != dim) throw ProviderError("embedding dimensions differ within a batch");
      out[nonempty[slot]].values = std::move(values);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed embedding response: ") + e.what());
  }
  for (auto& v : out)
    if (v.values.empty()) v.values.assign(dim, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Named entities
// ---------------------------------------------------------------------------

std::string_view to_string(EntityLabel label) noexcept {
  switch (label) {
    case EntityLabel::geopolitical: return "geopolitical";
    case EntityLabel::location: return "location";
    case EntityLabel::facility: return "facility";
    case EntityLabel::organization: return "organization";
    case EntityLabel::person: return "person";
    case EntityLabel::other: return "other";
  }
  return "other";
}

EntityLabel entity_label_from_spacy(std::string_view spacy_label) noexcept {
  const std::string l = text::to_lower(spacy_label);
  if (l == "gpe") return EntityLabel::geopolitical;
  if (l == "loc") return EntityLabel::location;
  if (l == "fac") return EntityLabel::facility;
  if (l == "org") return EntityLabel::organization;
  if (l == "person" || l == "per") return EntityLabel::person;
  return EntityLabel::other;
}

namespace {

struct Token {
  std::string original;
  std::string norm;  // lowercased, trailing period dropped unless the token is dotted ("u.s.")
};

bool is_token_char(unsigned char c) {
  return std::isalnum(c) || c == '.' || c == '\'' || c == '-' || c == '&' || c >= 0x80;
}

std::string normalize_token(std::string_view raw) {
  std::string t = text::to_lower(raw);
  while (!t.empty() && (t.front() == '.' || t.front() == '-' || t.front() == '\'')) t.erase(t.begin());
  if (!t.empty() && t.back() == '.') {
    const bool dotted = t.find('.') < t.size() - 1;
    if (!dotted) t.pop_back();
  }
  while (!t.empty() && (t.back() == '-' || t.back() == '\'')) t.pop_back();
  return t;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_token_char(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && is_token_char(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      Token t{std::string(s.substr(i, j - i)), normalize_token(s.substr(i, j - i))};
      if (!t.norm.empty()) out.push_back(std::move(t));
    }
    i = j;
  }
  return out;
}

std::string normalize_phrase(std::string_view phrase) {
  std::vector<std::string> parts;
  for (auto& t : tokenize(phrase)) parts.push_back(t.norm);
  return text::join(parts, " ");
}

bool is_capitalized(const Token& t) {
  return !t.original.empty() && std::isupper(static_cast<unsigned char>(t.original.front()));
}

bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

const std::set<std::string>& span_stopwords() {
  static const std::set<std::string> kStop = {
      "the", "a", "an", "on", "in", "at", "his", "her", "their", "this", "that", "these", "those",
      "it", "he", "she", "we", "they", "but", "and", "or", "as", "after", "before", "when", "while",
      "if", "for", "to", "of", "by", "with", "from", "its", "our", "my", "i", "no", "not", "so"};
  return kStop;
}

const std::set<std::string>& span_connectors() {
  static const std::set<std::string> kConn = {"of", "the", "and", "de", "al", "for"};
  return kConn;
}

}  // namespace

Gazetteer Gazetteer::parse(std::string_view tsv) {
  Gazetteer g;
  std::size_t line_no = 0;
  std::istringstream in{std::string(tsv)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string_view::npos) throw ParseError("<gazetteer>", line_no, "expected <kind>\\t<phrase>");
    const std::string kind(text::trim(trimmed.substr(0, tab)));
    const std::string phrase = normalize_phrase(trimmed.substr(tab + 1));
    if (phrase.empty()) continue;
    if (kind == "gpe") g.phrases.emplace(phrase, EntityLabel::geopolitical);
    else if (kind == "loc") g.phrases.emplace(phrase, EntityLabel::location);
    else if (kind == "fac") g.phrases.emplace(phrase, EntityLabel::facility);
    else if (kind == "org") g.phrases.emplace(phrase, EntityLabel::organization);
    else if (kind == "person") g.phrases.emplace(phrase, EntityLabel::person);
    else if (kind == "org_suffix") g.org_suffixes.push_back(phrase);
    else if (kind == "loc_head") g.location_heads.push_back(phrase);
    else if (kind == "fac_head") g.facility_heads.push_back(phrase);
    else if (kind == "person_title") g.person_titles.push_back(phrase);
    else throw ParseError("<gazetteer>", line_no, "unknown kind '" + kind + "'");
  }
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gazetteer " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Gazetteer& Gazetteer::builtin() {
  static const Gazetteer kBuiltin = parse(embedded::kGazetteer);
  return kBuiltin;
}

GazetteerNer::GazetteerNer() : GazetteerNer(Gazetteer::builtin()) {}

GazetteerNer::GazetteerNer(Gazetteer gazetteer) : gaz_(std::move(gazetteer)) {
  for (const auto& [phrase, label] : gaz_.phrases)
    max_phrase_tokens_ = std::max<std::size_t>(max_phrase_tokens_, text::split_whitespace(phrase).size());
}

std::vector<EntityMention> GazetteerNer::extract(std::string_view input) {
  const auto toks = tokenize(input);
  std::vector<EntityMention> out;
  auto joined = [&](std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t k = from; k < to; ++k) {
      if (k > from) s += ' ';
      s += toks[k].norm;
    }
    return s;
  };
  auto preceded_by_title = [&](std::size_t start) {
    for (std::size_t len = 1; len <= 2 && len <= start; ++len)
      if (contains(gaz_.person_titles, joined(start - len, start))) return true;
    return false;
  };

  std::size_t i = 0;
  while (i < toks.size()) {
    // 1. Longest gazetteer phrase.
    bool matched = false;
    for (std::size_t len = std::min(max_phrase_tokens_, toks.size() - i); len >= 1; --len) {
      auto it = gaz_.phrases.find(joined(i, i + len));
      if (it != gaz_.phrases.end()) {
        out.push_back({it->first, it->second});
        i += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;

    // 2. Maximal capitalised span, connectors allowed between capitalised tokens.
    if (!is_capitalized(toks[i])) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < toks.size()) {
      if (is_capitalized(toks[end]) && !gaz_.phrases.count(toks[end].norm)) {
        ++end;
      } else if (span_connectors().count(toks[end].norm) && end + 1 < toks.size() &&
                 is_capitalized(toks[end + 1])) {
        end += 2;
      } else {
        break;
      }
    }
    std::size_t start = i;
    while (start < end && span_stopwords().count(toks[start].norm)) ++start;
    if (start == end) {
      i = end;
      continue;
    }

    // A title inside the span ("Yesterday Mr. Smith") starts a person name.
    bool titled = preceded_by_title(start);
    for (std::size_t p = start; p < end; ++p)
      for (std::size_t len = 2; len >= 1; --len)
        if (p + len < end && contains(gaz_.person_titles, joined(p, p + len))) {
          start = p + len;
          titled = true;
          break;
        }

    EntityLabel label = EntityLabel::other;
    std::size_t stop = end;
    const std::string& last = toks[end - 1].norm;
    if (end < toks.size() && !is_capitalized(toks[end]) && contains(gaz_.location_heads, toks[end].norm)) {
      label = EntityLabel::location;
      stop = end + 1;
    } else if (contains(gaz_.org_suffixes, last)) {
      label = EntityLabel::organization;
    } else if (contains(gaz_.location_heads, last)) {
      label = EntityLabel::location;
    } else if (contains(gaz_.facility_heads, last)) {
      label = EntityLabel::facility;
    } else if (titled) {
      label = EntityLabel::person;
    }
    out.push_back({joined(start, stop), label});
    i = stop;
  }
  return out;
}

HttpNer::HttpNer(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) { http::parse_url(endpoint_.url); }

std::vector<EntityMention> HttpNer::extract(std::string_view input) {
  if (text::is_blank(input)) return {};
  nlohmann::json req{{"text", std::string(input)}};
  std::string err;
  auto res = http::post_json(endpoint_.url, req.dump(), endpoint_.api_key, endpoint_.timeout_seconds, err);
  if (!res) throw ProviderError("NER request failed: " + err);
  if (res->status != 200) throw ProviderError("NER endpoint returned HTTP " + std::to_string(res->status));
  std::vector<EntityMention> out;
  try {
    auto body = nlohmann::json::parse(res->body);
    const auto& ents = body.is_array() ? body : body.at("entities");
    for (const auto& e : ents) {
      auto surface = text::collapse_whitespace(text::to_lower(e.at("text").get<std::string>()));
      if (surface.empty()) continue;
      out.push_back({std::move(surface), entity_label_from_spacy(e.at("label").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed NER response: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concepts
// ---------------------------------------------------------------------------

std::vector<std::string> normalize_concepts(const std::vector<std::string>& raw, std::size_t k) {
  std::vector<std::string> out;
  for (const auto& c : raw) {
    if (out.size() >= k) break;
    auto norm = text::collapse_whitespace(text::to_lower(c));
    if (norm.empty() || contains(out, norm)) continue;
    out.push_back(std::move(norm));
  }
  return out;
}

FixtureConcepts::FixtureConcepts(std::map<std::string, std::vector<std::string>> table) {
  for (auto& [term, concepts] : table)
    table_[text::collapse_whitespace(text::to_lower(term))] = std::move(concepts);
}

FixtureConcepts FixtureConcepts::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open concept fixtures " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    return FixtureConcepts(j.get<std::map<std::string, std::vector<std::string>>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed concept fixtures " + path.string() + ": " + e.what());
  }
}

ConceptSet FixtureConcepts::neighbors(const std::string& term, std::size_t k) {
  if (k == 0) throw std::invalid_argument("concept k must be > 0");
  ConceptSet out{text::collapse_whitespace(text::to_lower(term)), {}};
  if (auto it = table_.find(out.term); it != table_.end()) out.concepts = normalize_concepts(it->second, k);
  return out;
}

ConceptNetClient::ConceptNetClient(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  http::parse_url(base_url_);
}

ConceptSet ConceptNetClient::neighbors(const std::string& term, std::size_t k) {
  if (k == 0) throw std::invalid_argument("concept k must be > 0");
  ConceptSet out{text::collapse_whitespace(text::to_lower(term)), {}};
  if (out.term.empty()) return out;
  const std::string node = text::replace_all(out.term, " ", "_");
  const std::string node_id = "/c/en/" + node;
  const std::string url = base_url_ + "/c/en/" + http::url_encode_path_segment(node) +
                          "?limit=" + std::to_string(std::max<std::size_t>(50, k * 10));
  std::string err;
  auto res = http::get(url, timeout_seconds_, err);
  if (!res) throw ProviderError("ConceptNet request failed: " + err);
  if (res->status == 404) return out;
  if (res->status != 200) throw ProviderError("ConceptNet returned HTTP " + std::to_string(res->status));

  struct Hit {
    std::string label;
    double weight;
  };
  std::vector<Hit> hits;
  try {
    auto body = nlohmann::json::parse(res->body);
    if (!body.contains("edges")) return out;
    for (const auto& edge : body["edges"]) {
      const auto& start = edge.at("start");
      const auto& end = edge.at("end");
      const std::string start_id = start.value("@id", "");
      const bool start_is_term = start_id == node_id || start_id.rfind(node_id + "/", 0) == 0;
      const auto& other = start_is_term ? end : start;
      if (other.value("language", "en") != "en") continue;
      std::string label = text::to_lower(other.value("label", ""));
      if (label.empty() || label == out.term) continue;
      hits.push_back({std::move(label), edge.value("weight", 0.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed ConceptNet response: ") + e.what());
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.weight > b.weight; });
  std::vector<std::string> labels;
  for (auto& h : hits) labels.push_back(std::move(h.label));
  out.concepts = normalize_concepts(labels, k);
  return out;
}

ConceptSet CachingConceptProvider::neighbors(const std::string& term, std::size_t k) {
  const auto key = std::make_pair(text::collapse_whitespace(text::to_lower(term)), k);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  ++upstream_calls_;
  ConceptSet fresh = inner_.neighbors(term, k);
  std::lock_guard lock(mu_);
  return memo_.try_emplace(key, std::move(fresh)).first->second;
}

}  // namespace fans
