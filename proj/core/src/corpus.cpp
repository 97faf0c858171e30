#include "fans/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "fans/errors.hpp"
#include "fans/text.hpp"

namespace fans {

std::string_view to_string(Leaning l) noexcept {
  switch (l) {
    case Leaning::left: return "left";
    case Leaning::right: return "right";
    case Leaning::center: return "center";
    case Leaning::theme: return "theme";
  }
  return "?";
}

std::optional<Leaning> parse_leaning(std::string_view s) noexcept {
  const std::string v = text::to_lower(text::trim(s));
  if (v == "left") return Leaning::left;
  if (v == "right") return Leaning::right;
  if (v == "center" || v == "centre") return Leaning::center;
  if (v == "theme") return Leaning::theme;
  return std::nullopt;
}

std::string Narrative::payload() const {
  if (title.empty()) return body;
  return title + "\n" + body;
}

Corpus Corpus::from_narratives(std::vector<Narrative> narratives) {
  Corpus c;
  c.narratives_ = std::move(narratives);
  std::map<std::string, std::string> topic_group_of;
  std::map<std::string, std::string> topic_of_event;
  std::set<std::pair<std::string, Leaning>> event_leanings;

  for (std::size_t i = 0; i < c.narratives_.size(); ++i) {
    const Narrative& n = c.narratives_[i];
    if (n.id.empty()) throw CorpusError("narrative #" + std::to_string(i) + " has an empty id");
    if (text::is_blank(n.body)) throw CorpusError("narrative '" + n.id + "' has an empty body");
    if (n.event_id.empty() || n.topic.empty() || n.topic_group.empty())
      throw CorpusError("narrative '" + n.id + "' has a dangling event/topic/topic_group");
    if (!c.by_id_.emplace(n.id, i).second) throw CorpusError("duplicate narrative id '" + n.id + "'");
    if (!event_leanings.emplace(n.event_id, n.leaning).second)
      throw CorpusError("event '" + n.event_id + "' has more than one '" +
                        std::string(to_string(n.leaning)) + "' narrative");

    auto [tg, tg_new] = topic_group_of.emplace(n.topic, n.topic_group);
    if (!tg_new && tg->second != n.topic_group)
      throw CorpusError("topic '" + n.topic + "' appears under topic groups '" + tg->second +
                        "' and '" + n.topic_group + "'");
    auto [te, te_new] = topic_of_event.emplace(n.event_id, n.topic);
    if (!te_new && te->second != n.topic)
      throw CorpusError("event '" + n.event_id + "' appears under topics '" + te->second + "' and '" +
                        n.topic + "'");

    auto& members = c.event_members_[n.event_id];
    members.push_back(i);
    if (te_new) c.topic_events_[n.topic].push_back(n.event_id);
    if (tg_new) c.group_topics_[n.topic_group].push_back(n.topic);
  }
  return c;
}

const Narrative* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &narratives_[it->second];
}

const Narrative& Corpus::at(std::string_view id) const {
  if (const Narrative* n = find(id)) return *n;
  throw CorpusError("unknown narrative id '" + std::string(id) + "'");
}

std::vector<const Narrative*> Corpus::narratives_of_event(const std::string& event_id) const {
  std::vector<const Narrative*> out;
  if (auto it = event_members_.find(event_id); it != event_members_.end())
    for (std::size_t i : it->second) out.push_back(&narratives_[i]);
  return out;
}

const std::vector<std::string>& Corpus::events_of_topic(const std::string& topic) const {
  static const std::vector<std::string> kEmpty;
  auto it = topic_events_.find(topic);
  return it == topic_events_.end() ? kEmpty : it->second;
}

const std::vector<std::string>& Corpus::topics_of_group(const std::string& topic_group) const {
  static const std::vector<std::string> kEmpty;
  auto it = group_topics_.find(topic_group);
  return it == group_topics_.end() ? kEmpty : it->second;
}

namespace {

std::string required_string(const nlohmann::json& rec, const char* key, const std::string& source,
                            std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null())
    throw ParseError(source, line, std::string("missing required field '") + key + "'");
  if (!it->is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  std::vector<Narrative> narratives;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(source_name, line_no, "record must be a JSON object");

    Narrative n;
    n.id = required_string(rec, "id", source_name, line_no);
    n.title = rec.contains("title") ? required_string(rec, "title", source_name, line_no) : "";
    n.body = required_string(rec, "body", source_name, line_no);
    const std::string leaning = required_string(rec, "leaning", source_name, line_no);
    auto parsed = parse_leaning(leaning);
    if (!parsed) throw ParseError(source_name, line_no, "unknown leaning '" + leaning + "'");
    n.leaning = *parsed;
    n.event_id = required_string(rec, "event_id", source_name, line_no);
    n.topic = required_string(rec, "topic", source_name, line_no);
    n.topic_group = required_string(rec, "topic_group", source_name, line_no);
    narratives.push_back(std::move(n));
  }
  return Corpus::from_narratives(std::move(narratives));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

PairKey make_pair_key(std::string_view a, std::string_view b) {
  if (a == b) throw std::invalid_argument("pair needs two distinct narrative ids");
  if (b < a) std::swap(a, b);
  return PairKey{std::string(a), std::string(b)};
}

int assign_label(const Narrative& a, const Narrative& b) {
  if (a.event_id == b.event_id) return 3;
  if (a.topic == b.topic) return 2;
  if (a.topic_group == b.topic_group) return 1;
  return 0;
}

std::size_t PairSample::count(int label) const {
  return static_cast<std::size_t>(std::count_if(labeled_pairs.begin(), labeled_pairs.end(),
                                                [label](const LabeledPair& p) { return p.label == label; }));
}

std::optional<int> PairSample::label_of(const PairKey& pair) const {
  for (const auto& lp : labeled_pairs)
    if (lp.pair == pair) return lp.label;
  return std::nullopt;
}

namespace {

// Unbiased bounded draw from raw mt19937_64 output; std::uniform_int_distribution
// is implementation-defined and would make samples differ across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

PairSample sample_pairs(const Corpus& corpus, std::size_t per_label_cap, std::uint64_t seed) {
  if (per_label_cap == 0) throw std::invalid_argument("per_label_cap must be > 0");
  PairSample sample;
  sample.sampling_seed = seed;
  sample.per_label_cap = per_label_cap;

  const auto& ns = corpus.narratives();
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, 4> buckets;
  for (std::uint32_t i = 0; i < ns.size(); ++i)
    for (std::uint32_t j = i + 1; j < ns.size(); ++j)
      buckets[static_cast<std::size_t>(assign_label(ns[i], ns[j]))].emplace_back(i, j);

  std::mt19937_64 rng(seed);
  for (int label = 3; label >= 0; --label) {
    auto& bucket = buckets[static_cast<std::size_t>(label)];
    const std::size_t take = std::min(per_label_cap, bucket.size());
    if (take < bucket.size()) {
      // Partial Fisher-Yates: the first `take` slots end up uniformly sampled.
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t r = k + bounded(rng, bucket.size() - k);
        std::swap(bucket[k], bucket[r]);
      }
    }
    std::vector<LabeledPair> chosen;
    chosen.reserve(take);
    for (std::size_t k = 0; k < take; ++k)
      chosen.push_back({make_pair_key(ns[bucket[k].first].id, ns[bucket[k].second].id), label});
    std::sort(chosen.begin(), chosen.end(),
              [](const LabeledPair& x, const LabeledPair& y) { return x.pair < y.pair; });
    sample.labeled_pairs.insert(sample.labeled_pairs.end(), chosen.begin(), chosen.end());
  }
  return sample;
}

PairSample label_pairs(const Corpus& corpus, const std::vector<PairKey>& pairs) {
  PairSample sample;
  sample.per_label_cap = pairs.size();
  for (const auto& p : pairs)
    sample.labeled_pairs.push_back({p, assign_label(corpus.at(p.first), corpus.at(p.second))});
  return sample;
}

}  // namespace fans
