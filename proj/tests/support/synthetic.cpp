#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "fans/matchers.hpp"
#include "fans/providers.hpp"

namespace fans::testing {

namespace {

constexpr std::array<const char*, 16> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                 "p", "r", "s", "t", "v", "z", "dr", "qu"};
constexpr std::array<const char*, 5> kVowels = {"a", "e", "i", "o", "u"};

constexpr std::array<const char*, 40> kFiller = {
    "the",    "report", "said",   "officials", "new",    "plan",    "after",   "week",    "many",   "people",
    "while",  "some",   "others", "argued",    "that",   "it",      "would",   "change",  "policy", "critics",
    "backed", "local",  "leaders", "called",   "move",   "major",   "step",    "public",  "debate", "sources",
    "noted",  "early",  "signs",  "support",   "strong", "concern", "remains", "future",  "vote",   "today"};

std::string syllable(std::mt19937_64& rng) {
  return std::string(kOnsets[rng() % kOnsets.size()]) + kVowels[rng() % kVowels.size()];
}

std::string word(std::mt19937_64& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) w += syllable(rng);
  w += kOnsets[rng() % 12];  // closing consonant
  return w;
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

/// Names whose pairwise fuzzy ratio and stub cosine stay well under the match thresholds.
class NamePool {
 public:
  NamePool(std::mt19937_64& rng, std::size_t dim, GazetteerNer& ner) : rng_(rng), dim_(dim), ner_(ner) {}

  std::string next() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      std::string candidate = word(rng_, 3);
      if (!ner_.extract(candidate).empty()) continue;
      const auto v = stub_embed(candidate, dim_);
      bool ok = true;
      for (std::size_t i = 0; i < names_.size() && ok; ++i)
        ok = fuzzy_ratio(candidate, names_[i]) < 0.7 && cosine(v, vecs_[i]) < 0.6;
      if (!ok) continue;
      names_.push_back(candidate);
      vecs_.push_back(v);
      return candidate;
    }
    throw std::runtime_error("name pool exhausted");
  }

 private:
  std::mt19937_64& rng_;
  std::size_t dim_;
  GazetteerNer& ner_;
  std::vector<std::string> names_;
  std::vector<EmbeddingVector> vecs_;
};

/// One-word sentences of random letters whose stub embeddings use pairwise
/// disjoint buckets, so any two distinct sentences have cosine exactly zero.
/// Random letters keep the trigram ending in the period from running out.
class SentencePool {
 public:
  SentencePool(std::mt19937_64& rng, std::size_t dim) : rng_(rng), dim_(dim) {}

  std::string next() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      std::string candidate;
      for (int k = 0; k < 6; ++k) candidate += static_cast<char>('a' + rng_() % 26);
      candidate = capitalized(candidate) + ".";
      if (split_sentences("Xy. " + candidate + " Zw.").size() != 3) continue;
      const auto v = stub_embed(candidate, dim_);
      std::vector<std::size_t> buckets;
      for (std::size_t i = 0; i < v.values.size(); ++i)
        if (v.values[i] != 0.0) buckets.push_back(i);
      if (std::any_of(buckets.begin(), buckets.end(), [&](std::size_t b) { return used_.count(b) > 0; })) continue;
      used_.insert(buckets.begin(), buckets.end());
      return candidate;
    }
    throw std::runtime_error("sentence pool exhausted");
  }

 private:
  std::mt19937_64& rng_;
  std::size_t dim_;
  std::set<std::size_t> used_;
};

struct Level {
  std::string who, where, what, why, how;
};

}  // namespace

SyntheticCorpus make_monotone_corpus(const MonotoneOptions& o) {
  std::mt19937_64 rng(o.seed);
  GazetteerNer ner;
  NamePool who_pool(rng, o.embed_dim, ner), where_pool(rng, o.embed_dim, ner);
  SentencePool what_pool(rng, o.embed_dim), why_pool(rng, o.embed_dim), how_pool(rng, o.embed_dim);
  auto make_level = [&] {
    return Level{capitalized(who_pool.next()), where_pool.next(), what_pool.next(), why_pool.next(), how_pool.next()};
  };

  SyntheticCorpus out;
  out.embed_dim = o.embed_dim;
  std::vector<Narrative> narratives;
  std::size_t event_counter = 0;
  for (std::size_t g = 0; g < o.groups; ++g) {
    const Level gl = make_level();
    const int year = 2001 + static_cast<int>(g);
    for (std::size_t t = 0; t < o.topics_per_group; ++t) {
      const Level tl = make_level();
      const std::string date = fmt::format("{:02d}/{:02d}/{}", t + 1, 10 + t, year);
      for (std::size_t e = 0; e < o.events_per_topic; ++e, ++event_counter) {
        const Level el = make_level();
        const std::string clock =
            fmt::format("{}:{:02d} pm", 1 + event_counter % 12, 5 * (event_counter / 12));
        const std::string event_id = fmt::format("g{}-t{}-e{}", g, t, e);
        for (Leaning leaning : kLeanings) {
          Narrative n;
          n.id = fmt::format("{}-{}", event_id, to_string(leaning));
          n.leaning = leaning;
          n.event_id = event_id;
          n.topic = fmt::format("g{}-t{}", g, t);
          n.topic_group = fmt::format("g{}", g);
          n.title = fmt::format("{} meets {}", el.who, tl.who);

          std::vector<std::string> words;
          for (const auto* item : {&gl.who, &tl.who, &el.who, &gl.where, &tl.where, &el.where}) words.push_back(*item);
          for (const auto* s : {&gl.what, &tl.what, &el.what, &gl.why, &tl.why, &el.why, &gl.how, &tl.how, &el.how})
            words.push_back(s->substr(0, s->size() - 1));
          for (std::size_t k = 0; k < o.filler_words; ++k) words.push_back(kFiller[rng() % kFiller.size()]);
          std::shuffle(words.begin(), words.end(), rng);
          std::string body;
          for (const auto& w : words) body += (body.empty() ? "" : " ") + w;
          n.body = body + fmt::format(". It happened on {} at {}.", date, clock);

          out.transcripts[n.id] = fmt::format(
              "Who: {}, {}, {}\nWhen: {}, {}, {}\nWhere: {}, {}, {}\nWhat: {} {} {}\nWhy: {} {} {}\nHow: {} {} {}\n",
              gl.who, tl.who, el.who, year, date, clock, gl.where, tl.where, el.where, gl.what, tl.what, el.what,
              gl.why, tl.why, el.why, gl.how, tl.how, el.how);
          narratives.push_back(std::move(n));
        }
      }
    }
  }
  out.corpus = Corpus::from_narratives(std::move(narratives));
  return out;
}

SyntheticCorpus make_stats_corpus(std::size_t events, const std::map<Leaning, std::size_t>& failures) {
  SyntheticCorpus out;
  std::vector<Narrative> narratives;
  std::map<Leaning, std::size_t> planted;
  for (std::size_t e = 0; e < events; ++e) {
    for (Leaning leaning : kLeanings) {
      Narrative n;
      n.id = fmt::format("ev{:04d}-{}", e, to_string(leaning));
      n.leaning = leaning;
      n.event_id = fmt::format("ev{:04d}", e);
      n.topic = fmt::format("topic{:02d}", e / 10);
      n.topic_group = fmt::format("group{}", e / 40);
      n.title = fmt::format("Event {}", e);
      n.body = fmt::format("Officials met on Monday in Springfield to discuss item {} ({} view).", e,
                           to_string(leaning));
      const auto it = failures.find(leaning);
      const std::size_t want = it == failures.end() ? 0 : it->second;
      // Spread planted refusals across the corpus rather than at the front.
      const bool fail = planted[leaning] < want && (e * want) / events != ((e + 1) * want) / events;
      if (fail) {
        ++planted[leaning];
        out.transcripts[n.id] = "I'm sorry, I can't help you with that.";
      } else {
        out.transcripts[n.id] = fmt::format(
            "Who: Officials\nWhen: Monday\nWhere: Springfield\nWhat: Officials discussed item {}.\n"
            "Why: The item was due.\nHow: In a public meeting.\n",
            e);
      }
      narratives.push_back(std::move(n));
    }
  }
  out.corpus = Corpus::from_narratives(std::move(narratives));
  return out;
}

}  // namespace fans::testing
