#include "fans/matchers.hpp"

#include <random>

#include <gtest/gtest.h>

#include "fans/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fans;

namespace {

FacetSet when_set(std::vector<std::string> items) {
  FacetSet fs;
  fs.when = std::move(items);
  return fs;
}

std::set<std::string> labels(const std::set<TimeToken>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) out.insert(std::string(to_string(t.kind)) + ":" + t.surface);
  return out;
}

std::set<std::string> tokens_of(std::vector<std::string> items, DateOrder order = DateOrder::mdy) {
  return labels(extract_time_mentions(items, order));
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

std::string random_phrase(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab = {"north", "river", "council", "state", "union", "port",
                                                 "new",   "york",  "mr.",     "smith", "army",  "bank"};
  std::string s;
  const auto n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
  return s;
}

}  // namespace

TEST(FuzzyRatio, IdenticalStringsScoreOne) { EXPECT_EQ(fuzzy_ratio("president trump", "president trump"), 1.0); }

TEST(FuzzyRatio, DisjointCharactersScoreZero) { EXPECT_EQ(fuzzy_ratio("abc", "xyz"), 0.0); }

TEST(FuzzyRatio, BothEmptyIsIdentical) {
  EXPECT_EQ(fuzzy_ratio("", ""), 1.0);
  EXPECT_EQ(fuzzy_ratio("", "abc"), 0.0);
}

TEST(FuzzyRatio, CaseInsensitive) { EXPECT_EQ(fuzzy_ratio("Mr. Netanyahu", "mr. netanyahu"), 1.0); }

TEST(FuzzyRatio, TokenSetBeatsPlainRatioForSubsetNames) {
  const std::string a = "mr. netanyahu";
  const std::string b = "israeli prime minister benjamin netanyahu";
  // Intersection "netanyahu" (9 chars) is a subsequence of "netanyahu mr." (13 chars).
  const double expected = 2.0 * 9 / (9 + 13);
  EXPECT_DOUBLE_EQ(fuzzy_ratio(a, b), expected);
  EXPECT_GT(fuzzy_ratio(a, b), normalized_similarity(a, b));
  EXPECT_GE(fuzzy_ratio(a, b), 0.8);
}

TEST(FuzzyRatio, NormalizedSimilarityFromLcs) {
  // LCS("kitten", "sitting") = 4 ("ittn").
  EXPECT_DOUBLE_EQ(normalized_similarity("kitten", "sitting"), 8.0 / 13.0);
}

TEST(FuzzyRatio, SymmetricAndBounded) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_phrase(rng);
    const auto b = random_phrase(rng);
    const double ab = fuzzy_ratio(a, b);
    EXPECT_EQ(ab, fuzzy_ratio(b, a)) << a << " / " << b;
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(MatchEntitySets, IdenticalSetsScoreOne) {
  StubEmbedder emb;
  const std::vector<std::string> a = {"president trump", "israel"};
  const auto r = match_entity_sets(a, a, {}, emb);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(r.matched.size(), 2u);
}

TEST(MatchEntitySets, DisjointSetsScoreZero) {
  StubEmbedder emb;
  const std::vector<std::string> a = {"qwerty"}, b = {"zxcvb"};
  const auto r = match_entity_sets(a, b, {}, emb);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.unmatched_a, a);
  EXPECT_EQ(r.unmatched_b, b);
}

TEST(MatchEntitySets, EmptySides) {
  StubEmbedder emb;
  const std::vector<std::string> none, one = {"israel"};
  EXPECT_EQ(match_entity_sets(none, none, {}, emb).f1, 1.0);
  EXPECT_EQ(match_entity_sets(none, one, {}, emb).f1, 0.0);
  EXPECT_EQ(match_entity_sets(one, none, {}, emb).f1, 0.0);
}

TEST(MatchEntitySets, TableOneWhoPair) {
  StubEmbedder emb;
  const std::vector<std::string> left = {"president trump", "u.s. diplomats", "israeli prime minister benjamin netanyahu",
                                         "palestinians"};
  const std::vector<std::string> right = {"president trump", "israel", "united arab emirates", "mr. netanyahu"};
  const auto r = match_entity_sets(left, right, {}, emb);
  ASSERT_EQ(r.matched.size(), 2u);
  EXPECT_EQ(r.f1, 0.5);
  EXPECT_EQ(r.matched[0].a, "president trump");
  EXPECT_EQ(r.matched[1].b, "mr. netanyahu");
  EXPECT_EQ(r.matched[1].method, MatchMethod::fuzzy);
}

TEST(MatchEntitySets, DeduplicatesItems) {
  StubEmbedder emb;
  const std::vector<std::string> a = {"Israel", "israel"}, b = {"israel"};
  EXPECT_EQ(match_entity_sets(a, b, {}, emb).f1, 1.0);
}

TEST(MatchEntitySets, AugmentingPathRecoversBlockedMatch) {
  // a1-b1 is the best edge, but taking it greedily leaves a2 without a partner.
  FixtureConcepts concepts({{"kettle", {"xenon", "yarrow"}}, {"marble", {"xenon"}},
                            {"zephyr", {"xenon", "yarrow"}}, {"lantern", {"yarrow"}}});
  StubEmbedder emb;
  const std::vector<std::string> a = {"kettle", "marble"}, b = {"zephyr", "lantern"};
  const auto r = match_entity_sets(a, b, {}, emb, &concepts);
  EXPECT_EQ(r.matched.size(), 2u);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(MatchEntitySets, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(5);
  StubEmbedder emb;
  const EntityMatchOptions opts;
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> a, b;
    for (std::size_t i = rng() % 6; i > 0; --i) {
      auto p = random_phrase(rng);
      if (std::find(a.begin(), a.end(), p) == a.end()) a.push_back(p);
    }
    for (std::size_t i = rng() % 6; i > 0; --i) {
      auto p = random_phrase(rng);
      if (std::find(b.begin(), b.end(), p) == b.end()) b.push_back(p);
    }
    std::vector<std::vector<bool>> adj(a.size(), std::vector<bool>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        adj[i][j] = decide_pair(a[i], b[j], stub_embed(a[i]), stub_embed(b[j]), nullptr, nullptr, opts).matched;
    const auto m = fans::testing::brute_force_max_matching(adj);
    const auto r = match_entity_sets(a, b, opts, emb);
    EXPECT_EQ(r.matched.size(), m);
    EXPECT_EQ(r.f1, overlap_f1(m, a.size(), b.size()));
    EXPECT_EQ(r.f1, match_entity_sets(b, a, opts, emb).f1);
  }
}

TEST(TimeMentions, TableOneLeftWhen) {
  EXPECT_EQ(tokens_of({"Thursday", "1967", "August 13"}),
            (std::set<std::string>{"day:thursday", "year:1967", "month_day:august 13"}));
}

TEST(TimeMentions, ProseYieldsNothing) { EXPECT_TRUE(tokens_of({"some prose"}).empty()); }

TEST(TimeMentions, NumericDates) {
  EXPECT_EQ(tokens_of({"03/04/2020"}), std::set<std::string>{"date:2020-03-04"});
  EXPECT_EQ(tokens_of({"03/04/2020"}, DateOrder::dmy), std::set<std::string>{"date:2020-04-03"});
  EXPECT_EQ(tokens_of({"25/12/2020"}), std::set<std::string>{"date:2020-12-25"});
  EXPECT_EQ(tokens_of({"12-25-2020"}), std::set<std::string>{"date:2020-12-25"});
  EXPECT_EQ(tokens_of({"2020-08-13"}), std::set<std::string>{"date:2020-08-13"});
  EXPECT_EQ(tokens_of({"13/13/2020"}), std::set<std::string>{"year:2020"});
}

TEST(TimeMentions, DaysMonthsAndDayparts) {
  EXPECT_EQ(tokens_of({"Monday morning"}), (std::set<std::string>{"day:monday", "daypart:morning"}));
  EXPECT_EQ(tokens_of({"SUNDAY NIGHT"}), (std::set<std::string>{"day:sunday", "daypart:night"}));
  EXPECT_EQ(tokens_of({"Aug"}), std::set<std::string>{"month:august"});
  EXPECT_EQ(tokens_of({"in September"}), std::set<std::string>{"month:september"});
  EXPECT_EQ(tokens_of({"late afternoon", "evening"}), (std::set<std::string>{"daypart:afternoon", "daypart:evening"}));
  EXPECT_EQ(tokens_of({"May"}), std::set<std::string>{"month:may"});
  EXPECT_TRUE(tokens_of({"talks may resume"}).empty());
  EXPECT_EQ(tokens_of({"May 2019"}), (std::set<std::string>{"month:may", "year:2019"}));
}

TEST(TimeMentions, MonthDayForms) {
  EXPECT_EQ(tokens_of({"August 13, 2020"}), (std::set<std::string>{"month_day:august 13", "year:2020"}));
  EXPECT_EQ(tokens_of({"Sept. 3rd"}), std::set<std::string>{"month_day:september 3"});
  EXPECT_EQ(tokens_of({"13 August"}), std::set<std::string>{"month_day:august 13"});
}

TEST(TimeMentions, ClockTimes) {
  EXPECT_EQ(tokens_of({"3 PM"}), std::set<std::string>{"clock:3:00 pm"});
  EXPECT_EQ(tokens_of({"3:30 p.m."}), std::set<std::string>{"clock:3:30 pm"});
  EXPECT_EQ(tokens_of({"10am"}), std::set<std::string>{"clock:10:00 am"});
  EXPECT_EQ(tokens_of({"8:30 a.m. Friday"}), (std::set<std::string>{"clock:8:30 am", "day:friday"}));
  EXPECT_TRUE(tokens_of({"13 pm"}).empty());
}

TEST(TimeMentions, YearsOnlyInRange) {
  EXPECT_EQ(tokens_of({"1967"}), std::set<std::string>{"year:1967"});
  EXPECT_TRUE(tokens_of({"999", "3000", "12345"}).empty());
}

TEST(ScoreWhen, TableOnePair) {
  const auto r = score_when(when_set({"Thursday", "1967", "August 13"}), when_set({"Thursday"}));
  EXPECT_NEAR(r.f1, 0.5, 1e-12);
  ASSERT_EQ(r.matched.size(), 1u);
  EXPECT_EQ(r.matched[0].a, "day:thursday");
}

TEST(ScoreWhen, IdenticalAndDisjoint) {
  EXPECT_EQ(score_when(when_set({"Monday"}), when_set({"monday"})).f1, 1.0);
  EXPECT_EQ(score_when(when_set({"Monday"}), when_set({"Tuesday"})).f1, 0.0);
  EXPECT_EQ(score_when(when_set({}), when_set({})).f1, 1.0);
  EXPECT_EQ(score_when(when_set({"Monday"}), when_set({"no time given"})).f1, 0.0);
}

TEST(ScoreWhen, InvariantUnderReorderingAndCase) {
  const auto a = when_set({"Thursday", "1967", "August 13"});
  const auto b = when_set({"AUGUST 13", "thursday", "1967"});
  EXPECT_EQ(score_when(a, b).f1, 1.0);
}

TEST(ScoreWhere, TableOnePairWithConcepts) {
  auto concepts = FixtureConcepts::load(fans::testing::fixture_path("concepts.json"));
  StubEmbedder emb;
  GazetteerNer ner;
  FacetSet left, right;
  left.where = {"arab lands", "israel"};
  left.where_text = "Arab lands, Israel";
  right.where = {"middle east"};
  right.where_text = "Middle East";
  const auto r = score_where(left, right, MatchConfig{}, emb, ner, &concepts);
  ASSERT_EQ(r.matched.size(), 1u);
  EXPECT_EQ(r.matched[0].a, "israel");
  EXPECT_EQ(r.matched[0].method, MatchMethod::concept_net);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
}

TEST(ScoreWhere, TrivialCases) {
  StubEmbedder emb;
  GazetteerNer ner;
  FacetSet a, b, empty;
  a.where = b.where = {"middle east"};
  EXPECT_EQ(score_where(a, b, {}, emb, ner, nullptr).f1, 1.0);
  EXPECT_EQ(score_where(a, empty, {}, emb, ner, nullptr).f1, 0.0);
}

TEST(ScoreWhere, NerAddsLocationsFromWhereText) {
  GazetteerNer ner;
  FacetSet fs;
  fs.where = {"a rally near the capitol in washington"};
  fs.where_text = "A rally near the Capitol in Washington";
  const auto set = location_set(fs, ner);
  EXPECT_NE(std::find(set.begin(), set.end(), "washington"), set.end());
  EXPECT_EQ(set.front(), "a rally near the capitol in washington");
}

TEST(SplitSentences, TerminatorsAndAbbreviations) {
  const auto s = split_sentences("Mr. Smith went to Washington. He met Dr. Jones! Did it work? Yes.");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "Mr. Smith went to Washington.");
  EXPECT_EQ(s[1], "He met Dr. Jones!");
  EXPECT_EQ(split_sentences("The U.S. Army left the base.").size(), 1u);
  EXPECT_EQ(split_sentences("J. R. Smith spoke.").size(), 1u);
  EXPECT_EQ(split_sentences("Version 3.5 shipped. Done").size(), 2u);
  EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(SemF1, IdenticalTextsScoreOne) {
  StubEmbedder emb;
  EXPECT_EQ(sem_f1("Talks resumed. Both sides agreed.", "Talks resumed. Both sides agreed.", emb).f1, 1.0);
}

TEST(SemF1, OrthogonalSentencesScoreZero) {
  StubEmbedder emb(1 << 16);
  const std::string a = "Abc.", b = "Xyz!";
  ASSERT_EQ(dot(stub_embed(a, 1 << 16), stub_embed(b, 1 << 16)), 0.0);
  EXPECT_EQ(sem_f1(a, b, emb).f1, 0.0);
}

TEST(SemF1, ExtraUnrelatedSentenceHalvesRecall) {
  StubEmbedder emb(1 << 16);
  const std::string s = "Troops withdrew.", u = "Markets rallied.";
  ASSERT_EQ(dot(stub_embed(s, 1 << 16), stub_embed(u, 1 << 16)), 0.0);
  const auto r = sem_f1(s, s + " " + u, emb);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
  EXPECT_EQ(r.unmatched_b, std::vector<std::string>{u});
}

TEST(SemF1, EmptyTexts) {
  StubEmbedder emb;
  EXPECT_EQ(sem_f1("", "", emb).f1, 1.0);
  EXPECT_EQ(sem_f1("", "Something happened.", emb).f1, 0.0);
}

TEST(SemF1, Symmetric) {
  StubEmbedder emb;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    std::string a, b;
    for (std::size_t k = 1 + rng() % 3; k > 0; --k) a += random_phrase(rng) + ". ";
    for (std::size_t k = 1 + rng() % 3; k > 0; --k) b += random_phrase(rng) + ". ";
    const auto ab = sem_f1(a, b, emb), ba = sem_f1(b, a, emb);
    EXPECT_EQ(ab.f1, ba.f1);
    EXPECT_EQ(ab.precision, ba.recall);
  }
}

TEST(MatchConfigValidation, RejectsOutOfRangeValues) {
  MatchConfig ok;
  EXPECT_NO_THROW(ok.validate());
  MatchConfig bad = ok;
  bad.fuzzy_threshold = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ok;
  bad.embed_threshold = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ok;
  bad.concept_k = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(MatchResultJson, StableKeys) {
  StubEmbedder emb;
  const std::vector<std::string> a = {"israel"};
  const auto j = to_json(match_entity_sets(a, a, {}, emb));
  EXPECT_EQ(j.dump(),
            R"({"precision":1.0,"recall":1.0,"f1":1.0,"matched":[{"a":"israel","b":"israel","method":"fuzzy","score":1.0}],"unmatched_a":[],"unmatched_b":[]})");
}
