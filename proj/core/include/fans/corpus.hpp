#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fans {

enum class Leaning { left, right, center, theme };

inline constexpr std::array<Leaning, 4> kLeanings = {Leaning::left, Leaning::right, Leaning::center, Leaning::theme};

std::string_view to_string(Leaning l) noexcept;
std::optional<Leaning> parse_leaning(std::string_view s) noexcept;

struct Narrative {
  std::string id;
  std::string title;
  std::string body;
  Leaning leaning = Leaning::theme;
  std::string event_id;
  std::string topic;
  std::string topic_group;

  /// Text handed to the extractor and to the baselines: title, newline, body.
  std::string payload() const;
};

/// Immutable, validated collection of narratives plus the
/// topic_group -> topic -> event -> narrative hierarchy.
class Corpus {
 public:
  Corpus() = default;

  /// Validates ids, bodies, (event, leaning) uniqueness and hierarchy
  /// consistency. Throws CorpusError.
  static Corpus from_narratives(std::vector<Narrative> narratives);

  const std::vector<Narrative>& narratives() const noexcept { return narratives_; }
  std::size_t size() const noexcept { return narratives_.size(); }
  bool empty() const noexcept { return narratives_.empty(); }

  const Narrative* find(std::string_view id) const;
  const Narrative& at(std::string_view id) const;

  std::vector<const Narrative*> narratives_of_event(const std::string& event_id) const;
  const std::vector<std::string>& events_of_topic(const std::string& topic) const;
  const std::vector<std::string>& topics_of_group(const std::string& topic_group) const;

  std::size_t event_count() const noexcept { return event_members_.size(); }
  std::size_t topic_count() const noexcept { return topic_events_.size(); }
  std::size_t topic_group_count() const noexcept { return group_topics_.size(); }

 private:
  std::vector<Narrative> narratives_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::size_t>> event_members_;
  std::map<std::string, std::vector<std::string>> topic_events_;
  std::map<std::string, std::vector<std::string>> group_topics_;
};

/// Reads line-delimited JSON records {id,title,body,leaning,event_id,topic,topic_group}.
/// Blank lines are skipped. Throws ParseError (with line) or CorpusError.
Corpus parse_corpus(std::istream& in, const std::string& source_name = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path);

/// Unordered narrative pair, smaller id first.
struct PairKey {
  std::string first;
  std::string second;

  auto operator<=>(const PairKey&) const = default;
  bool operator==(const PairKey&) const = default;
};

/// Throws std::invalid_argument when a == b.
PairKey make_pair_key(std::string_view a, std::string_view b);

/// 3 same event, 2 same topic, 1 same topic group, 0 otherwise.
int assign_label(const Narrative& a, const Narrative& b);

struct LabeledPair {
  PairKey pair;
  int label = 0;

  bool operator==(const LabeledPair&) const = default;
};

struct PairSample {
  std::vector<LabeledPair> labeled_pairs;
  std::uint64_t sampling_seed = 0;
  std::size_t per_label_cap = 0;

  std::size_t count(int label) const;
  std::optional<int> label_of(const PairKey& pair) const;

  bool operator==(const PairSample&) const = default;
};

inline constexpr std::size_t kDefaultPerLabelCap = 700;
inline constexpr std::uint64_t kDefaultSeed = 20231;

/// For each label, keeps min(available, cap) pairs chosen by a seeded
/// Fisher-Yates shuffle. Output is ordered by label (3 down to 0), then pair.
PairSample sample_pairs(const Corpus& corpus, std::size_t per_label_cap = kDefaultPerLabelCap,
                        std::uint64_t seed = kDefaultSeed);

/// Labels an explicit pair list against the corpus. Unknown ids throw CorpusError.
PairSample label_pairs(const Corpus& corpus, const std::vector<PairKey>& pairs);

}  // namespace fans
