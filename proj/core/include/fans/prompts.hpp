#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fans/corpus.hpp"

namespace fans {

/// Prompt detail level: L1 one sentence, L2 one paragraph, L3 six numbered steps.
enum class PromptLevel { L1 = 1, L2 = 2, L3 = 3 };

inline constexpr std::array<PromptLevel, 3> kAllPromptLevels = {PromptLevel::L1, PromptLevel::L2,
                                                                PromptLevel::L3};

int to_int(PromptLevel level) noexcept;
std::string_view to_string(PromptLevel level) noexcept;  // "L1", "L2", "L3"
std::optional<PromptLevel> parse_level(std::string_view s) noexcept;  // accepts "3", "L3", "l3"

inline constexpr std::string_view kNarrativeSlot = "{{narrative}}";

struct PromptText {
  std::string system_preamble;
  /// Level template; contains the narrative slot unless the template omitted it.
  std::string instruction;
  std::string narrative_payload;

  /// The user message: instruction with the slot filled (payload appended
  /// after a blank line when the template has no slot).
  std::string user_message() const;
  /// Preamble, blank line, user message. This is what fixture keys hash.
  std::string render() const;

  bool operator==(const PromptText&) const = default;
};

/// The preamble plus one template per level.
class PromptTemplates {
 public:
  static const PromptTemplates& defaults();

  /// Reads preamble.txt and level{1,2,3}.txt; files that are absent fall back to the defaults.
  static PromptTemplates load_dir(const std::filesystem::path& dir);

  PromptTemplates(std::string preamble, std::array<std::string, 3> levels);

  const std::string& preamble() const noexcept { return preamble_; }
  const std::string& level_template(PromptLevel level) const noexcept;

 private:
  std::string preamble_;
  std::array<std::string, 3> levels_;
};

PromptText build_prompt(const Narrative& narrative, PromptLevel level,
                        const PromptTemplates& templates = PromptTemplates::defaults());

}  // namespace fans
