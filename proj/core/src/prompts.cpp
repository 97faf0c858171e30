#include "fans/prompts.hpp"

#include <fstream>
#include <sstream>

#include "embedded_data.hpp"
#include "fans/errors.hpp"
#include "fans/text.hpp"

namespace fans {

int to_int(PromptLevel level) noexcept { return static_cast<int>(level); }

std::string_view to_string(PromptLevel level) noexcept {
  switch (level) {
    case PromptLevel::L1: return "L1";
    case PromptLevel::L2: return "L2";
    case PromptLevel::L3: return "L3";
  }
  return "?";
}

std::optional<PromptLevel> parse_level(std::string_view s) noexcept {
  s = text::trim(s);
  if (!s.empty() && (s.front() == 'L' || s.front() == 'l')) s.remove_prefix(1);
  if (s == "1") return PromptLevel::L1;
  if (s == "2") return PromptLevel::L2;
  if (s == "3") return PromptLevel::L3;
  return std::nullopt;
}

std::string PromptText::user_message() const {
  if (instruction.find(kNarrativeSlot) == std::string::npos)
    return instruction + "\n\n" + narrative_payload;
  return text::replace_all(instruction, kNarrativeSlot, narrative_payload);
}

std::string PromptText::render() const { return system_preamble + "\n\n" + user_message(); }

namespace {

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::optional<std::string> read_optional(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return strip_trailing_newlines(ss.str());
}

}  // namespace

PromptTemplates::PromptTemplates(std::string preamble, std::array<std::string, 3> levels)
    : preamble_(strip_trailing_newlines(std::move(preamble))) {
  for (std::size_t i = 0; i < levels.size(); ++i) levels_[i] = strip_trailing_newlines(std::move(levels[i]));
}

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates kDefaults(
      std::string(embedded::kPromptPreamble),
      {std::string(embedded::kPromptLevel1), std::string(embedded::kPromptLevel2),
       std::string(embedded::kPromptLevel3)});
  return kDefaults;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
  const PromptTemplates& d = defaults();
  std::array<std::string, 3> levels;
  for (PromptLevel lvl : kAllPromptLevels) {
    const auto idx = static_cast<std::size_t>(to_int(lvl) - 1);
    levels[idx] = read_optional(dir / ("level" + std::to_string(to_int(lvl)) + ".txt"))
                      .value_or(d.level_template(lvl));
  }
  return PromptTemplates(read_optional(dir / "preamble.txt").value_or(d.preamble()), std::move(levels));
}

const std::string& PromptTemplates::level_template(PromptLevel level) const noexcept {
  return levels_[static_cast<std::size_t>(to_int(level) - 1)];
}

PromptText build_prompt(const Narrative& narrative, PromptLevel level, const PromptTemplates& templates) {
  return PromptText{templates.preamble(), templates.level_template(level), narrative.payload()};
}

}  // namespace fans
