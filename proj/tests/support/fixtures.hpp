#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>

#include "fans/corpus.hpp"
#include "fans/errors.hpp"
#include "fans/extraction.hpp"
#include "fans/prompts.hpp"

namespace fans::testing {

std::filesystem::path fixture_path(std::string_view relative);
std::filesystem::path data_path(std::string_view relative);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Copies `<id>.L<n>.txt` transcripts into `out_dir/<prompt-hash>.txt` so a
/// FixtureLlmProvider can serve them. Returns how many were written.
std::size_t materialize_llm_fixtures(const Corpus& corpus, PromptLevel level,
                                     const std::filesystem::path& transcripts_dir,
                                     const std::filesystem::path& out_dir);

/// Serves transcripts registered per narrative; unknown prompts are a
/// non-retryable transport error.
class MapLlmProvider final : public LlmProvider {
 public:
  explicit MapLlmProvider(std::string model = "fixture-model") : model_(std::move(model)) {}
  void add(const Narrative& n, PromptLevel level, std::string transcript);
  std::string complete(const PromptText& prompt) override;
  std::string model_id() const override { return model_; }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::string model_;
  std::map<std::string, std::string> by_hash_;
  std::atomic<std::size_t> calls_{0};
};

/// Replays a fixed script of replies and transport errors, then repeats the last step.
class ScriptedLlmProvider final : public LlmProvider {
 public:
  struct Fail {
    bool retryable = true;
  };
  using Step = std::variant<std::string, Fail>;

  explicit ScriptedLlmProvider(std::deque<Step> script) : script_(std::move(script)) {}
  std::string complete(const PromptText& prompt) override;
  std::string model_id() const override { return "scripted"; }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::mutex mu_;
  std::deque<Step> script_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace fans::testing
