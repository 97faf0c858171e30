#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace fans::testing {

namespace fs = std::filesystem;

fs::path fixture_path(std::string_view relative) { return fs::path(FANS_TEST_FIXTURES_DIR) / relative; }

fs::path data_path(std::string_view relative) { return fs::path(FANS_DATA_DIR) / relative; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

TempDir::TempDir() {
  std::random_device rd;
  const auto tag = std::to_string(rd()) + std::to_string(rd());
  path_ = fs::temp_directory_path() / ("fans-test-" + tag);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::size_t materialize_llm_fixtures(const Corpus& corpus, PromptLevel level, const fs::path& transcripts_dir,
                                     const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::size_t written = 0;
  for (const auto& n : corpus.narratives()) {
    const fs::path src = transcripts_dir / (n.id + "." + std::string(to_string(level)) + ".txt");
    if (!fs::exists(src)) continue;
    write_text(out_dir / (prompt_hash(build_prompt(n, level)) + ".txt"), read_text(src));
    ++written;
  }
  return written;
}

void MapLlmProvider::add(const Narrative& n, PromptLevel level, std::string transcript) {
  by_hash_[prompt_hash(build_prompt(n, level))] = std::move(transcript);
}

std::string MapLlmProvider::complete(const PromptText& prompt) {
  ++calls_;
  const auto it = by_hash_.find(prompt_hash(prompt));
  if (it == by_hash_.end()) throw TransportError("no transcript for prompt", false);
  return it->second;
}

std::string ScriptedLlmProvider::complete(const PromptText&) {
  ++calls_;
  Step step;
  {
    std::lock_guard lock(mu_);
    step = script_.front();
    if (script_.size() > 1) script_.pop_front();
  }
  if (const auto* fail = std::get_if<Fail>(&step)) throw TransportError("scripted failure", fail->retryable);
  return std::get<std::string>(step);
}

}  // namespace fans::testing
