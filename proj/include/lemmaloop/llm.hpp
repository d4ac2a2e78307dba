#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lemmaloop/conjecture.hpp"
#include "lemmaloop/smtlib.hpp"
#include "lemmaloop/task.hpp"

namespace lemmaloop {

enum class PromptStrategy { Strategy1, Strategy2, Naive };

/// "strategy1", "strategy2", "naive".
std::string to_string(PromptStrategy s);
std::optional<PromptStrategy> strategy_from_string(std::string_view s);

inline constexpr std::string_view kInputPlaceholder = "{ Input SMTLIB2 file }";

std::string_view prompt_template(PromptStrategy s);

/// The template with the labeled task text substituted for the placeholder.
std::string render_prompt(PromptStrategy s, const LabeledScript& labeled);

enum class LlmMode { Live, Record, Replay };
std::string to_string(LlmMode m);
std::optional<LlmMode> mode_from_string(std::string_view s);

struct ModelConfig {
  std::string endpoint = "https://dashscope.aliyuncs.com/compatible-mode/v1/chat/completions";
  std::string model = "qwen3-235b-a22b-instruct-2507";
  double temperature = 0.9;
  double top_p = 0.9;
  int max_output_tokens = 4096;
  /// Name of the environment variable holding the API key.
  std::string api_key_env = "DASHSCOPE_API_KEY";
  LlmMode mode = LlmMode::Live;
  std::filesystem::path transcripts_dir;
  double requests_per_minute = 60.0;
  double request_timeout_seconds = 180.0;
  int max_retries = 3;
  double retry_backoff_seconds = 2.0;
};

/// Throws std::invalid_argument on out-of-range sampling parameters.
void validate(const ModelConfig& cfg);

struct LlmResponse {
  std::string text;
  TokenUsage usage;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayMiss : public std::runtime_error {
 public:
  ReplayMiss(const std::string& key, const std::string& detail);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

std::string sha256_hex(std::string_view data);

/// Content hash of (prompt, model, temperature, top_p, iteration).
std::string transcript_key(std::string_view prompt, const ModelConfig& cfg, int iteration);

struct Transcript {
  std::string key;
  std::string prompt_hash;
  std::string model;
  double temperature = 0.0;
  double top_p = 0.0;
  int iteration = 0;
  std::string response;
  TokenUsage usage;
};

/// One JSON file per transcript, named `<key>.json`.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<Transcript> load(const std::string& key) const;
  /// Atomic write (temp file + rename). Safe to call concurrently.
  void save(const Transcript& t);
  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mu_;
};

Transcript make_transcript(std::string_view prompt, const ModelConfig& cfg, int iteration, const LlmResponse& r);

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  /// One single-shot completion. `iteration` is 1-based.
  virtual LlmResponse query(const std::string& prompt, int iteration) = 0;
  virtual const ModelConfig& config() const = 0;
};

/// Chat-completion client over HTTP(S). The API key is read from the
/// environment variable named in the config at construction.
class LiveModel : public LanguageModel {
 public:
  explicit LiveModel(ModelConfig cfg);
  LlmResponse query(const std::string& prompt, int iteration) override;
  const ModelConfig& config() const override { return cfg_; }

 private:
  void pace();

  ModelConfig cfg_;
  std::string api_key_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

class ReplayModel : public LanguageModel {
 public:
  explicit ReplayModel(ModelConfig cfg);
  /// Throws ReplayMiss when no transcript has the exact key.
  LlmResponse query(const std::string& prompt, int iteration) override;
  const ModelConfig& config() const override { return cfg_; }

 private:
  ModelConfig cfg_;
  TranscriptStore store_;
};

class RecordModel : public LanguageModel {
 public:
  explicit RecordModel(ModelConfig cfg);
  LlmResponse query(const std::string& prompt, int iteration) override;
  const ModelConfig& config() const override { return live_.config(); }

 private:
  LiveModel live_;
  TranscriptStore store_;
};

std::unique_ptr<LanguageModel> make_model(const ModelConfig& cfg);

struct ExtractionDiagnostic {
  std::string text;
  std::string message;
};

struct ExtractionResult {
  std::vector<Conjecture> conjectures;
  std::vector<ExtractionDiagnostic> diagnostics;
};

/// Pull candidate formulas out of a free-text response: fenced code blocks
/// first, then lines holding a `(forall ...)` or `(assert ...)` form.
/// Candidates are parsed and sort-checked against `task`, deduplicated up
/// to alpha-renaming and capped at `cap`. Rejects go to diagnostics.
ExtractionResult extract_conjectures(std::string_view raw, const Task& task, std::size_t cap = 3,
                                     const Provenance& provenance = {});

}  // namespace lemmaloop
