#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabprompt/http_client.hpp"
#include "tabprompt/prompt.hpp"

namespace tabprompt {

/// Lowercase, trim, drop one trailing sentence mark, collapse whitespace runs.
std::string normalize_answer(std::string_view text);

/// Normalized exact match.
bool matches(std::string_view output, std::string_view expected);

/// A synthetic Task-LM with a known notion of which columns matter.
struct OracleSpec {
  /// Expected answer text per table row, indexed by RenderedPrompt::row_id.
  std::vector<std::string> gold_answers;
  std::vector<std::string> informative_columns;
  bool order_sensitive = true;
  double p_correct_satisfied = 1.0;
  double p_correct_otherwise = 0.0;
  /// When set, a prompt only counts as satisfied if at least one of its
  /// few-shot examples carries the same answer as the test row.
  bool fewshot_sensitive = false;
  std::uint64_t seed = 0;
};

/// True when the prompt's test example contains every informative column
/// (in the required relative order if order-sensitive) and, with the few-shot
/// knob on, an example sharing the test row's answer.
bool oracle_satisfied(const RenderedPrompt& prompt, const OracleSpec& spec);

/// The gold answer with probability p_correct_satisfied / p_correct_otherwise,
/// else a deterministic distractor. Randomness is a hash of (prompt, seed).
std::string oracle_complete(const RenderedPrompt& prompt, const OracleSpec& spec);

/// One JSON line per call: prompt hash, backend, latency, output.
class TranscriptLog {
 public:
  explicit TranscriptLog(const std::filesystem::path& path);
  void record(const RenderedPrompt& prompt, std::string_view backend, double latency_ms,
              std::string_view output);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class TaskLM {
 public:
  explicit TaskLM(std::size_t max_prompt_chars) : max_prompt_chars_(max_prompt_chars) {}
  virtual ~TaskLM() = default;

  /// Rejects over-length prompts before any backend work.
  std::string complete(const RenderedPrompt& prompt);
  /// Completions in input order. Remote backends fan out up to their
  /// in-flight cap.
  virtual std::vector<std::string> complete_batch(std::span<const RenderedPrompt> prompts);

  virtual std::string_view backend_name() const = 0;
  void set_transcript(std::shared_ptr<TranscriptLog> log) { transcript_ = std::move(log); }
  std::uint64_t calls() const noexcept { return calls_; }

 protected:
  virtual std::string generate(const RenderedPrompt& prompt) = 0;
  void check_length(const RenderedPrompt& prompt) const;
  std::string traced_generate(const RenderedPrompt& prompt);

 private:
  std::size_t max_prompt_chars_;
  std::shared_ptr<TranscriptLog> transcript_;
  std::atomic<std::uint64_t> calls_{0};
};

class OracleTaskLM final : public TaskLM {
 public:
  OracleTaskLM(OracleSpec spec, std::size_t max_prompt_chars);
  std::string_view backend_name() const override { return "oracle"; }
  const OracleSpec& spec() const noexcept { return spec_; }

 protected:
  std::string generate(const RenderedPrompt& prompt) override;

 private:
  OracleSpec spec_;
};

/// POST {"prompt": "..."} -> {"completion": "..."}. The answer is the
/// first capture group (or whole match) of `answer_regex` when set, else the
/// first line of the completion.
class RemoteTaskLM final : public TaskLM {
 public:
  RemoteTaskLM(RemoteSettings settings, std::size_t max_prompt_chars, std::string answer_regex = {});
  std::vector<std::string> complete_batch(std::span<const RenderedPrompt> prompts) override;
  std::string_view backend_name() const override { return "remote"; }
  const JsonHttpClient& client() const { return client_; }

 protected:
  std::string generate(const RenderedPrompt& prompt) override;

 private:
  JsonHttpClient client_;
  std::optional<std::regex> answer_regex_;
};

enum class TaskLMBackend { Remote, Oracle };

struct TaskLMConfig {
  TaskLMBackend backend = TaskLMBackend::Oracle;
  RemoteSettings remote;
  std::size_t max_prompt_chars = 200000;
  std::string answer_regex;
};

}  // namespace tabprompt
