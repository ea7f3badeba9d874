#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabprompt/neural_q.hpp"
#include "tabprompt/pipeline.hpp"
#include "tabprompt/random.hpp"
#include "tabprompt/task_lm.hpp"
#include "tabprompt/tokenizer.hpp"

namespace tabprompt {

/// Ordered, duplicate-free selection of column names.
using ColumnSequence = std::vector<std::string>;

struct MDPState {
  std::string description;
  std::vector<std::string> chosen;

  /// Description followed by the chosen names, space separated.
  std::string serialized() const;
  friend bool operator==(const MDPState&, const MDPState&) = default;
};

/// Column-sequencing MDP: each step appends one not-yet-chosen column.
class ColumnEnvironment {
 public:
  ColumnEnvironment(std::string description, std::vector<std::string> actions, std::size_t max_steps);

  MDPState reset() const { return MDPState{description_, {}}; }
  /// Throws DataError on unknown or repeated actions and on terminal states.
  MDPState step(const MDPState& state, const std::string& action) const;
  bool terminal(const MDPState& state) const;
  /// true where the action is still available.
  std::vector<bool> available(const MDPState& state) const;

  const std::vector<std::string>& actions() const noexcept { return actions_; }
  std::size_t action_index(const std::string& name) const;
  std::size_t max_steps() const noexcept { return max_steps_; }
  const std::string& description() const noexcept { return description_; }

 private:
  std::string description_;
  std::vector<std::string> actions_;
  std::size_t max_steps_;
};

/// 20 - 3t on a match, -0.5 otherwise.
double reward(std::size_t t, bool matched);

enum class SelectionMode { Explore, Exploit };

/// Exploit: argmax over available actions, ties to the lowest index.
/// Explore: with probability epsilon a uniform available action, otherwise a
/// draw from the softmax restricted to available actions.
std::size_t select_action(std::span<const double> q, const std::vector<bool>& available,
                          SelectionMode mode, double epsilon, Rng& rng);

/// r for terminal transitions, else r + gamma * alpha * log sum exp(q/alpha)
/// over the available next actions.
double soft_target(double r, std::span<const double> q_next, double gamma, double alpha, bool terminal);

struct Transition {
  MDPState state;
  std::string action;
  double reward = 0.0;
  MDPState next_state;
  bool terminal = false;
};

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  /// Oldest first.
  const std::deque<Transition>& entries() const noexcept { return entries_; }
  /// `batch` distinct entries, uniformly, without replacement.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> entries_;
};

struct PolicyConfig {
  std::size_t dimension = 128;
  std::size_t heads = 2;
  std::size_t encoder_layers = 2;
  std::uint64_t encoder_seed = 17;
};

struct TrainConfig {
  double gamma = 0.6;
  double learning_rate = 1e-4;
  std::size_t batch_size = 200;
  std::size_t episodes = 60;
  double epsilon = 0.4;
  std::size_t buffer_capacity = 3000;
  std::size_t max_steps = 6;
  double alpha = 1.0;
  std::size_t rows_per_reward = 1;
  std::uint64_t seed = 0;
  PolicyConfig policy;
  FewshotSettings fewshot;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Tokenizer, frozen encoder/projection and the Q-network for one action set.
/// Construction is a pure function of (description, actions, config).
class ColumnPolicy {
 public:
  ColumnPolicy(const std::string& description, std::vector<std::string> actions,
               const PolicyConfig& config);

  std::vector<int> state_tokens(const MDPState& state) const;
  std::vector<double> q_values(const MDPState& state, const AttentionWeights& weights) const;
  const PolicyNetwork& network() const noexcept { return *network_; }
  const Tokenizer& tokenizer() const noexcept { return tokenizer_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  AttentionParams initial_params(std::uint64_t seed) const;

 private:
  std::vector<std::string> actions_;
  PolicyConfig config_;
  Tokenizer tokenizer_;
  std::shared_ptr<const SeededEncoder> encoder_;
  std::unique_ptr<PolicyNetwork> network_;
};

struct ProbeOutcome {
  bool matched = false;
  std::vector<std::string> prompt_hashes;
  std::vector<bool> row_matched;
};

/// Scores a partial column sequence: does the Task-LM answer the sampled rows?
class RewardProbe {
 public:
  virtual ~RewardProbe() = default;
  virtual ProbeOutcome evaluate(std::span<const std::string> columns,
                                std::span<const std::size_t> rows) = 0;
};

/// Renders a prompt per row with few-shots from the pool, queries the
/// Task-LM and requires every row to match.
class TaskLMRewardProbe final : public RewardProbe {
 public:
  TaskLMRewardProbe(const PromptAssembler& assembler, TaskLM& tasklm, FewshotSettings fewshot);
  ProbeOutcome evaluate(std::span<const std::string> columns, std::span<const std::size_t> rows) override;

 private:
  const PromptAssembler& assembler_;
  TaskLM& tasklm_;
  FewshotSettings fewshot_;
};

struct StepRecord {
  std::string action;
  double reward = 0.0;
  bool matched = false;
  std::vector<double> q_values;
  std::vector<std::string> prompt_hashes;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  std::vector<std::size_t> reward_rows;
  std::vector<StepRecord> steps;
  std::vector<std::string> chosen;
  /// Sum of gamma^t r_t.
  double discounted_return = 0.0;
  double undiscounted_return = 0.0;
  /// Mean loss over the episode's gradient updates (0 when none ran).
  double mean_loss = 0.0;
  std::size_t updates = 0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;
  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// Everything needed to continue training bit-identically.
struct TrainerCheckpoint {
  std::string fingerprint;
  AttentionParams params;
  std::vector<Transition> buffer;
  std::string rng_state;
  std::size_t next_episode = 0;
  EpisodeLog log;
};

struct TrainResult {
  AttentionParams params;
  EpisodeLog log;
};

/// Soft Q-learning over the column MDP.
class SoftQTrainer {
 public:
  SoftQTrainer(const ColumnPolicy& policy, const ColumnEnvironment& env, RewardProbe& probe,
               std::vector<std::size_t> train_rows, TrainConfig config);

  void restore(const TrainerCheckpoint& checkpoint);
  /// Runs one episode; throws if the probe fails, leaving earlier state
  /// inconsistent (restore from the last checkpoint to continue).
  void run_episode();
  bool done() const noexcept { return next_episode_ >= config_.episodes; }
  std::size_t next_episode() const noexcept { return next_episode_; }

  TrainerCheckpoint checkpoint(std::string fingerprint = {}) const;
  const AttentionParams& params() const noexcept { return params_; }
  const EpisodeLog& log() const noexcept { return log_; }
  const ReplayBuffer& buffer() const noexcept { return buffer_; }

 private:
  double update();

  const ColumnPolicy& policy_;
  const ColumnEnvironment& env_;
  RewardProbe& probe_;
  std::vector<std::size_t> train_rows_;
  TrainConfig config_;
  AttentionParams params_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::size_t next_episode_ = 0;
  EpisodeLog log_;
};

/// Runs (or resumes) training to completion. `on_episode` receives a
/// checkpoint after every finished episode.
TrainResult train(const ColumnPolicy& policy, const ColumnEnvironment& env, RewardProbe& probe,
                  std::vector<std::size_t> train_rows, const TrainConfig& config,
                  const std::optional<TrainerCheckpoint>& resume = std::nullopt,
                  const std::function<void(const TrainerCheckpoint&)>& on_episode = {});

/// Greedy rollout from the initial state.
ColumnSequence extract_policy(const AttentionWeights& weights, const ColumnPolicy& policy,
                              const ColumnEnvironment& env);

}  // namespace tabprompt
