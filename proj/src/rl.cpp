#include "tabprompt/rl.hpp"

#include <algorithm>
#include <cmath>

#include "tabprompt/errors.hpp"

namespace tabprompt {

std::string MDPState::serialized() const {
  std::string out = description;
  for (const auto& c : chosen) {
    out.push_back(' ');
    out += c;
  }
  return out;
}

ColumnEnvironment::ColumnEnvironment(std::string description, std::vector<std::string> actions,
                                     std::size_t max_steps)
    : description_(std::move(description)), actions_(std::move(actions)), max_steps_(max_steps) {
  if (actions_.empty()) throw ConfigError("train.actions", "no candidate columns");
  if (max_steps_ < 1) throw ConfigError("train.max_steps", "must be at least 1");
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (actions_[i] == actions_[j]) throw DataError("duplicate action '" + actions_[i] + "'");
    }
  }
}

std::size_t ColumnEnvironment::action_index(const std::string& name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) throw DataError("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - actions_.begin());
}

MDPState ColumnEnvironment::step(const MDPState& state, const std::string& action) const {
  action_index(action);
  if (std::find(state.chosen.begin(), state.chosen.end(), action) != state.chosen.end()) {
    throw DataError("column '" + action + "' already chosen");
  }
  if (terminal(state)) throw DataError("step from a terminal state");
  MDPState next = state;
  next.chosen.push_back(action);
  return next;
}

bool ColumnEnvironment::terminal(const MDPState& state) const {
  return state.chosen.size() >= std::min(max_steps_, actions_.size());
}

std::vector<bool> ColumnEnvironment::available(const MDPState& state) const {
  std::vector<bool> mask(actions_.size(), true);
  for (const auto& c : state.chosen) mask[action_index(c)] = false;
  return mask;
}

double reward(std::size_t t, bool matched) {
  return matched ? 20.0 - 3.0 * static_cast<double>(t) : -0.5;
}

std::size_t select_action(std::span<const double> q, const std::vector<bool>& available,
                          SelectionMode mode, double epsilon, Rng& rng) {
  if (q.size() != available.size()) throw ModelError("q-vector and mask sizes differ");
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (available[i]) open.push_back(i);
  }
  if (open.empty()) throw ModelError("every action is masked");

  if (mode == SelectionMode::Exploit) {
    std::size_t best = open.front();
    for (std::size_t i : open) {
      if (q[i] > q[best]) best = i;
    }
    return best;
  }
  if (rng.uniform01() < epsilon) return open[rng.below(open.size())];

  std::vector<double> masked;
  for (std::size_t i : open) masked.push_back(q[i]);
  const auto probs = action_distribution(masked);
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t k = 0; k < open.size(); ++k) {
    acc += probs[k];
    if (u < acc) return open[k];
  }
  return open.back();
}

double soft_target(double r, std::span<const double> q_next, double gamma, double alpha, bool terminal) {
  if (terminal) return r;
  if (q_next.empty()) throw ModelError("soft target of a non-terminal transition without next actions");
  double mx = q_next[0];
  for (double q : q_next) mx = std::max(mx, q);
  double sum = 0.0;
  for (double q : q_next) sum += std::exp((q - mx) / alpha);
  return r + gamma * (mx + alpha * std::log(sum));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("train.buffer_capacity", "must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch > entries_.size()) throw ModelError("batch larger than replay buffer");
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i : rng.sample_without_replacement(entries_.size(), batch)) {
    out.push_back(&entries_[i]);
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma", "must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("train.epsilon", "must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate", "must be positive");
  if (!(alpha > 0.0)) throw ConfigError("train.alpha", "must be positive");
  if (max_steps < 1) throw ConfigError("train.max_steps", "must be at least 1");
  if (batch_size < 1) throw ConfigError("train.batch_size", "must be at least 1");
  if (buffer_capacity < batch_size) {
    throw ConfigError("train.buffer_capacity", "must be at least the batch size");
  }
  if (rows_per_reward < 1) throw ConfigError("train.rows_per_reward", "must be at least 1");
  if (policy.heads == 0 || policy.dimension % policy.heads != 0) {
    throw ConfigError("train.policy.heads", "dimension must be divisible by the head count");
  }
}

ColumnPolicy::ColumnPolicy(const std::string& description, std::vector<std::string> actions,
                           const PolicyConfig& config)
    : actions_(std::move(actions)),
      config_(config),
      tokenizer_([&] {
        std::vector<std::string> texts{description};
        texts.insert(texts.end(), actions_.begin(), actions_.end());
        return Tokenizer::build(texts);
      }()) {
  encoder_ = std::make_shared<SeededEncoder>(tokenizer_.size(), config_.dimension,
                                             config_.encoder_layers, config_.encoder_seed);
  std::vector<std::vector<int>> action_tokens;
  for (const auto& a : actions_) {
    action_tokens.push_back(tokenizer_.tokenize(a));
    if (action_tokens.back().empty()) throw ModelError("column '" + a + "' has no tokens");
  }
  network_ = std::make_unique<PolicyNetwork>(encoder_, VocabProjection::tied(*encoder_),
                                             std::move(action_tokens));
}

std::vector<int> ColumnPolicy::state_tokens(const MDPState& state) const {
  auto tokens = tokenizer_.tokenize(state.serialized());
  if (tokens.empty()) tokens.push_back(Tokenizer::kUnknown);
  return tokens;
}

std::vector<double> ColumnPolicy::q_values(const MDPState& state, const AttentionWeights& weights) const {
  return network_->q_vector(state_tokens(state), weights);
}

AttentionParams ColumnPolicy::initial_params(std::uint64_t seed) const {
  return AttentionParams::init(config_.dimension, config_.heads, seed);
}

TaskLMRewardProbe::TaskLMRewardProbe(const PromptAssembler& assembler, TaskLM& tasklm,
                                     FewshotSettings fewshot)
    : assembler_(assembler), tasklm_(tasklm), fewshot_(fewshot) {}

ProbeOutcome TaskLMRewardProbe::evaluate(std::span<const std::string> columns,
                                         std::span<const std::size_t> rows) {
  std::vector<RenderedPrompt> prompts;
  for (std::size_t r : rows) prompts.push_back(assembler_.render(r, columns, fewshot_, r));
  const auto outputs = tasklm_.complete_batch(prompts);
  ProbeOutcome out;
  out.matched = true;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const bool ok = matches(outputs[i], prompts[i].expected);
    out.prompt_hashes.push_back(prompts[i].hash());
    out.row_matched.push_back(ok);
    out.matched = out.matched && ok;
  }
  return out;
}

SoftQTrainer::SoftQTrainer(const ColumnPolicy& policy, const ColumnEnvironment& env, RewardProbe& probe,
                           std::vector<std::size_t> train_rows, TrainConfig config)
    : policy_(policy),
      env_(env),
      probe_(probe),
      train_rows_(std::move(train_rows)),
      config_(std::move(config)),
      params_(policy.initial_params(config_.seed)),
      buffer_(config_.buffer_capacity),
      rng_(config_.seed) {
  config_.validate();
  if (train_rows_.empty()) throw DataError("training split is empty");
  if (policy_.actions() != env_.actions()) throw ModelError("policy and environment action sets differ");
  log_.seed = config_.seed;
}

void SoftQTrainer::restore(const TrainerCheckpoint& checkpoint) {
  if (!checkpoint.params.weights.same_shape(params_.weights)) {
    throw ModelError("checkpoint parameters do not match the policy shape");
  }
  params_ = checkpoint.params;
  buffer_ = ReplayBuffer(config_.buffer_capacity);
  for (const auto& t : checkpoint.buffer) buffer_.push(t);
  rng_.restore(checkpoint.rng_state);
  next_episode_ = checkpoint.next_episode;
  log_ = checkpoint.log;
}

double SoftQTrainer::update() {
  const auto batch = buffer_.sample(config_.batch_size, rng_);
  std::vector<QTarget> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    std::vector<double> q_next;
    if (!t->terminal) {
      const auto q = policy_.q_values(t->next_state, params_.weights);
      const auto mask = env_.available(t->next_state);
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (mask[i]) q_next.push_back(q[i]);
      }
    }
    targets.push_back({policy_.state_tokens(t->state), env_.action_index(t->action),
                       soft_target(t->reward, q_next, config_.gamma, config_.alpha, t->terminal)});
  }
  auto [loss, grads] = policy_.network().loss_and_grads(targets, params_.weights);
  optimizer_step(params_, grads, config_.learning_rate);
  return loss;
}

void SoftQTrainer::run_episode() {
  EpisodeRecord record;
  record.episode = next_episode_;
  const auto picks = rng_.sample_without_replacement(
      train_rows_.size(), std::min(config_.rows_per_reward, train_rows_.size()));
  for (std::size_t i : picks) record.reward_rows.push_back(train_rows_[i]);

  MDPState state = env_.reset();
  double discount = 1.0;
  double loss_total = 0.0;
  for (std::size_t t = 0; !env_.terminal(state); ++t) {
    StepRecord step;
    step.q_values = policy_.q_values(state, params_.weights);
    const std::size_t a = select_action(step.q_values, env_.available(state), SelectionMode::Explore,
                                        config_.epsilon, rng_);
    step.action = env_.actions()[a];
    MDPState next = env_.step(state, step.action);

    const ProbeOutcome outcome = probe_.evaluate(next.chosen, record.reward_rows);
    step.matched = outcome.matched;
    step.prompt_hashes = outcome.prompt_hashes;
    step.reward = reward(t, outcome.matched);
    const bool done = env_.terminal(next);
    buffer_.push(Transition{state, step.action, step.reward, next, done});

    record.discounted_return += discount * step.reward;
    record.undiscounted_return += step.reward;
    discount *= config_.gamma;

    if (buffer_.size() >= config_.batch_size) {
      loss_total += update();
      ++record.updates;
    }
    record.steps.push_back(std::move(step));
    state = std::move(next);
  }
  record.chosen = state.chosen;
  if (record.updates > 0) record.mean_loss = loss_total / static_cast<double>(record.updates);
  log_.episodes.push_back(std::move(record));
  ++next_episode_;
}

TrainerCheckpoint SoftQTrainer::checkpoint(std::string fingerprint) const {
  TrainerCheckpoint c;
  c.fingerprint = std::move(fingerprint);
  c.params = params_;
  c.buffer.assign(buffer_.entries().begin(), buffer_.entries().end());
  c.rng_state = rng_.state();
  c.next_episode = next_episode_;
  c.log = log_;
  return c;
}

TrainResult train(const ColumnPolicy& policy, const ColumnEnvironment& env, RewardProbe& probe,
                  std::vector<std::size_t> train_rows, const TrainConfig& config,
                  const std::optional<TrainerCheckpoint>& resume,
                  const std::function<void(const TrainerCheckpoint&)>& on_episode) {
  SoftQTrainer trainer(policy, env, probe, std::move(train_rows), config);
  std::string fingerprint = resume ? resume->fingerprint : std::string{};
  if (resume) trainer.restore(*resume);
  while (!trainer.done()) {
    trainer.run_episode();
    if (on_episode) on_episode(trainer.checkpoint(fingerprint));
  }
  return TrainResult{trainer.params(), trainer.log()};
}

ColumnSequence extract_policy(const AttentionWeights& weights, const ColumnPolicy& policy,
                              const ColumnEnvironment& env) {
  Rng unused(0);
  MDPState state = env.reset();
  while (!env.terminal(state)) {
    const auto q = policy.q_values(state, weights);
    const std::size_t a = select_action(q, env.available(state), SelectionMode::Exploit, 0.0, unused);
    state = env.step(state, env.actions()[a]);
  }
  return state.chosen;
}

}  // namespace tabprompt
