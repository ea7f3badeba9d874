#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tabprompt/encoder.hpp"
#include "tabprompt/tokenizer.hpp"

namespace tabprompt {

struct AttentionHead {
  Matrix query;  // d x d/h
  Matrix key;    // d x d/h
  Matrix value;  // d x d/h
};

/// The weights of the trainable multi-head attention block. Also used as the
/// gradient type and for the optimizer moments.
struct AttentionWeights {
  std::vector<AttentionHead> heads;
  Matrix output;  // d x d

  static AttentionWeights zeros(std::size_t dimension, std::size_t num_heads);
  static AttentionWeights random(std::size_t dimension, std::size_t num_heads, std::uint64_t seed);

  std::size_t dimension() const { return static_cast<std::size_t>(output.rows()); }
  std::size_t parameter_count() const;

  /// Visits every matrix in a fixed order.
  void for_each(const std::function<void(Matrix&)>& fn);
  void for_each(const std::function<void(const Matrix&)>& fn) const;
  bool all_finite() const;
  bool same_shape(const AttentionWeights& other) const;
};

struct AdamState {
  AttentionWeights first_moment;
  AttentionWeights second_moment;
  std::int64_t step = 0;
};

/// Trainable parameters plus their optimizer state.
struct AttentionParams {
  AttentionWeights weights;
  AdamState optimizer;

  static AttentionParams init(std::size_t dimension, std::size_t num_heads, std::uint64_t seed);
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected adaptive-moment update. Rejects non-finite gradients
/// with ModelError and leaves `params` untouched.
void optimizer_step(AttentionParams& params, const AttentionWeights& grads, double learning_rate,
                    const AdamConfig& adam = {});

/// Softmax with max subtraction. Throws on empty input.
std::vector<double> action_distribution(std::span<const double> q);

/// One regression example: Q(state, action) should approach `target`.
struct QTarget {
  std::vector<int> state_tokens;
  std::size_t action = 0;
  double target = 0.0;
};

struct LossAndGrads {
  double loss = 0.0;
  AttentionWeights grads;
};

/// Frozen encoder -> trainable attention -> frozen vocabulary projection.
/// Q-value of an action is the mean logit, at the last state position, of
/// the tokens in the action's column name.
class PolicyNetwork {
 public:
  PolicyNetwork(std::shared_ptr<const EncoderStack> encoder, VocabProjection projection,
                std::vector<std::vector<int>> action_tokens);

  std::size_t num_actions() const noexcept { return action_tokens_.size(); }
  std::size_t dimension() const noexcept { return encoder_->dimension(); }
  const EncoderStack& encoder() const noexcept { return *encoder_; }
  const VocabProjection& projection() const noexcept { return projection_; }
  const std::vector<std::vector<int>>& action_tokens() const noexcept { return action_tokens_; }

  /// Cached frozen encoding of a state.
  Matrix hidden(const std::vector<int>& state_tokens) const;

  /// Attention output at the final position.
  Vector readout(const std::vector<int>& state_tokens, const AttentionWeights& weights) const;
  /// Logits over the vocabulary at the final position.
  Vector logits(const std::vector<int>& state_tokens, const AttentionWeights& weights) const;
  std::vector<double> q_vector(const std::vector<int>& state_tokens,
                               const AttentionWeights& weights) const;

  /// Mean squared error against the targets and its analytic gradient with
  /// respect to the attention weights only.
  LossAndGrads loss_and_grads(std::span<const QTarget> batch, const AttentionWeights& weights) const;

 private:
  std::shared_ptr<const EncoderStack> encoder_;
  VocabProjection projection_;
  std::vector<std::vector<int>> action_tokens_;
  Matrix action_readout_;  // d x N, column i = mean projection column over action i's tokens
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<int>, Matrix> hidden_cache_;
};

}  // namespace tabprompt
