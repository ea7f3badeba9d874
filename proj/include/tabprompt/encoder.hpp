#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tabprompt/http_client.hpp"
#include "tabprompt/tokenizer.hpp"

namespace tabprompt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Frozen contextual encoder: token ids -> hidden states (T x d).
class EncoderStack {
 public:
  virtual ~EncoderStack() = default;
  virtual Matrix encode(std::span<const int> tokens) const = 0;
  virtual std::size_t dimension() const = 0;
};

/// Desk-scale stand-in for pretrained layers: seeded token and position
/// embeddings followed by fixed self-attention and tanh-MLP mixing layers with
/// residual connections and RMS normalization. Nothing here is ever trained.
class SeededEncoder final : public EncoderStack {
 public:
  SeededEncoder(std::size_t vocab_size, std::size_t dimension, std::size_t layers, std::uint64_t seed);

  Matrix encode(std::span<const int> tokens) const override;
  std::size_t dimension() const override { return dimension_; }
  const Matrix& token_embeddings() const noexcept { return embeddings_; }

 private:
  struct Layer {
    Matrix query, key, value, hidden, out;
  };
  std::size_t dimension_;
  Matrix embeddings_;  // V x d
  std::vector<Layer> layers_;
};

/// Fetches per-token hidden states from an activation service using the
/// embedding wire format: POST {"texts": [token, ...]} ->
/// {"embeddings": [[...] per token]}.
class RemoteEncoder final : public EncoderStack {
 public:
  RemoteEncoder(RemoteSettings settings, std::size_t dimension, Tokenizer tokenizer);
  Matrix encode(std::span<const int> tokens) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  mutable JsonHttpClient client_;
  std::size_t dimension_;
  Tokenizer tokenizer_;
};

/// Frozen d x V map from the read-out hidden vector to per-token logits.
struct VocabProjection {
  Matrix weights;

  /// The transpose of the encoder's token embeddings (weight tying).
  static VocabProjection tied(const SeededEncoder& encoder);
};

}  // namespace tabprompt
