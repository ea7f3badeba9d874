#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tabprompt/http_client.hpp"

namespace tabprompt {

struct EmbeddingVector {
  std::vector<double> values;
  /// Set when the input text was empty; values are then all zero.
  bool empty_text = false;

  std::size_t dimension() const noexcept { return values.size(); }
  bool is_zero() const noexcept;
};

/// L2-normalizes `raw`. A zero vector stays zero.
EmbeddingVector normalize(std::vector<double> raw);

/// Dot product of unit vectors, clamped to [-1, 1]. Zero vectors give 0.
/// Throws ModelError on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Text encoder. Implementations must be safe to call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);
  virtual std::size_t dimension() const = 0;
};

/// Derives a Gaussian direction from a seeded hash of the text: identical
/// texts map to identical vectors, distinct texts to near-orthogonal ones.
class DeterministicEmbedder final : public Embedder {
 public:
  DeterministicEmbedder(std::size_t dimension, std::uint64_t seed);
  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// POST {"texts": [...]} -> {"embeddings": [[...], ...]}.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(RemoteSettings settings, std::size_t dimension);
  EmbeddingVector embed(std::string_view text) override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }
  const JsonHttpClient& client() const { return client_; }

 private:
  JsonHttpClient client_;
  std::size_t dimension_;
};

/// LRU cache keyed by exact text bytes, in front of another embedder.
class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<Embedder> inner, std::size_t capacity);
  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return inner_->dimension(); }
  std::size_t size() const;
  std::uint64_t hits() const;

 private:
  using Entry = std::pair<std::string, EmbeddingVector>;
  std::shared_ptr<Embedder> inner_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> lru_;
  std::unordered_map<std::string_view, std::list<Entry>::iterator> index_;
  std::uint64_t hits_ = 0;
};

enum class EmbedderBackend { Remote, DeterministicTest };

struct EmbedderConfig {
  EmbedderBackend backend = EmbedderBackend::DeterministicTest;
  RemoteSettings remote;
  std::size_t dimension = 256;
  std::size_t cache_capacity = 8192;
  std::uint64_t seed = 0;
};

/// Builds the configured backend, wrapped in a cache when capacity > 0.
std::shared_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace tabprompt
