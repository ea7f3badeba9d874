#include "tabprompt/embedding.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

EmbeddingVector normalize(std::vector<double> raw) {
  double norm_sq = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw ModelError("embedding has a non-finite entry");
    norm_sq += v * v;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : raw) v *= inv;
  }
  return EmbeddingVector{std::move(raw), false};
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ModelError("cosine of vectors with dimensions " + std::to_string(a.dimension()) +
                     " and " + std::to_string(b.dimension()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

DeterministicEmbedder::DeterministicEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw ConfigError("embedder.dimension", "must be positive");
}

EmbeddingVector DeterministicEmbedder::embed(std::string_view text) {
  if (text.empty()) return EmbeddingVector{std::vector<double>(dimension_, 0.0), true};
  Rng rng(mix64(fnv1a64(text) ^ mix64(seed_)));
  std::vector<double> raw(dimension_);
  for (double& v : raw) v = rng.normal();
  return normalize(std::move(raw));
}

RemoteEmbedder::RemoteEmbedder(RemoteSettings settings, std::size_t dimension)
    : client_(std::move(settings)), dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("embedder.dimension", "must be positive");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
  std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out(texts.size());
  nlohmann::json request;
  request["texts"] = nlohmann::json::array();
  std::vector<std::size_t> sent;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) {
      out[i] = EmbeddingVector{std::vector<double>(dimension_, 0.0), true};
    } else {
      request["texts"].push_back(texts[i]);
      sent.push_back(i);
    }
  }
  if (sent.empty()) return out;

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(client_.post(request.dump()));
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
  if (!response.contains("embeddings") || !response["embeddings"].is_array() ||
      response["embeddings"].size() != sent.size()) {
    throw TransportError("embedding response does not hold one vector per text");
  }
  for (std::size_t k = 0; k < sent.size(); ++k) {
    const auto& row = response["embeddings"][k];
    if (!row.is_array() || row.size() != dimension_) {
      throw TransportError("embedding server returned dimension " + std::to_string(row.size()) +
                           ", configured " + std::to_string(dimension_));
    }
    out[sent[k]] = normalize(row.get<std::vector<double>>());
  }
  return out;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner, std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {}

EmbeddingVector CachingEmbedder::embed(std::string_view text) {
  {
    std::lock_guard lock(mutex_);
    auto it = index_.find(text);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->second;
    }
  }
  EmbeddingVector v = inner_->embed(text);
  if (capacity_ == 0) return v;
  std::lock_guard lock(mutex_);
  if (index_.find(text) == index_.end()) {
    lru_.emplace_front(std::string(text), v);
    index_.emplace(lru_.front().first, lru_.begin());
    while (lru_.size() > capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
  }
  return v;
}

std::size_t CachingEmbedder::size() const {
  std::lock_guard lock(mutex_);
  return lru_.size();
}

std::uint64_t CachingEmbedder::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::shared_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  std::shared_ptr<Embedder> base;
  if (config.backend == EmbedderBackend::Remote) {
    base = std::make_shared<RemoteEmbedder>(config.remote, config.dimension);
  } else {
    base = std::make_shared<DeterministicEmbedder>(config.dimension, config.seed);
  }
  if (config.cache_capacity == 0) return base;
  return std::make_shared<CachingEmbedder>(std::move(base), config.cache_capacity);
}

}  // namespace tabprompt
