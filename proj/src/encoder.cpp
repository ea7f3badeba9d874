#include "tabprompt/encoder.hpp"

#include <cmath>

#include <json.hpp>

#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

namespace {

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

void row_softmax(Matrix& scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double mx = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - mx).exp().matrix();
    scores.row(i) /= scores.row(i).sum();
  }
}

void rms_normalize(Matrix& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double rms = std::sqrt(x.row(i).squaredNorm() / static_cast<double>(x.cols()) + 1e-12);
    x.row(i) /= rms;
  }
}

}  // namespace

SeededEncoder::SeededEncoder(std::size_t vocab_size, std::size_t dimension, std::size_t layers,
                             std::uint64_t seed)
    : dimension_(dimension) {
  if (dimension_ == 0 || vocab_size == 0) throw ConfigError("encoder", "empty encoder shape");
  Rng rng(mix64(seed ^ 0x656e636f646572ULL));
  embeddings_ = gaussian(rng, vocab_size, dimension_, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(dimension_));
  for (std::size_t l = 0; l < layers; ++l) {
    Layer layer;
    layer.query = gaussian(rng, dimension_, dimension_, s);
    layer.key = gaussian(rng, dimension_, dimension_, s);
    layer.value = gaussian(rng, dimension_, dimension_, s);
    layer.hidden = gaussian(rng, dimension_, 2 * dimension_, s);
    layer.out = gaussian(rng, 2 * dimension_, dimension_, s / std::sqrt(2.0));
    layers_.push_back(std::move(layer));
  }
}

Matrix SeededEncoder::encode(std::span<const int> tokens) const {
  const auto T = static_cast<Eigen::Index>(tokens.size());
  const auto d = static_cast<Eigen::Index>(dimension_);
  Matrix x(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int id = tokens[static_cast<std::size_t>(t)];
    if (id < 0 || id >= embeddings_.rows()) throw ModelError("token id out of range");
    x.row(t) = embeddings_.row(id);
    // Sinusoidal positions, scaled down so token identity dominates.
    for (Eigen::Index j = 0; j < d; ++j) {
      const double freq = std::pow(10000.0, -static_cast<double>(j / 2 * 2) / static_cast<double>(d));
      x(t, j) += 0.5 * ((j % 2 == 0) ? std::sin(static_cast<double>(t) * freq)
                                     : std::cos(static_cast<double>(t) * freq));
    }
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (const auto& layer : layers_) {
    Matrix scores = (x * layer.query) * (x * layer.key).transpose() * inv_sqrt_d;
    row_softmax(scores);
    x += scores * (x * layer.value);
    rms_normalize(x);
    x += (x * layer.hidden).array().tanh().matrix() * layer.out;
    rms_normalize(x);
  }
  return x;
}

RemoteEncoder::RemoteEncoder(RemoteSettings settings, std::size_t dimension, Tokenizer tokenizer)
    : client_(std::move(settings)), dimension_(dimension), tokenizer_(std::move(tokenizer)) {}

Matrix RemoteEncoder::encode(std::span<const int> tokens) const {
  nlohmann::json request;
  request["texts"] = nlohmann::json::array();
  for (int id : tokens) request["texts"].push_back(tokenizer_.piece(id));
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(client_.post(request.dump()));
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed activation response: ") + e.what());
  }
  if (!response.is_object() || !response.contains("embeddings")) {
    throw TransportError("activation response lacks \"embeddings\"");
  }
  const auto& rows = response["embeddings"];
  if (!rows.is_array() || rows.size() != tokens.size()) {
    throw TransportError("activation response does not hold one row per token");
  }
  Matrix h(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(dimension_));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (!rows[t].is_array() || rows[t].size() != dimension_) throw TransportError("activation row has wrong dimension");
    for (std::size_t j = 0; j < dimension_; ++j) {
      h(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j].get<double>();
    }
  }
  return h;
}

VocabProjection VocabProjection::tied(const SeededEncoder& encoder) {
  return VocabProjection{encoder.token_embeddings().transpose()};
}

}  // namespace tabprompt
