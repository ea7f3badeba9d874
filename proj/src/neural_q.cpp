#include "tabprompt/neural_q.hpp"

#include <cmath>

#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

AttentionWeights AttentionWeights::zeros(std::size_t dimension, std::size_t num_heads) {
  if (num_heads == 0 || dimension % num_heads != 0) {
    throw ConfigError("policy.heads", "dimension must be divisible by the head count");
  }
  const auto d = static_cast<Eigen::Index>(dimension);
  const auto dh = static_cast<Eigen::Index>(dimension / num_heads);
  AttentionWeights w;
  for (std::size_t h = 0; h < num_heads; ++h) {
    w.heads.push_back({Matrix::Zero(d, dh), Matrix::Zero(d, dh), Matrix::Zero(d, dh)});
  }
  w.output = Matrix::Zero(d, d);
  return w;
}

AttentionWeights AttentionWeights::random(std::size_t dimension, std::size_t num_heads,
                                          std::uint64_t seed) {
  AttentionWeights w = zeros(dimension, num_heads);
  Rng rng(mix64(seed ^ 0x617474656e74ULL));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  w.for_each([&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  });
  return w;
}

std::size_t AttentionWeights::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

void AttentionWeights::for_each(const std::function<void(Matrix&)>& fn) {
  for (auto& h : heads) {
    fn(h.query);
    fn(h.key);
    fn(h.value);
  }
  fn(output);
}

void AttentionWeights::for_each(const std::function<void(const Matrix&)>& fn) const {
  for (const auto& h : heads) {
    fn(h.query);
    fn(h.key);
    fn(h.value);
  }
  fn(output);
}

bool AttentionWeights::all_finite() const {
  bool ok = true;
  for_each([&](const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

bool AttentionWeights::same_shape(const AttentionWeights& other) const {
  if (heads.size() != other.heads.size()) return false;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> a, b;
  for_each([&](const Matrix& m) { a.emplace_back(m.rows(), m.cols()); });
  other.for_each([&](const Matrix& m) { b.emplace_back(m.rows(), m.cols()); });
  return a == b;
}

AttentionParams AttentionParams::init(std::size_t dimension, std::size_t num_heads,
                                      std::uint64_t seed) {
  AttentionParams p;
  p.weights = AttentionWeights::random(dimension, num_heads, seed);
  p.optimizer.first_moment = AttentionWeights::zeros(dimension, num_heads);
  p.optimizer.second_moment = AttentionWeights::zeros(dimension, num_heads);
  return p;
}

void optimizer_step(AttentionParams& params, const AttentionWeights& grads, double learning_rate,
                    const AdamConfig& adam) {
  if (!grads.same_shape(params.weights)) throw ModelError("gradient shape does not match parameters");
  if (!grads.all_finite()) throw ModelError("optimizer step rejected: non-finite gradient");

  const auto t = params.optimizer.step + 1;
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t));

  std::vector<Matrix*> w, m, v;
  std::vector<const Matrix*> g;
  params.weights.for_each([&](Matrix& x) { w.push_back(&x); });
  params.optimizer.first_moment.for_each([&](Matrix& x) { m.push_back(&x); });
  params.optimizer.second_moment.for_each([&](Matrix& x) { v.push_back(&x); });
  grads.for_each([&](const Matrix& x) { g.push_back(&x); });

  for (std::size_t i = 0; i < w.size(); ++i) {
    *m[i] = adam.beta1 * *m[i] + (1.0 - adam.beta1) * *g[i];
    *v[i] = adam.beta2 * *v[i] + (1.0 - adam.beta2) * g[i]->cwiseProduct(*g[i]);
    const auto m_hat = m[i]->array() / c1;
    const auto v_hat = v[i]->array() / c2;
    w[i]->array() -= learning_rate * m_hat / (v_hat.sqrt() + adam.epsilon);
  }
  params.optimizer.step = t;
}

std::vector<double> action_distribution(std::span<const double> q) {
  if (q.empty()) throw ModelError("softmax of an empty vector");
  double mx = q[0];
  for (double x : q) mx = std::max(mx, x);
  std::vector<double> p(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += p[i] = std::exp(q[i] - mx);
  for (double& x : p) x /= total;
  return p;
}

PolicyNetwork::PolicyNetwork(std::shared_ptr<const EncoderStack> encoder, VocabProjection projection,
                             std::vector<std::vector<int>> action_tokens)
    : encoder_(std::move(encoder)),
      projection_(std::move(projection)),
      action_tokens_(std::move(action_tokens)) {
  const auto d = static_cast<Eigen::Index>(encoder_->dimension());
  if (projection_.weights.rows() != d) throw ModelError("projection rows must equal encoder width");
  if (action_tokens_.empty()) throw ModelError("policy network needs at least one action");
  action_readout_ = Matrix::Zero(d, static_cast<Eigen::Index>(action_tokens_.size()));
  for (std::size_t i = 0; i < action_tokens_.size(); ++i) {
    const auto& toks = action_tokens_[i];
    if (toks.empty()) throw ModelError("action " + std::to_string(i) + " has no tokens");
    for (int id : toks) {
      if (id < 0 || id >= projection_.weights.cols()) throw ModelError("action token out of range");
      action_readout_.col(static_cast<Eigen::Index>(i)) += projection_.weights.col(id);
    }
    action_readout_.col(static_cast<Eigen::Index>(i)) /= static_cast<double>(toks.size());
  }
}

Matrix PolicyNetwork::hidden(const std::vector<int>& state_tokens) const {
  if (state_tokens.empty()) throw ModelError("empty state");
  {
    std::lock_guard lock(cache_mutex_);
    auto it = hidden_cache_.find(state_tokens);
    if (it != hidden_cache_.end()) return it->second;
  }
  Matrix h = encoder_->encode(state_tokens);
  std::lock_guard lock(cache_mutex_);
  if (hidden_cache_.size() >= 200000) hidden_cache_.clear();
  hidden_cache_.emplace(state_tokens, h);
  return h;
}

namespace {

// Intermediate values of one forward pass at the final position.
struct HeadPass {
  Vector query;  // dh
  Matrix keys;   // T x dh
  Matrix values; // T x dh
  Vector probs;  // T
};

struct ForwardPass {
  Matrix hidden;  // T x d
  std::vector<HeadPass> heads;
  Vector concat;   // d
  Vector readout;  // d
};

ForwardPass forward(const Matrix& hidden, const AttentionWeights& w) {
  ForwardPass f;
  f.hidden = hidden;
  const Eigen::Index T = hidden.rows();
  const auto dh = w.heads.front().query.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Vector last = hidden.row(T - 1).transpose();
  f.concat.resize(w.output.rows());
  for (std::size_t h = 0; h < w.heads.size(); ++h) {
    HeadPass p;
    p.query = w.heads[h].query.transpose() * last;
    p.keys = hidden * w.heads[h].key;
    p.values = hidden * w.heads[h].value;
    Vector scores = p.keys * p.query * scale;
    scores.array() -= scores.maxCoeff();
    p.probs = scores.array().exp();
    p.probs /= p.probs.sum();
    f.concat.segment(static_cast<Eigen::Index>(h) * dh, dh) = p.values.transpose() * p.probs;
    f.heads.push_back(std::move(p));
  }
  f.readout = w.output.transpose() * f.concat;
  return f;
}

}  // namespace

Vector PolicyNetwork::readout(const std::vector<int>& state_tokens, const AttentionWeights& weights) const {
  return forward(hidden(state_tokens), weights).readout;
}

Vector PolicyNetwork::logits(const std::vector<int>& state_tokens, const AttentionWeights& weights) const {
  return projection_.weights.transpose() * readout(state_tokens, weights);
}

std::vector<double> PolicyNetwork::q_vector(const std::vector<int>& state_tokens,
                                            const AttentionWeights& weights) const {
  const Vector q = action_readout_.transpose() * readout(state_tokens, weights);
  return {q.data(), q.data() + q.size()};
}

LossAndGrads PolicyNetwork::loss_and_grads(std::span<const QTarget> batch,
                                           const AttentionWeights& weights) const {
  if (batch.empty()) throw ModelError("empty training batch");
  LossAndGrads out;
  out.grads = AttentionWeights::zeros(weights.dimension(), weights.heads.size());
  const auto dh = weights.heads.front().query.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const auto& ex : batch) {
    if (ex.action >= action_tokens_.size()) {
      throw ModelError("action index " + std::to_string(ex.action) + " out of range");
    }
    if (!std::isfinite(ex.target)) throw ModelError("non-finite regression target");
    const ForwardPass f = forward(hidden(ex.state_tokens), weights);
    const Vector readout_dir = action_readout_.col(static_cast<Eigen::Index>(ex.action));
    const double err = readout_dir.dot(f.readout) - ex.target;
    out.loss += err * err * inv_n;

    const Vector d_readout = (2.0 * err * inv_n) * readout_dir;
    out.grads.output += f.concat * d_readout.transpose();
    const Vector d_concat = weights.output * d_readout;

    const Eigen::Index T = f.hidden.rows();
    const Vector last = f.hidden.row(T - 1).transpose();
    for (std::size_t h = 0; h < weights.heads.size(); ++h) {
      const HeadPass& p = f.heads[h];
      const Vector d_head = d_concat.segment(static_cast<Eigen::Index>(h) * dh, dh);
      const Vector d_probs = p.values * d_head;
      const Vector d_scores = p.probs.cwiseProduct(d_probs.array().matrix() -
                                                   Vector::Constant(T, p.probs.dot(d_probs)));
      const Vector d_query = scale * (p.keys.transpose() * d_scores);
      const Matrix d_keys = scale * d_scores * p.query.transpose();
      const Matrix d_values = p.probs * d_head.transpose();

      auto& g = out.grads.heads[h];
      g.query += last * d_query.transpose();
      g.key += f.hidden.transpose() * d_keys;
      g.value += f.hidden.transpose() * d_values;
    }
  }
  return out;
}

}  // namespace tabprompt
