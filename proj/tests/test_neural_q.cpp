#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tabprompt/errors.hpp"
#include "tabprompt/neural_q.hpp"

using namespace tabprompt;

namespace {

// Returns a fixed hidden matrix regardless of the tokens.
class ConstantEncoder final : public EncoderStack {
 public:
  explicit ConstantEncoder(Matrix h) : h_(std::move(h)) {}
  Matrix encode(std::span<const int>) const override { return h_; }
  std::size_t dimension() const override { return static_cast<std::size_t>(h_.cols()); }

 private:
  Matrix h_;
};

// d = 2, two heads of width 1, one position: readout = (1, 0).
struct HandNetwork {
  std::shared_ptr<ConstantEncoder> encoder = std::make_shared<ConstantEncoder>(Matrix{{1.0, 0.0}});
  AttentionWeights weights = AttentionWeights::zeros(2, 2);
  VocabProjection projection{Matrix{{2.0, 4.0, 0.0}, {7.0, -1.0, 0.0}}};

  HandNetwork() {
    weights.heads[0].value(0, 0) = 1.0;
    weights.output = Matrix::Identity(2, 2);
  }
};

}  // namespace

TEST(QVector, SingleTokenNamesReadTheirLogit) {
  HandNetwork h;
  PolicyNetwork net(h.encoder, h.projection, {{0}, {1}});
  EXPECT_EQ(net.q_vector({0}, h.weights), (std::vector<double>{2.0, 4.0}));
}

TEST(QVector, MultiTokenNameAveragesLogits) {
  HandNetwork h;
  PolicyNetwork net(h.encoder, h.projection, {{0, 1}});
  EXPECT_EQ(net.q_vector({0}, h.weights), (std::vector<double>{3.0}));
}

TEST(QVector, RejectsEmptyActionsAndStates) {
  HandNetwork h;
  EXPECT_THROW(PolicyNetwork(h.encoder, h.projection, {{0}, {}}), ModelError);
  EXPECT_THROW(PolicyNetwork(h.encoder, h.projection, {}), ModelError);
  PolicyNetwork net(h.encoder, h.projection, {{0}});
  EXPECT_THROW(net.q_vector({}, h.weights), ModelError);
}

TEST(QVector, MatchesNaiveLoopOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::TinyNetwork tiny(seed);
    for (const auto& s : tiny.states) {
      const auto expect = oracle::naive_q(tiny.encoder->encode(s), tiny.weights,
                                          tiny.network->projection().weights, tiny.network->action_tokens());
      const auto got = tiny.network->q_vector(s, tiny.weights);
      ASSERT_EQ(got.size(), expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expect[i], 1e-10);
    }
  }
}

TEST(QVector, LinearInProjectionScale) {
  oracle::TinyNetwork tiny(3);
  VocabProjection scaled{tiny.network->projection().weights * 2.5};
  PolicyNetwork net2(tiny.encoder, scaled, tiny.network->action_tokens());
  const auto a = tiny.network->q_vector(tiny.states[0], tiny.weights);
  const auto b = net2.q_vector(tiny.states[0], tiny.weights);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.5 * a[i], 1e-12 * (1 + std::abs(a[i])));
}

TEST(ActionDistribution, Basics) {
  const auto u = action_distribution(std::vector<double>{0, 0, 0});
  for (double p : u) EXPECT_NEAR(p, 1.0 / 3, 1e-15);
  const auto big = action_distribution(std::vector<double>{1000, 0});
  EXPECT_NEAR(big[0], 1.0, 1e-12);
  EXPECT_GE(big[1], 0.0);
  EXPECT_TRUE(std::isfinite(big[1]));
  EXPECT_THROW(action_distribution(std::vector<double>{}), ModelError);
}

TEST(ActionDistribution, ShiftInvariantAndNormalized) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> q(1 + rng.below(8));
    for (double& v : q) v = rng.normal() * 5;
    auto shifted = q;
    const double c = rng.normal() * 100;
    for (double& v : shifted) v += c;
    const auto a = action_distribution(q);
    const auto b = action_distribution(shifted);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    EXPECT_EQ(std::max_element(a.begin(), a.end()) - a.begin(),
              std::max_element(b.begin(), b.end()) - b.begin());
  }
}

TEST(LossAndGrads, ZeroAtTargets) {
  oracle::TinyNetwork tiny(4);
  std::vector<QTarget> batch;
  for (const auto& s : tiny.states) batch.push_back({s, 1, tiny.network->q_vector(s, tiny.weights)[1]});
  const auto out = tiny.network->loss_and_grads(batch, tiny.weights);
  // The batched pass and q_vector agree only to rounding.
  EXPECT_NEAR(out.loss, 0.0, 1e-24);
  out.grads.for_each([](const Matrix& m) { EXPECT_LT(m.cwiseAbs().maxCoeff(), 1e-12); });
}

TEST(LossAndGrads, SingleElementIsSquaredError) {
  oracle::TinyNetwork tiny(5);
  const double q = tiny.network->q_vector(tiny.states[0], tiny.weights)[2];
  const std::vector<QTarget> batch{{tiny.states[0], 2, q + 1.5}};
  EXPECT_NEAR(tiny.network->loss_and_grads(batch, tiny.weights).loss, 2.25, 1e-12);
}

TEST(LossAndGrads, RejectsBadInput) {
  oracle::TinyNetwork tiny(6);
  EXPECT_THROW(tiny.network->loss_and_grads({}, tiny.weights), ModelError);
  const std::vector<QTarget> bad{{tiny.states[0], 99, 0.0}};
  EXPECT_THROW(tiny.network->loss_and_grads(bad, tiny.weights), ModelError);
  const std::vector<QTarget> nan{{tiny.states[0], 0, NAN}};
  EXPECT_THROW(tiny.network->loss_and_grads(nan, tiny.weights), ModelError);
}

TEST(LossAndGrads, MatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    oracle::TinyNetwork tiny(seed);
    const auto check = oracle::check_gradients(*tiny.network, tiny.weights, oracle::random_batch(tiny, seed));
    EXPECT_LT(check.max_relative_error, 1e-4) << "seed " << seed;
    EXPECT_EQ(check.entries, tiny.weights.parameter_count());
  }
}

TEST(AttentionWeights, ShapesAndInitScale) {
  const auto w = AttentionWeights::random(64, 2, 1);
  ASSERT_EQ(w.heads.size(), 2u);
  EXPECT_EQ(w.heads[0].query.rows(), 64);
  EXPECT_EQ(w.heads[0].query.cols(), 32);
  EXPECT_EQ(w.output.rows(), 64);
  EXPECT_EQ(w.parameter_count(), 2u * 3 * 64 * 32 + 64 * 64);
  double sq = 0;
  w.for_each([&](const Matrix& m) { sq += m.squaredNorm(); });
  EXPECT_NEAR(sq / static_cast<double>(w.parameter_count()), 1.0 / 64, 0.1 / 64);
  EXPECT_THROW(AttentionWeights::zeros(7, 2), ConfigError);
}

TEST(Optimizer, ZeroGradientsLeaveParams) {
  auto p = AttentionParams::init(8, 2, 3);
  const auto before = p.weights;
  optimizer_step(p, AttentionWeights::zeros(8, 2), 1e-4);
  EXPECT_EQ(p.optimizer.step, 1);
  EXPECT_EQ(p.weights.output, before.output);
}

TEST(Optimizer, FirstStepMovesBySignTimesRate) {
  auto p = AttentionParams::init(8, 2, 3);
  const auto before = p.weights;
  auto g = AttentionWeights::random(8, 2, 9);
  optimizer_step(p, g, 1e-4);
  for (Eigen::Index i = 0; i < g.output.size(); ++i) {
    const double delta = p.weights.output.data()[i] - before.output.data()[i];
    const double sign = g.output.data()[i] > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(delta, -sign * 1e-4, 1e-9);
  }
}

TEST(Optimizer, DeterministicAndRejectsNonFinite) {
  auto a = AttentionParams::init(8, 2, 3);
  auto b = a;
  const auto g = AttentionWeights::random(8, 2, 4);
  optimizer_step(a, g, 1e-3);
  optimizer_step(b, g, 1e-3);
  EXPECT_EQ(a.weights.output, b.weights.output);
  auto bad = g;
  bad.output(0, 0) = INFINITY;
  const auto snapshot = a.weights.output;
  EXPECT_THROW(optimizer_step(a, bad, 1e-3), ModelError);
  EXPECT_EQ(a.weights.output, snapshot);
  EXPECT_EQ(a.optimizer.step, 1);
  EXPECT_THROW(optimizer_step(a, AttentionWeights::zeros(16, 2), 1e-3), ModelError);
}

TEST(FrozenLayers, UnchangedByTraining) {
  oracle::TinyNetwork tiny(8);
  const Matrix h0 = tiny.encoder->encode(tiny.states[0]);
  const Matrix proj0 = tiny.network->projection().weights;
  AttentionParams p{tiny.weights, {AttentionWeights::zeros(8, 2), AttentionWeights::zeros(8, 2), 0}};
  for (int i = 0; i < 20; ++i) {
    optimizer_step(p, tiny.network->loss_and_grads(oracle::random_batch(tiny, i), p.weights).grads, 1e-2);
  }
  EXPECT_EQ(tiny.encoder->encode(tiny.states[0]), h0);
  EXPECT_EQ(tiny.network->projection().weights, proj0);
}
