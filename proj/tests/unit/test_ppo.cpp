#include <gtest/gtest.h>

#include <cmath>

#include "asvlab/policy/gae.hpp"
#include "asvlab/policy/ppo.hpp"
#include "oracles.hpp"

using namespace asvlab;
using namespace asvlab::policy;

TEST(Gae, OneStepTdWhenLambdaZero) {
  const std::vector<double> r{1, 2, 3}, v{0.5, -1, 2}, d{0, 1, 0};
  const auto out = gae(r, v, d, 4.0, 0.9, 0.0);
  EXPECT_NEAR(out.advantages[0], 1 + 0.9 * -1 - 0.5, 1e-12);
  EXPECT_NEAR(out.advantages[1], 2 - (-1), 1e-12);
  EXPECT_NEAR(out.advantages[2], 3 + 0.9 * 4 - 2, 1e-12);
}

TEST(Gae, MonteCarloWhenLambdaOne) {
  const std::vector<double> r{1, -2, 0.5, 3}, v{0.1, 0.2, 0.3, 0.4}, d(4, 0.0);
  const double g = 0.95, boot = 1.5;
  const auto out = gae(r, v, d, boot, g, 1.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double tail = 0.0, w = 1.0;
    for (std::size_t k = t; k < r.size(); ++k, w *= g) tail += w * r[k];
    tail += w * boot;
    EXPECT_NEAR(out.advantages[t], tail - v[t], 1e-12);
    EXPECT_NEAR(out.returns[t], tail, 1e-12);
  }
}

TEST(Gae, MatchesBruteForce) {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = oracle::random_gae_case(rng, 12);
    const auto out = gae(c.rewards, c.values, c.dones, c.bootstrap, c.gamma, c.lambda);
    const auto ref = oracle::brute_force_gae(c.rewards, c.values, c.dones, c.bootstrap, c.gamma,
                                             c.lambda);
    for (std::size_t t = 0; t < ref.size(); ++t) ASSERT_NEAR(out.advantages[t], ref[t], 1e-10);
  }
}

TEST(Gae, SizeMismatchFaults) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(gae(a, b, a, 0, 0.9, 0.9), SimulationFault);
}

TEST(Ppo, NormalizedAdvantages) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x;
    for (int i = 0; i < 64; ++i) x.push_back(normal(rng, 3.0, 7.0));
    normalize(x);
    double m = 0.0, s = 0.0;
    for (double a : x) m += a;
    m /= x.size();
    for (double a : x) s += (a - m) * (a - m);
    EXPECT_LT(std::abs(m), 1e-8);
    EXPECT_LT(std::abs(std::sqrt(s / x.size()) - 1.0), 1e-6);
  }
}

TEST(Ppo, LossGradientMatchesFiniteDifferences) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = oracle::random_grad_case(rng);
    Vector g;
    ppo_loss(c.net, c.mb, c.cfg, &g);
    const Vector fd = oracle::finite_difference_gradient(c);
    EXPECT_LT(oracle::relative_error(g, fd), 1e-4) << "trial " << trial;
  }
}

TEST(Ppo, LossGradientWithoutValueClip) {
  Rng rng(78);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = oracle::random_grad_case(rng);
    c.cfg.clip_value = false;
    Vector g;
    ppo_loss(c.net, c.mb, c.cfg, &g);
    EXPECT_LT(oracle::relative_error(g, oracle::finite_difference_gradient(c)), 1e-4);
  }
}

TEST(Ppo, ClippedSampleHasNoPolicyGradient) {
  Rng rng(79);
  auto c = oracle::random_grad_case(rng);
  auto& mb = c.mb;
  // Keep one sample; put its ratio at 1.5 with a positive advantage.
  mb.obs = mb.obs.leftCols(1).eval();
  mb.actions = mb.actions.leftCols(1).eval();
  mb.old_means = mb.old_means.leftCols(1).eval();
  const Matrix mean = c.net.action_mean(mb.obs);
  std::array<double, kActDim> ls{c.net.log_std(0), c.net.log_std(1)};
  const double lp = gaussian_log_prob(mb.actions.col(0).data(), mean.col(0).data(), ls);
  mb.old_log_probs = {lp - std::log(1.5)};
  mb.advantages = {1.0};
  mb.returns = {0.0};
  mb.old_values = {c.net.value(mb.obs)(0, 0)};
  c.cfg.value_coef = 0.0;
  c.cfg.entropy_coef = 0.0;
  Vector g;
  const auto loss = ppo_loss(c.net, mb, c.cfg, &g);
  EXPECT_EQ(loss.clip_fraction, 1.0);
  EXPECT_EQ(g.norm(), 0.0);
  // Same ratio, negative advantage: the unclipped branch is active.
  mb.advantages = {-1.0};
  ppo_loss(c.net, mb, c.cfg, &g);
  EXPECT_GT(g.norm(), 0.0);
}

TEST(Ppo, ZeroAdvantageMovesOnlyTheCritic) {
  Rng rng(80);
  PolicyNet net(NetShape{{8, 8}, {8, 8}});
  net.initialize(rng, 1.0);
  RolloutBuffer buf(4, 8);
  buf.observations = Matrix::Random(kObsDim, 32);
  buf.means = net.action_mean(buf.observations);
  buf.log_std = {net.log_std(0), net.log_std(1)};
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const auto s = sample_action(buf.means.col(c).data(), buf.log_std, rng);
    buf.actions(0, c) = s.raw[0];
    buf.actions(1, c) = s.raw[1];
    buf.log_probs[i] = s.log_prob;
    buf.returns[i] = normal(rng);
    buf.values[i] = buf.returns[i] + 0.05;
  }
  const Vector before = net.params();
  Adam opt(net.num_params());
  double lr = 1e-3;
  PpoConfig cfg;
  ppo_update(buf, net, opt, lr, cfg, rng);
  const auto actor_end = static_cast<Eigen::Index>(net.critic().offset());
  EXPECT_EQ((net.params().head(actor_end) - before.head(actor_end)).norm(), 0.0);
  EXPECT_GT((net.params() - before).norm(), 0.0);
}

TEST(Ppo, NonFiniteLossRestoresParameters) {
  Rng rng(81);
  PolicyNet net(NetShape{{4}, {4}});
  net.initialize(rng, 1.0);
  RolloutBuffer buf(2, 4);
  buf.observations = Matrix::Random(kObsDim, 8);
  buf.means = net.action_mean(buf.observations);
  buf.returns.assign(8, std::numeric_limits<double>::quiet_NaN());
  const Vector before = net.params();
  Adam opt(net.num_params());
  double lr = 1e-3;
  EXPECT_THROW(ppo_update(buf, net, opt, lr, PpoConfig{}, rng), SimulationFault);
  EXPECT_EQ(net.params(), before);
}

TEST(Ppo, AdaptiveLearningRate) {
  PpoConfig cfg;
  EXPECT_DOUBLE_EQ(adapt_learning_rate(1e-3, 0.02, cfg), 5e-4);
  EXPECT_DOUBLE_EQ(adapt_learning_rate(1e-3, 0.001, cfg), 1.5e-3);
  EXPECT_DOUBLE_EQ(adapt_learning_rate(1e-3, 0.01, cfg), 1e-3);
  EXPECT_DOUBLE_EQ(adapt_learning_rate(9e-3, 0.0, cfg), 1e-2);
  EXPECT_DOUBLE_EQ(adapt_learning_rate(1.5e-6, 1.0, cfg), 1e-6);
}

TEST(Ppo, KlOfIdenticalPoliciesIsZero) {
  Matrix m = Matrix::Random(kActDim, 10);
  EXPECT_NEAR(mean_kl(m, {0.1, -0.3}, m, {0.1, -0.3}), 0.0, 1e-15);
  EXPECT_GT(mean_kl(m, {0.1, -0.3}, m.array() + 0.1, {0.1, -0.3}), 0.0);
}

TEST(Ppo, ConfigValidation) {
  PpoConfig cfg;
  cfg.gamma = 1.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.horizon = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
