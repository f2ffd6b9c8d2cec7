#include <gtest/gtest.h>

#include <cmath>

#include "asvlab/policy/controller.hpp"
#include "asvlab/policy/domain_randomization.hpp"
#include "asvlab/policy/observation.hpp"
#include "asvlab/policy/point_goal_env.hpp"
#include "asvlab/policy/policy_net.hpp"
#include "asvlab/policy/reward.hpp"
#include "asvlab/policy/trainer.hpp"

using namespace asvlab;
using namespace asvlab::policy;

namespace {

Matrix column(const Observation& o) {
  Matrix m(kObsDim, 1);
  for (int i = 0; i < kObsDim; ++i) m(i, 0) = o.values[static_cast<std::size_t>(i)];
  return m;
}

StepSnapshot snap(double d, double bearing, ThrusterCommand cmd, double speed) {
  return {d, bearing, cmd, speed};
}

}  // namespace

TEST(Observation, Examples) {
  const auto a = build_observation({}, {}, {3, 0}, {}, nullptr);
  const std::array<double, 8> expect{0, 0, 0, 0, 0, 1, 0, 3};
  EXPECT_EQ(a.values, expect);
  const auto b = build_observation({}, {}, {0, 2}, {}, nullptr);
  EXPECT_NEAR(b.cos_bearing(), 0.0, 1e-15);
  EXPECT_EQ(b.sin_bearing(), 1.0);
  EXPECT_EQ(b.distance(), 2.0);
  const auto c = build_observation({}, {}, {-1, 0}, {}, nullptr);
  EXPECT_EQ(c.cos_bearing(), -1.0);
  EXPECT_NEAR(c.sin_bearing(), 0.0, 1e-15);
  EXPECT_EQ(c.distance(), 1.0);
}

TEST(Observation, TrigIdentityUnderNoise) {
  Rng rng(9);
  ObservationNoise noise{0.03, 0.025};
  for (int i = 0; i < 10000; ++i) {
    const Vec2 g{uniform(rng, -10, 10), uniform(rng, -10, 10)};
    const auto o = build_observation({}, {}, g, noise, &rng);
    ASSERT_NEAR(o.cos_bearing() * o.cos_bearing() + o.sin_bearing() * o.sin_bearing(), 1.0, 1e-12);
    ASSERT_NEAR(o.distance(), g.norm(), 0.03 * std::sqrt(2.0) + 1e-12);
  }
}

TEST(Reward, Examples) {
  const RewardConfig cfg;
  const auto still = snap(5.0, 0.0, {0, 0}, 0.3);
  const auto a = reward_step(still, still, cfg, true);
  EXPECT_NEAR(a.total, 0.01 - 0.05, 1e-15);

  const auto fast = reward_step(still, snap(5.0, 0.0, {0, 0}, 0.7), cfg, true);
  EXPECT_NEAR(fast.terms[4], std::exp(-1.0) - 1.0, 1e-12);

  const auto hit = reward_step(snap(0.12, 0.0, {0, 0}, 0.3), snap(0.09, 0.0, {0, 0}, 0.3), cfg,
                               true);
  EXPECT_TRUE(hit.success);
  EXPECT_EQ(hit.terms[6], 10.0);
}

TEST(Reward, DecompositionIsExact) {
  Rng rng(4);
  const RewardConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    auto r = [&] {
      return snap(uniform(rng, 0, 10), uniform(rng, -kPi, kPi),
                  {uniform(rng, -1, 1), uniform(rng, -1, 1)}, uniform(rng, -1, 1.5));
    };
    const auto b = reward_step(r(), r(), cfg, true);
    double sum = 0.0;
    for (double t : b.terms) sum += t;
    ASSERT_EQ(sum, b.total);
  }
}

TEST(Reward, BonusAtMostOncePerEpisode) {
  Rng rng(8);
  EpisodeReward ep{RewardConfig{}};
  for (int e = 0; e < 10000; ++e) {
    ep.reset();
    int paid = 0;
    StepSnapshot prev = snap(uniform(rng, 0, 0.3), 0, {}, 0);
    for (int k = 0; k < 20; ++k) {
      const StepSnapshot cur = snap(uniform(rng, 0, 0.3), 0, {}, 0);
      paid += ep.step(prev, cur).success ? 1 : 0;
      prev = cur;
    }
    ASSERT_LE(paid, 1);
  }
}

TEST(Net, LayoutAndZeroWeights) {
  PolicyNet net;
  EXPECT_EQ(net.num_params(), (8 * 64 + 64) + (64 * 64 + 64) + (64 * 2 + 2) + 2 +
                                  (8 * 64 + 64) + (64 * 64 + 64) + (64 + 1));
  Rng rng(1);
  Matrix obs = Matrix::Random(kObsDim, 5);
  const auto f = forward(net, obs);
  EXPECT_TRUE(f.mean.isZero(0.0));
  EXPECT_TRUE(f.value.isZero(0.0));
}

TEST(Net, DuplicateObservationsGiveIdenticalRows) {
  PolicyNet net;
  Rng rng(2);
  net.initialize(rng, 1.0);
  Matrix obs(kObsDim, 2);
  obs.col(0) = Eigen::VectorXd::LinSpaced(kObsDim, -1, 1);
  obs.col(1) = obs.col(0);
  const auto f = forward(net, obs);
  EXPECT_EQ(f.mean.col(0), f.mean.col(1));
  EXPECT_EQ(f.value(0, 0), f.value(0, 1));
}

TEST(Net, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  PolicyNet net(NetShape{{6, 5}, {4}});
  net.initialize(rng, 1.0);
  Matrix obs = Matrix::Random(kObsDim, 3);
  // Scalar probe: sum of weighted outputs of both heads.
  Matrix wa = Matrix::Random(kActDim, 3);
  Matrix wv = Matrix::Random(1, 3);
  auto probe = [&](const PolicyNet& n) {
    return (n.action_mean(obs).cwiseProduct(wa)).sum() + (n.value(obs).cwiseProduct(wv)).sum();
  };
  MlpCache ca, cc;
  net.action_mean(obs, &ca);
  net.value(obs, &cc);
  Vector grad = Vector::Zero(net.num_params());
  net.actor().backward(net.params(), ca, wa, grad);
  net.critic().backward(net.params(), cc, wv, grad);
  PolicyNet probe_net = net;
  for (Eigen::Index j = 0; j < net.num_params(); ++j) {
    const double x = probe_net.params()[j];
    probe_net.params()[j] = x + 1e-6;
    const double up = probe(probe_net);
    probe_net.params()[j] = x - 1e-6;
    const double down = probe(probe_net);
    probe_net.params()[j] = x;
    const double fd = (up - down) / 2e-6;
    ASSERT_NEAR(grad[j], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "param " << j;
  }
}

TEST(Sampling, DegenerateStdClampsMean) {
  Rng rng(5);
  const double mean[2] = {1.7, -0.4};
  const auto s = sample_action(mean, {-30.0, -30.0}, rng);
  EXPECT_EQ(s.executed[0], 1.0);
  EXPECT_NEAR(s.executed[1], -0.4, 1e-12);
}

TEST(Sampling, MonteCarloStd) {
  Rng rng(6);
  const double mean[2] = {0, 0};
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = sample_action(mean, {0.0, 0.0}, rng).raw[0];
    sum += x;
    sq += x * x;
  }
  const double m = sum / n;
  EXPECT_NEAR(std::sqrt(sq / n - m * m), 1.0, 0.02);
}

TEST(Sampling, LogProbAtMean) {
  const double x[2] = {0.3, -0.2};
  const std::array<double, 2> ls{-0.5, 0.25};
  EXPECT_NEAR(gaussian_log_prob(x, x, ls), -std::log(2.0 * kPi) - (ls[0] + ls[1]), 1e-14);
}

TEST(DomainRandomization, ZeroWidthsKeepNominal) {
  DomainRandomizationConfig dr;
  dr.obs_position = dr.obs_orientation = dr.initial_surge = dr.com = 0.0;
  dr.wrench_force = dr.wrench_torque = dr.effectiveness = dr.action_noise = 0.0;
  Rng rng(10);
  const VesselParams p;
  const auto a = randomize_episode(p, dr, rng);
  const auto b = randomize_episode(p, dr, rng);
  EXPECT_EQ(a.params, p);
  EXPECT_EQ(a.initial.u, 0.0);
  EXPECT_EQ(a.ambient, (Wrench{}));
  EXPECT_NE(a.goal, b.goal);
}

TEST(DomainRandomization, DrawsStayInBounds) {
  const DomainRandomizationConfig dr;
  const VesselParams p;
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const auto d = randomize_episode(p, dr, rng);
    ASSERT_LE(std::abs(d.initial.u), dr.initial_surge);
    ASSERT_LE(std::abs(d.params.cog_y), dr.com);
    ASSERT_LE(std::abs(d.ambient.fx), dr.wrench_force);
    ASSERT_LE(std::abs(d.effectiveness_left - 1.0), dr.effectiveness);
    const double r = d.goal.norm();
    ASSERT_GE(r, dr.goal_range_min - 1e-12);
    ASSERT_LE(r, dr.goal_range_max + 1e-12);
  }
}

TEST(Env, DeterministicAndResetsEndedEpisodes) {
  EnvConfig cfg;
  cfg.timeout = 2.0;
  PointGoalEnv a(cfg, 8, 99), b(cfg, 8, 99);
  int ended = 0;
  for (int k = 0; k < 45; ++k) {
    Matrix act = Matrix::Constant(kActDim, 8, 0.2);
    const auto sa = a.step(act);
    const auto sb = b.step(act);
    ASSERT_EQ(sa.rewards, sb.rewards);
    for (auto e : sa.ends) ended += e != EpisodeEnd::None;
  }
  EXPECT_GE(ended, 16);  // every env timed out at least twice
  EXPECT_EQ(a.observations(), b.observations());
}

TEST(Controller, IdleIsZeroAndCommandsAreClamped) {
  PolicyNet net;
  Rng rng(13);
  net.initialize(rng, 1.0);
  net.params() *= 50.0;
  GoalController c(net);
  const auto cmd = c.command({}, {3, 1});
  EXPECT_LE(std::abs(cmd.left), 1.0);
  EXPECT_LE(std::abs(cmd.right), 1.0);
  EXPECT_EQ(c.idle(), (ThrusterCommand{}));
}

TEST(Trainer, ZeroIterationsReturnsInitialPolicy) {
  TrainConfig cfg;
  cfg.ppo.iterations = 0;
  const auto res = train(cfg, 7);
  PolicyNet ref(cfg.shape);
  Rng rng(child_seed(7, 0));
  ref.initialize(rng, cfg.ppo.init_std);
  EXPECT_EQ(res.net, ref);
  EXPECT_TRUE(res.curve.empty());
}

TEST(Trainer, SameSeedSameCurve) {
  TrainConfig cfg;
  cfg.ppo.iterations = 3;
  cfg.ppo.num_envs = 16;
  cfg.ppo.horizon = 16;
  const auto a = train(cfg, 21);
  const auto b = train(cfg, 21);
  ASSERT_EQ(a.curve.size(), 3u);
  EXPECT_EQ(a.net, b.net);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].mean_return, b.curve[i].mean_return);
    EXPECT_EQ(a.curve[i].kl, b.curve[i].kl);
  }
  const auto c = train(cfg, 22);
  EXPECT_FALSE(c.net == a.net);
}
