#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/policy/point_goal_env.hpp"
#include "asvlab/policy/policy_net.hpp"
#include "asvlab/policy/ppo.hpp"

namespace asvlab::policy {

struct TrainConfig {
  EnvConfig env{};
  PpoConfig ppo{};
  NetShape shape{};

  void validate() const {
    env.validate();
    ppo.validate();
  }
};

struct CurveRow {
  int iteration = 0;
  double mean_return = 0.0;   // over episodes finished this iteration
  double success_rate = 0.0;  // same episodes
  int episodes = 0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double kl = 0.0;
  double learning_rate = 0.0;
  double action_std = 0.0;
};

struct TrainResult {
  PolicyNet net;
  std::vector<CurveRow> curve;
};

/// Raised when training produces non-finite values; carries the last finite
/// network so callers can checkpoint it.
class TrainingDiverged : public SimulationFault {
 public:
  TrainingDiverged(const std::string& what, PolicyNet last_good, int iteration)
      : SimulationFault(what), last_good_(std::move(last_good)), iteration_(iteration) {}
  const PolicyNet& last_good() const { return last_good_; }
  int iteration() const { return iteration_; }

 private:
  PolicyNet last_good_;
  int iteration_;
};

using ProgressFn = std::function<void(const CurveRow&)>;

inline TrainResult train(const TrainConfig& cfg, std::uint64_t seed,
                         const ProgressFn& progress = {}) {
  cfg.validate();
  const PpoConfig& pc = cfg.ppo;
  Rng init_rng(child_seed(seed, 0));
  Rng policy_rng(child_seed(seed, 1));
  TrainResult result{PolicyNet(cfg.shape), {}};
  PolicyNet& net = result.net;
  net.initialize(init_rng, pc.init_std);
  if (pc.iterations == 0) return result;

  PointGoalEnv env(cfg.env, pc.num_envs, child_seed(seed, 2));
  Adam opt(net.num_params());
  double lr = pc.learning_rate;
  Matrix obs = env.observations();
  const int n = pc.num_envs;
  double last_return = 0.0;
  double last_success = 0.0;

  for (int it = 0; it < pc.iterations; ++it) {
    RolloutBuffer buf(n, pc.horizon);
    for (int i = 0; i < kActDim; ++i) buf.log_std[i] = net.log_std(i);
    std::vector<double> returns;
    std::vector<int> successes;
    for (int t = 0; t < pc.horizon; ++t) {
      const ForwardResult f = forward(net, obs);
      Matrix actions(kActDim, n);
      for (int e = 0; e < n; ++e) {
        const auto j = static_cast<Eigen::Index>(buf.index(t, e));
        const SampledAction a = sample_action(f.mean.col(e).data(), f.log_std, policy_rng);
        for (int k = 0; k < kActDim; ++k) actions(k, e) = a.raw[static_cast<std::size_t>(k)];
        buf.observations.col(j) = obs.col(e);
        buf.actions.col(j) = actions.col(e);
        buf.means.col(j) = f.mean.col(e);
        buf.log_probs[static_cast<std::size_t>(j)] = a.log_prob;
        buf.values[static_cast<std::size_t>(j)] = f.value(0, e);
      }
      EnvStep s = env.step(actions);
      bool any_timeout = false;
      for (int e = 0; e < n; ++e) any_timeout |= s.ends[e] == EpisodeEnd::Timeout;
      Matrix terminal_values;
      if (any_timeout) terminal_values = net.value(s.terminal_obs);
      for (int e = 0; e < n; ++e) {
        const auto j = buf.index(t, e);
        double r = s.rewards[e];
        // Time limits are not part of the task: bootstrap through them.
        if (s.ends[e] == EpisodeEnd::Timeout) r += pc.gamma * terminal_values(0, e);
        buf.rewards[j] = r;
        buf.dones[j] = s.dones[e];
      }
      returns.insert(returns.end(), s.finished_returns.begin(), s.finished_returns.end());
      successes.insert(successes.end(), s.finished_successes.begin(), s.finished_successes.end());
      obs = env.observations();
    }
    const Matrix boot = net.value(obs);
    std::vector<double> bootstrap(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) bootstrap[static_cast<std::size_t>(e)] = boot(0, e);
    buf.compute_advantages(bootstrap, pc.gamma, pc.lambda);

    const PolicyNet before = net;
    UpdateStats stats;
    try {
      stats = ppo_update(buf, net, opt, lr, pc, policy_rng);
    } catch (const SimulationFault& e) {
      throw TrainingDiverged(e.what(), before, it);
    }
    if (!net.finite()) throw TrainingDiverged("non-finite parameters after update", before, it);

    CurveRow row;
    row.iteration = it;
    row.episodes = static_cast<int>(returns.size());
    if (!returns.empty()) {
      double sr = 0.0, sum = 0.0;
      for (std::size_t k = 0; k < returns.size(); ++k) {
        sum += returns[k];
        sr += successes[k];
      }
      last_return = sum / static_cast<double>(returns.size());
      last_success = sr / static_cast<double>(returns.size());
    }
    if (!std::isfinite(last_return)) {
      throw TrainingDiverged("mean return is not finite", before, it);
    }
    row.mean_return = last_return;
    row.success_rate = last_success;
    row.surrogate = stats.surrogate;
    row.value_loss = stats.value;
    row.kl = stats.kl;
    row.learning_rate = stats.learning_rate;
    row.action_std = 0.5 * (std::exp(net.log_std(0)) + std::exp(net.log_std(1)));
    result.curve.push_back(row);
    if (progress) progress(row);
  }
  return result;
}

}  // namespace asvlab::policy
