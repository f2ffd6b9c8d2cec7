#pragma once

// Batched point-goal environment used for training. Each slot owns a plant, a
// goal and its own random stream.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/plant.hpp"
#include "asvlab/policy/domain_randomization.hpp"
#include "asvlab/policy/observation.hpp"
#include "asvlab/policy/policy_net.hpp"
#include "asvlab/policy/reward.hpp"

namespace asvlab::policy {

struct EnvConfig {
  PlantConfig plant{};
  RewardConfig reward{};
  DomainRandomizationConfig dr{};
  double timeout = 60.0;        // s
  double out_of_bounds = 30.0;  // m from the goal

  void validate() const {
    plant.validate();
    reward.validate();
    dr.validate();
    if (!(timeout > 0.0)) throw ConfigError("env.timeout must be > 0");
    if (!(out_of_bounds > dr.goal_range_max)) {
      throw ConfigError("env.out_of_bounds must exceed domain_randomization.goal_range_max");
    }
  }
};

enum class EpisodeEnd { None, Success, Timeout, OutOfBounds };

struct EnvStep {
  std::vector<double> rewards;
  std::vector<double> dones;
  std::vector<EpisodeEnd> ends;
  Matrix terminal_obs;  // observation reached by episodes that ended this step
  std::vector<double> finished_returns;
  std::vector<int> finished_successes;
};

class PointGoalEnv {
 public:
  PointGoalEnv(const EnvConfig& cfg, int num_envs, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    slots_.resize(static_cast<std::size_t>(num_envs));
    for (int i = 0; i < num_envs; ++i) {
      auto& s = slots_[static_cast<std::size_t>(i)];
      s.rng.seed(child_seed(seed, static_cast<std::uint64_t>(i)));
      reset(s);
    }
  }

  int size() const { return static_cast<int>(slots_.size()); }
  const EnvConfig& config() const { return cfg_; }

  /// Current (noisy) observations, one column per env.
  Matrix observations() {
    Matrix obs(kObsDim, size());
    for (int i = 0; i < size(); ++i) write_obs(slots_[static_cast<std::size_t>(i)], obs, i);
    return obs;
  }

  /// Advances every env by one control period. `actions` are raw policy draws
  /// (kActDim x N); ended episodes are reset in place.
  EnvStep step(const Matrix& actions) {
    const int n = size();
    EnvStep out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                std::vector<EpisodeEnd>(n, EpisodeEnd::None), Matrix::Zero(kObsDim, n), {}, {}};
    for (int i = 0; i < n; ++i) {
      auto& s = slots_[static_cast<std::size_t>(i)];
      ThrusterCommand cmd =
          ThrusterCommand::clamped(actions(0, i), actions(1, i));
      if (cfg_.dr.enabled && cfg_.dr.action_noise > 0.0) {
        cmd = ThrusterCommand::clamped(cmd.left + normal(s.rng, 0.0, cfg_.dr.action_noise),
                                       cmd.right + normal(s.rng, 0.0, cfg_.dr.action_noise));
      }
      const VesselState& st = s.plant.control_step(cmd);
      const StepSnapshot snap = snapshot(s, st, cmd);
      const RewardBreakdown r = s.reward.step(s.prev, snap);
      s.prev = snap;
      s.prev_cmd = cmd;
      s.episode_return += r.total;
      out.rewards[i] = r.total;

      EpisodeEnd end = EpisodeEnd::None;
      if (r.success) {
        end = EpisodeEnd::Success;
      } else if (snap.distance > cfg_.out_of_bounds) {
        end = EpisodeEnd::OutOfBounds;
      } else if (st.t >= cfg_.timeout - 1e-9) {
        end = EpisodeEnd::Timeout;
      }
      out.ends[i] = end;
      if (end != EpisodeEnd::None) {
        write_obs(s, out.terminal_obs, i);
        out.dones[i] = 1.0;
        out.finished_returns.push_back(s.episode_return);
        out.finished_successes.push_back(end == EpisodeEnd::Success ? 1 : 0);
        reset(s);
      }
    }
    return out;
  }

 private:
  struct Slot {
    Plant plant;
    Vec2 goal;
    ThrusterCommand prev_cmd{};
    EpisodeReward reward{RewardConfig{}};
    StepSnapshot prev{};
    Rng rng;
    double episode_return = 0.0;
  };

  StepSnapshot snapshot(const Slot& s, const VesselState& st, const ThrusterCommand& cmd) const {
    const Vec2 local = world_to_body(s.goal, st);
    return {local.norm(), std::atan2(local.y, local.x), cmd, st.u};
  }

  static Vec2 world_to_body(Vec2 world, const VesselState& pose) {
    const Vec2 d = world - pose.position();
    const double c = std::cos(pose.psi);
    const double sn = std::sin(pose.psi);
    return {c * d.x + sn * d.y, -sn * d.x + c * d.y};
  }

  void write_obs(Slot& s, Matrix& obs, int col) {
    const VesselState& st = s.plant.state();
    const Observation o = build_observation(st, s.prev_cmd, world_to_body(s.goal, st),
                                            cfg_.dr.observation_noise(), &s.rng);
    for (int k = 0; k < kObsDim; ++k) obs(k, col) = o.values[static_cast<std::size_t>(k)];
  }

  void reset(Slot& s) {
    const EpisodeDraw d = randomize_episode(cfg_.plant.vessel, cfg_.dr, s.rng);
    PlantConfig pc = cfg_.plant;
    pc.vessel = d.params;
    pc.ambient.mode = cfg_.dr.enabled ? AmbientMode::ConstantWrench : AmbientMode::None;
    pc.ambient.wrench = d.ambient;
    pc.faults.effectiveness_scale_left *= d.effectiveness_left;
    pc.faults.effectiveness_scale_right *= d.effectiveness_right;
    s.plant = Plant(pc, d.initial);
    s.goal = d.goal;
    s.prev_cmd = {};
    s.reward = EpisodeReward(cfg_.reward);
    s.prev = snapshot(s, s.plant.state(), {});
    s.episode_return = 0.0;
  }

  EnvConfig cfg_;
  std::vector<Slot> slots_;
};

}  // namespace asvlab::policy
