#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "asvlab/actuation.hpp"
#include "asvlab/common.hpp"

namespace asvlab::policy {

struct RewardConfig {
  std::array<double, 7> weights{1.0, 5.0, 0.01, -0.1, 1.0, -0.05, 10.0};
  double bearing_threshold = 0.1;  // rad
  double energy_max = 2.0;
  double v_min = 0.0;               // m/s
  double v_max = 0.6;               // m/s
  double kappa = -10.0;
  double success_distance = 0.1;    // m
  double dt = 0.1;                  // s

  void validate() const {
    if (!(success_distance > 0.0)) throw ConfigError("reward.success_distance must be > 0");
    if (!(v_min <= v_max)) throw ConfigError("reward.v_min must be <= reward.v_max");
    if (!(kappa < 0.0)) throw ConfigError("reward.kappa must be < 0");
    if (!(bearing_threshold > 0.0)) throw ConfigError("reward.bearing_threshold must be > 0");
    if (!(energy_max > 0.0)) throw ConfigError("reward.energy_max must be > 0");
    if (!(dt > 0.0)) throw ConfigError("reward.dt must be > 0");
  }
  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

/// What the reward needs to know about one control step.
struct StepSnapshot {
  double distance;
  double bearing;         // rad
  ThrusterCommand cmd;    // commands issued this step
  double forward_speed;   // body surge, m/s
};

struct RewardBreakdown {
  std::array<double, 7> terms{};  // weighted contributions lambda_n * rho_n
  double total = 0.0;
  bool success = false;
};

/// Seven-term shaped reward. `success_available` is false once the one-time
/// success bonus has been paid in the current episode.
inline RewardBreakdown reward_step(const StepSnapshot& prev, const StepSnapshot& curr,
                                   const RewardConfig& cfg, bool success_available) {
  std::array<double, 7> raw{};
  raw[0] = prev.distance - curr.distance;
  raw[1] = std::cos(curr.bearing) - std::cos(prev.bearing);
  const double b = curr.bearing / cfg.bearing_threshold;
  raw[2] = std::max(0.0, 1.0 - b * b);
  raw[3] = (curr.cmd.left * curr.cmd.left + curr.cmd.right * curr.cmd.right) * cfg.dt /
           cfg.energy_max;
  const double excess = std::max({0.0, curr.forward_speed - cfg.v_max,
                                  cfg.v_min - curr.forward_speed});
  raw[4] = std::exp(cfg.kappa * excess) - 1.0;
  raw[5] = 1.0;
  const bool success = success_available && curr.distance < cfg.success_distance;
  raw[6] = success ? 1.0 : 0.0;

  RewardBreakdown out;
  out.success = success;
  for (std::size_t n = 0; n < raw.size(); ++n) {
    out.terms[n] = cfg.weights[n] * raw[n];
    out.total += out.terms[n];
  }
  return out;
}

/// Per-episode wrapper enforcing the at-most-once success bonus.
class EpisodeReward {
 public:
  explicit EpisodeReward(const RewardConfig& cfg) : cfg_(cfg) {}

  void reset() { paid_ = false; }
  bool success_paid() const { return paid_; }

  RewardBreakdown step(const StepSnapshot& prev, const StepSnapshot& curr) {
    RewardBreakdown r = reward_step(prev, curr, cfg_, !paid_);
    paid_ = paid_ || r.success;
    return r;
  }

 private:
  RewardConfig cfg_;
  bool paid_ = false;
};

}  // namespace asvlab::policy
