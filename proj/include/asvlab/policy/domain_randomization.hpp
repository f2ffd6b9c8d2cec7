#pragma once

#include <cmath>

#include "asvlab/common.hpp"
#include "asvlab/plant.hpp"
#include "asvlab/policy/observation.hpp"

namespace asvlab::policy {

struct DomainRandomizationConfig {
  bool enabled = true;
  double obs_position = 0.03;      // m
  double obs_orientation = 0.025;  // rad
  double initial_surge = 0.7;      // m/s
  double com = 0.05;               // m
  double wrench_force = 0.3;       // N
  double wrench_torque = 0.3;      // N m
  double effectiveness = 0.1;      // fraction
  double action_noise = 0.02;      // std of additive command noise
  double goal_range_min = 1.0;     // m
  double goal_range_max = 10.0;    // m

  void validate() const {
    auto nonneg = [](double v, const char* key) {
      if (!(v >= 0.0)) throw ConfigError(std::string("domain_randomization.") + key + " must be >= 0");
    };
    nonneg(obs_position, "obs_position");
    nonneg(obs_orientation, "obs_orientation");
    nonneg(initial_surge, "initial_surge");
    nonneg(com, "com");
    nonneg(wrench_force, "wrench_force");
    nonneg(wrench_torque, "wrench_torque");
    nonneg(action_noise, "action_noise");
    if (!(effectiveness >= 0.0 && effectiveness < 1.0)) {
      throw ConfigError("domain_randomization.effectiveness must be in [0, 1)");
    }
    if (!(goal_range_min > 0.0 && goal_range_min <= goal_range_max)) {
      throw ConfigError("domain_randomization.goal_range_min must be in (0, goal_range_max]");
    }
  }

  ObservationNoise observation_noise() const {
    return enabled ? ObservationNoise{obs_position, obs_orientation} : ObservationNoise{};
  }

  friend bool operator==(const DomainRandomizationConfig&,
                         const DomainRandomizationConfig&) = default;
};

struct EpisodeDraw {
  VesselParams params;
  VesselState initial;
  Wrench ambient;
  double effectiveness_left = 1.0;
  double effectiveness_right = 1.0;
  Vec2 goal;  // relative to the start pose, which is the world origin
};

/// Samples one training episode. Hydrodynamic coefficients stay nominal; only
/// the items listed in the config are perturbed. The goal is always random.
inline EpisodeDraw randomize_episode(const VesselParams& params,
                                     const DomainRandomizationConfig& dr, Rng& rng) {
  EpisodeDraw d{params, {}, {}, 1.0, 1.0, {}};
  if (dr.enabled) {
    d.initial.u = symmetric(rng, dr.initial_surge);
    d.params.cog_x = params.cog_x + symmetric(rng, dr.com);
    d.params.cog_y = params.cog_y + symmetric(rng, dr.com);
    d.ambient = {symmetric(rng, dr.wrench_force), symmetric(rng, dr.wrench_force),
                 symmetric(rng, dr.wrench_torque)};
    d.effectiveness_left = 1.0 + symmetric(rng, dr.effectiveness);
    d.effectiveness_right = 1.0 + symmetric(rng, dr.effectiveness);
  }
  const double range = uniform(rng, dr.goal_range_min, dr.goal_range_max);
  const double bearing = uniform(rng, -kPi, kPi);
  d.goal = {range * std::cos(bearing), range * std::sin(bearing)};
  return d;
}

}  // namespace asvlab::policy
