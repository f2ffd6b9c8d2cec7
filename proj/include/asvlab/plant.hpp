#pragma once

// One simulated vessel with its actuation chain, stepped at the control rate.

#include <cmath>

#include "asvlab/actuation.hpp"
#include "asvlab/common.hpp"
#include "asvlab/vessel_dynamics.hpp"

namespace asvlab {

inline constexpr double kPhysicsDt = 0.02;
inline constexpr double kControlDt = 0.1;
inline constexpr int kSubsteps = 5;

struct PlantConfig {
  VesselParams vessel{};
  ThrustCurve curve{};
  double slew_rate = 1.0;
  bool limiter_enabled = true;
  ActuationFaults faults{};
  AmbientDisturbance ambient{};
  Backend backend = Backend::A;
  double physics_dt = kPhysicsDt;
  int substeps = kSubsteps;

  double control_dt() const { return physics_dt * substeps; }

  void validate() const {
    vessel.validate();
    faults.validate();
    ambient.validate();
    if (!(slew_rate > 0.0)) throw ConfigError("limiter.slew_rate must be > 0");
    if (!(physics_dt > 0.0 && physics_dt <= 0.1)) {
      throw ConfigError("sim.physics_dt must be in (0, 0.1]");
    }
    if (substeps < 1) throw ConfigError("sim.substeps must be >= 1");
  }
};

class Plant {
 public:
  Plant() = default;
  explicit Plant(const PlantConfig& cfg, const VesselState& initial = {})
      : cfg_(cfg), state_(initial) {
    limiter_.slew_rate = cfg.slew_rate;
    limiter_.enabled = cfg.limiter_enabled;
  }

  /// Holds `cmd` for one control period. The limiter runs at the physics rate.
  const VesselState& control_step(const ThrusterCommand& cmd) {
    const double dt = cfg_.physics_dt;
    for (int k = 0; k < cfg_.substeps; ++k) {
      const auto act = actuate(cmd, limiter_, cfg_.faults, cfg_.curve,
                               cfg_.vessel.thruster_lever, dt);
      limiter_ = act.limiter;
      const Wrench ambient = ambient_sample(cfg_.ambient, cfg_.vessel, state_.t);
      state_ = step(state_, act.wrench, ambient, cfg_.vessel, dt, cfg_.backend);
    }
    return state_;
  }

  const VesselState& state() const { return state_; }
  const ThrusterCommand& realized() const { return limiter_.realized; }
  const PlantConfig& config() const { return cfg_; }

 private:
  PlantConfig cfg_{};
  RateLimiterState limiter_{};
  VesselState state_{};
};

}  // namespace asvlab
