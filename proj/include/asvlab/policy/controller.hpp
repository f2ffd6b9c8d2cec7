#pragma once

#include "asvlab/actuation.hpp"
#include "asvlab/perception.hpp"
#include "asvlab/policy/observation.hpp"
#include "asvlab/policy/policy_net.hpp"

namespace asvlab::policy {

/// Deterministic deployment of a trained policy: the action mean, clamped.
class GoalController {
 public:
  explicit GoalController(const PolicyNet& net) : net_(&net) {}

  ThrusterCommand command(const VesselState& pose_estimate, Vec2 goal_world) {
    const Observation o =
        build_observation(pose_estimate, prev_, world_to_local(goal_world, pose_estimate), {},
                          nullptr);
    Matrix obs(kObsDim, 1);
    for (int k = 0; k < kObsDim; ++k) obs(k, 0) = o.values[static_cast<std::size_t>(k)];
    const ForwardResult f = forward(*net_, obs);
    prev_ = ThrusterCommand::clamped(f.mean(0, 0), f.mean(1, 0));
    return prev_;
  }

  /// Zero command while no goal is known yet.
  ThrusterCommand idle() {
    prev_ = {};
    return prev_;
  }

 private:
  const PolicyNet* net_;
  ThrusterCommand prev_{};
};

}  // namespace asvlab::policy
