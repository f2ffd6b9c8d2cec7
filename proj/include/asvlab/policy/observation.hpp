#pragma once

#include <array>
#include <cmath>

#include "asvlab/actuation.hpp"
#include "asvlab/common.hpp"
#include "asvlab/vessel_dynamics.hpp"

namespace asvlab::policy {

/// [prev_left, prev_right, u, v, r, cos(bearing), sin(bearing), distance]
struct Observation {
  std::array<double, 8> values{};

  double prev_left() const { return values[0]; }
  double prev_right() const { return values[1]; }
  double u() const { return values[2]; }
  double v() const { return values[3]; }
  double r() const { return values[4]; }
  double cos_bearing() const { return values[5]; }
  double sin_bearing() const { return values[6]; }
  double distance() const { return values[7]; }
};

/// Uniform sensor noise on the pose estimate (half-widths).
struct ObservationNoise {
  double position = 0.0;     // m
  double orientation = 0.0;  // rad
};

/// Goal geometry relative to the hull.
struct GoalGeometry {
  double distance;
  double bearing;  // rad, + to port (left)
};

inline GoalGeometry goal_geometry(Vec2 goal_local) {
  return {goal_local.norm(), std::atan2(goal_local.y, goal_local.x)};
}

inline Observation build_observation(const VesselState& state, const ThrusterCommand& prev_cmd,
                                     Vec2 goal_local, const ObservationNoise& noise, Rng* rng) {
  if (rng && (noise.position > 0.0 || noise.orientation > 0.0)) {
    // A pose error (dx, dy, dpsi) moves the goal the opposite way in the body frame.
    const double dx = symmetric(*rng, noise.position);
    const double dy = symmetric(*rng, noise.position);
    const double dpsi = symmetric(*rng, noise.orientation);
    const Vec2 shifted = goal_local - Vec2{dx, dy};
    const double c = std::cos(dpsi);
    const double s = std::sin(dpsi);
    goal_local = {c * shifted.x + s * shifted.y, -s * shifted.x + c * shifted.y};
  }
  const double d = goal_local.norm();
  double cb = 1.0;
  double sb = 0.0;
  if (d > 0.0) {
    const double bearing = std::atan2(goal_local.y, goal_local.x);
    cb = std::cos(bearing);
    sb = std::sin(bearing);
  }
  return {{prev_cmd.left, prev_cmd.right, state.u, state.v, state.r, cb, sb, d}};
}

}  // namespace asvlab::policy
