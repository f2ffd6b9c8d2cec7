#pragma once

// Thruster command path: loss-of-effectiveness faults scale the command, the
// MCU slew limiter shapes it, and the bollard-pull curve maps it to force.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/vessel_dynamics.hpp"

namespace asvlab {

struct ThrusterCommand {
  double left = 0.0;
  double right = 0.0;

  static ThrusterCommand clamped(double left, double right) {
    return {std::clamp(left, -1.0, 1.0), std::clamp(right, -1.0, 1.0)};
  }
  friend bool operator==(const ThrusterCommand&, const ThrusterCommand&) = default;
};

struct CurvePoint {
  double command;
  double force;  // N
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

class ThrustCurve {
 public:
  ThrustCurve() : ThrustCurve(default_points(), 0.05) {}

  ThrustCurve(std::vector<CurvePoint> points, double deadband)
      : points_(std::move(points)), deadband_(deadband) {
    validate();
  }

  /// Bollard-pull defaults: weak reverse (1 N), 20 N forward saturation.
  static std::vector<CurvePoint> default_points() {
    return {{-1.0, -1.0}, {-0.05, 0.0}, {0.05, 0.0}, {0.5, 8.0}, {1.0, 20.0}};
  }

  const std::vector<CurvePoint>& points() const { return points_; }
  double deadband() const { return deadband_; }

  /// Piecewise-linear interpolation, zero inside the deadband.
  double eval(double cmd) const {
    cmd = std::clamp(cmd, -1.0, 1.0);
    if (std::abs(cmd) <= deadband_) return 0.0;
    auto hi = std::lower_bound(points_.begin(), points_.end(), cmd,
                               [](const CurvePoint& p, double c) { return p.command < c; });
    if (hi == points_.begin()) return hi->force;
    if (hi == points_.end()) return points_.back().force;
    const auto lo = std::prev(hi);
    const double span = hi->command - lo->command;
    if (span <= 0.0) return hi->force;
    const double w = (cmd - lo->command) / span;
    return lo->force + w * (hi->force - lo->force);
  }

  friend bool operator==(const ThrustCurve&, const ThrustCurve&) = default;

 private:
  void validate() const {
    if (points_.size() < 2) throw ConfigError("thrust_curve.points needs at least 2 breakpoints");
    if (!(deadband_ >= 0.0 && deadband_ < 1.0)) {
      throw ConfigError("thrust_curve.deadband must be in [0, 1)");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (points_[i].command <= points_[i - 1].command) {
        throw ConfigError("thrust_curve.points commands must be strictly increasing");
      }
      if (points_[i].force < points_[i - 1].force) {
        throw ConfigError("thrust_curve.points forces must be non-decreasing");
      }
    }
    if (points_.front().command > -1.0 || points_.back().command < 1.0) {
      throw ConfigError("thrust_curve.points must span [-1, 1]");
    }
    if (eval(0.0) != 0.0) throw ConfigError("thrust_curve must pass through (0, 0)");
    if (std::abs(points_.front().force) > std::abs(points_.back().force)) {
      throw ConfigError("thrust_curve reverse saturation must not exceed forward saturation");
    }
  }

  std::vector<CurvePoint> points_;
  double deadband_;
};

inline double curve_eval(const ThrustCurve& curve, double cmd) { return curve.eval(cmd); }

struct RateLimiterState {
  ThrusterCommand realized{};
  double slew_rate = 1.0;  // full-scale units per second
  bool enabled = true;
};

/// Moves each channel toward the commanded value by at most slew_rate * dt.
inline std::pair<RateLimiterState, ThrusterCommand> slew_limit(RateLimiterState limiter,
                                                               const ThrusterCommand& commanded,
                                                               double dt) {
  const ThrusterCommand target = ThrusterCommand::clamped(commanded.left, commanded.right);
  if (!limiter.enabled) {
    limiter.realized = target;
    return {limiter, target};
  }
  const double max_delta = limiter.slew_rate * dt;
  auto move = [max_delta](double from, double to) {
    return from + std::clamp(to - from, -max_delta, max_delta);
  };
  limiter.realized = {move(limiter.realized.left, target.left),
                      move(limiter.realized.right, target.right)};
  return {limiter, limiter.realized};
}

struct ActuationFaults {
  double loe_left = 0.0;   // alpha in [0, 1)
  double loe_right = 0.0;
  double effectiveness_scale_left = 1.0;
  double effectiveness_scale_right = 1.0;

  void validate() const {
    auto alpha_ok = [](double a) { return a >= 0.0 && a < 1.0; };
    if (!alpha_ok(loe_left)) throw ConfigError("faults.loe_left must be in [0, 1)");
    if (!alpha_ok(loe_right)) throw ConfigError("faults.loe_right must be in [0, 1)");
    if (!(effectiveness_scale_left > 0.0)) {
      throw ConfigError("faults.effectiveness_scale_left must be > 0");
    }
    if (!(effectiveness_scale_right > 0.0)) {
      throw ConfigError("faults.effectiveness_scale_right must be > 0");
    }
  }
  friend bool operator==(const ActuationFaults&, const ActuationFaults&) = default;
};

inline ThrusterCommand apply_faults(const ThrusterCommand& cmd, const ActuationFaults& f) {
  return ThrusterCommand::clamped(cmd.left * (1.0 - f.loe_left) * f.effectiveness_scale_left,
                                  cmd.right * (1.0 - f.loe_right) * f.effectiveness_scale_right);
}

struct ActuationResult {
  RateLimiterState limiter;
  ThrusterCommand realized;
  Wrench wrench;
};

/// faults -> slew limiter -> thrust curve -> differential thrust wrench.
inline ActuationResult actuate(const ThrusterCommand& cmd, const RateLimiterState& limiter,
                               const ActuationFaults& faults, const ThrustCurve& curve,
                               double lever, double dt) {
  const ThrusterCommand degraded = apply_faults(cmd, faults);
  auto [next, realized] = slew_limit(limiter, degraded, dt);
  const Wrench w = thrust_wrench(curve.eval(realized.left), curve.eval(realized.right), lever);
  return {next, realized, w};
}

}  // namespace asvlab
