#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asvlab/evaluation/conditions.hpp"
#include "asvlab/evaluation/metrics.hpp"
#include "asvlab/perception.hpp"
#include "asvlab/plant.hpp"
#include "asvlab/policy/controller.hpp"

namespace asvlab::evaluation {

struct GridGoal {
  double range;    // m
  double bearing;  // rad
  Vec2 local;      // relative to the start pose (origin, heading 0)
};

/// Ranges {3, 6, 9} m x bearings {-30, -15, 0, 15, 30} deg, range-major.
inline std::vector<GridGoal> goal_grid() {
  std::vector<GridGoal> g;
  for (double r : {3.0, 6.0, 9.0}) {
    for (double deg : {-30.0, -15.0, 0.0, 15.0, 30.0}) {
      const double b = deg * kPi / 180.0;
      g.push_back({r, b, {r * std::cos(b), r * std::sin(b)}});
    }
  }
  return g;
}

struct EvalOptions {
  PlantConfig plant{};
  CameraModel camera{};
  LatencyModel latency{};
  double pitch_bias = 0.0;
  double timeout = 60.0;  // s
};

struct GoalRun {
  GridGoal goal;
  TrajectoryLog log;
  Truncation truncation;
  MetricsRecord metrics;
  std::string fault;  // empty unless the run aborted
};

/// Drives one goal from the origin until the first crossing of the
/// goal-orthogonal line or the timeout. The policy sees the goal only through
/// simulated perception and the pose through the (optionally delayed)
/// localization buffer.
inline GoalRun run_goal(const policy::PolicyNet& net, const ConditionSpec& spec,
                        const GridGoal& goal, Backend backend, std::uint64_t seed,
                        const EvalOptions& opt) {
  PlantConfig pc = spec.apply(opt.plant);
  pc.backend = backend;
  if (backend == Backend::B) {
    pc.ambient.mode = AmbientMode::DriftEnvelope;
    pc.ambient.seed = child_seed(seed, 1);
  }
  pc.validate();
  PerceptionNoise noise{spec.pixel_radius, opt.pitch_bias, opt.latency.frame_rate,
                        child_seed(seed, 2)};
  PerceptionStream stream(opt.camera, noise, opt.latency);

  GoalRun run{goal, {{0.0, 0.0}, goal.local, {}}, {}, {}, {}};
  const Vec2 dir = (1.0 / goal.local.norm()) * goal.local;
  Plant plant(pc);
  PoseHistory history;
  history.push(plant.state());
  policy::GoalController controller(net);
  std::optional<Vec2> goal_estimate;
  try {
    while (true) {
      const VesselState now = plant.state();
      if (stream.frame_due(now.t)) {
        if (auto ev = stream.detect(goal.local, history, now.t)) goal_estimate = ev->target;
      }
      const bool done = (now.position() - goal.local).dot(dir) >= 0.0 ||
                        now.t >= opt.timeout - 1e-9;
      if (done) {
        run.log.samples.push_back({now, {}, plant.realized(), 0.0});
        break;
      }
      VesselState estimate = now;
      if (spec.localization_delay > 0.0) estimate = history.at(now.t - spec.localization_delay);
      const ThrusterCommand cmd = goal_estimate ? controller.command(estimate, *goal_estimate)
                                                : controller.idle();
      run.log.samples.push_back({now, cmd, plant.realized(), 0.0});
      plant.control_step(cmd);
      history.push(plant.state());
    }
  } catch (const SimulationFault& e) {
    run.fault = e.what();
  }
  run.truncation = truncate_first_approach(run.log);
  run.metrics = compute_metrics(run.truncation);
  if (!run.fault.empty()) run.metrics.sr = 0.0;
  return run;
}

inline std::vector<GoalRun> run_condition(const policy::PolicyNet& net, const ConditionSpec& spec,
                                          Backend backend, std::uint64_t seed,
                                          const EvalOptions& opt = {}) {
  spec.validate();
  std::vector<GoalRun> runs;
  const auto grid = goal_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    runs.push_back(run_goal(net, spec, grid[i], backend, child_seed(seed, i), opt));
  }
  return runs;
}

inline std::vector<MetricsRecord> metrics_of(const std::vector<GoalRun>& runs) {
  std::vector<MetricsRecord> m;
  for (const auto& r : runs) m.push_back(r.metrics);
  return m;
}

}  // namespace asvlab::evaluation
