#pragma once

// Search-and-capture layer: lawnmower coverage, a short-lived detection set
// and memoryless goal selection between the two.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/perception.hpp"
#include "asvlab/plant.hpp"
#include "asvlab/policy/controller.hpp"

namespace asvlab::mission {

/// Axis-aligned rectangle [x0, x0 + size_x] x [y0, y0 + size_y].
struct Area {
  double x0 = 0.0;
  double y0 = 0.0;
  double size_x = 15.0;
  double size_y = 30.0;

  bool contains(Vec2 p, double margin = 0.0) const {
    return p.x >= x0 - margin && p.x <= x0 + size_x + margin && p.y >= y0 - margin &&
           p.y <= y0 + size_y + margin;
  }
  friend bool operator==(const Area&, const Area&) = default;
};

struct WaypointPlan {
  std::vector<Vec2> waypoints;
  std::size_t next = 0;
  double visit_radius = 0.5;  // m

  bool exhausted() const { return next >= waypoints.size(); }
  Vec2 current() const { return waypoints.at(next); }
};

/// Boustrophedon coverage. Sweep lines run along the longer side, spaced
/// `spacing` apart across the shorter side; both ends of the area are
/// included. Starts at the corner nearest the origin.
inline WaypointPlan lawnmower(const Area& area, double spacing, double visit_radius = 0.5) {
  if (!(spacing > 0.0)) throw ConfigError("mission.spacing must be > 0");
  if (!(area.size_x > 0.0 && area.size_y > 0.0)) {
    throw ConfigError("mission.area must have positive size");
  }
  auto ticks = [spacing](double len) {
    std::vector<double> t;
    const auto n = static_cast<int>(std::floor(len / spacing + 1e-9));
    for (int i = 0; i <= n; ++i) t.push_back(i * spacing);
    return t;
  };
  const bool lines_along_y = area.size_y >= area.size_x;
  const std::vector<double> across = ticks(lines_along_y ? area.size_x : area.size_y);
  const std::vector<double> along = ticks(lines_along_y ? area.size_y : area.size_x);

  // Mirror so that the first waypoint is the corner nearest the origin.
  const Vec2 far{area.x0 + area.size_x, area.y0 + area.size_y};
  const bool flip_x = std::abs(far.x) < std::abs(area.x0);
  const bool flip_y = std::abs(far.y) < std::abs(area.y0);
  auto place = [&](double a, double b) {
    double lx = lines_along_y ? a : b;
    double ly = lines_along_y ? b : a;
    return Vec2{flip_x ? far.x - lx : area.x0 + lx, flip_y ? far.y - ly : area.y0 + ly};
  };

  WaypointPlan plan;
  plan.visit_radius = visit_radius;
  for (std::size_t i = 0; i < across.size(); ++i) {
    for (std::size_t j = 0; j < along.size(); ++j) {
      const std::size_t jj = (i % 2 == 0) ? j : along.size() - 1 - j;
      plan.waypoints.push_back(place(across[i], along[jj]));
    }
  }
  return plan;
}

struct Detection {
  Vec2 position;
  double stamp;
};

struct ActiveDetectionSet {
  std::vector<Detection> detections;
  double max_age = 3.0;         // s
  double capture_radius = 0.3;  // m
  double eligibility_radius = 6.0;  // m
  double merge_radius = 0.2;    // m

  void validate() const {
    if (!(max_age > 0.0)) throw ConfigError("mission.max_age must be > 0");
    if (!(capture_radius > 0.0)) throw ConfigError("mission.capture_radius must be > 0");
    if (!(eligibility_radius > 0.0)) throw ConfigError("mission.eligibility_radius must be > 0");
    if (!(merge_radius >= 0.0)) throw ConfigError("mission.merge_radius must be >= 0");
  }
};

enum class EventType { Detection, Expired, Collected, Waypoint, TourRestart, Capture, Complete };

inline const char* to_string(EventType e) {
  switch (e) {
    case EventType::Detection: return "detection";
    case EventType::Expired: return "expired";
    case EventType::Collected: return "collected";
    case EventType::Waypoint: return "waypoint";
    case EventType::TourRestart: return "tour_restart";
    case EventType::Capture: return "capture";
    case EventType::Complete: return "complete";
  }
  return "?";
}

struct MissionEvent {
  double t;
  EventType type;
  Vec2 where;
  int index = -1;
};

/// Inserts or merges new detections, expires stale ones, drops detections the
/// vessel has reached and advances the waypoint index when the current
/// waypoint is within its visit radius. Returns what happened.
inline std::vector<MissionEvent> update_detections(ActiveDetectionSet& set, WaypointPlan& plan,
                                                   const std::vector<DetectionEvent>& events,
                                                   const VesselState& pose, double now) {
  std::vector<MissionEvent> log;
  for (const auto& ev : events) {
    auto same = std::find_if(set.detections.begin(), set.detections.end(), [&](const Detection& d) {
      return distance(d.position, ev.target) <= set.merge_radius;
    });
    if (same != set.detections.end()) {
      if (ev.timestamp >= same->stamp) *same = {ev.target, ev.timestamp};
    } else {
      set.detections.push_back({ev.target, ev.timestamp});
      log.push_back({now, EventType::Detection, ev.target});
    }
  }
  std::erase_if(set.detections, [&](const Detection& d) {
    if (now - d.stamp > set.max_age) {
      log.push_back({now, EventType::Expired, d.position});
      return true;
    }
    if (distance(d.position, pose.position()) <= set.capture_radius) {
      log.push_back({now, EventType::Collected, d.position});
      return true;
    }
    return false;
  });
  if (!plan.exhausted() && distance(plan.current(), pose.position()) <= plan.visit_radius) {
    log.push_back({now, EventType::Waypoint, plan.current(), static_cast<int>(plan.next)});
    ++plan.next;
  }
  return log;
}

enum class GoalSource { Waypoint, Detection, None };

inline const char* to_string(GoalSource s) {
  switch (s) {
    case GoalSource::Waypoint: return "waypoint";
    case GoalSource::Detection: return "detection";
    case GoalSource::None: return "none";
  }
  return "?";
}

struct GoalChoice {
  GoalSource source = GoalSource::None;  // None signals mission complete
  Vec2 goal;
  double eligibility_distance = 0.0;  // |z - w_k| for detections
  bool complete() const { return source == GoalSource::None; }
};

/// Nearest eligible detection, else the current waypoint. Once the tour is
/// exhausted every detection is eligible.
inline GoalChoice select_goal(const VesselState& pose, const WaypointPlan& plan,
                              const ActiveDetectionSet& set) {
  GoalChoice best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& d : set.detections) {
    const double from_wp = plan.exhausted() ? 0.0 : distance(d.position, plan.current());
    if (from_wp > set.eligibility_radius) continue;
    const double dv = distance(d.position, pose.position());
    if (dv < best_d) {
      best_d = dv;
      best = {GoalSource::Detection, d.position, from_wp};
    }
  }
  if (best.source == GoalSource::Detection) return best;
  if (!plan.exhausted()) return {GoalSource::Waypoint, plan.current(), 0.0};
  return {};
}

struct Target {
  Vec2 position;
  Vec2 velocity;  // m/s, world frame
  bool captured = false;
  double captured_at = -1.0;
};

struct MissionConfig {
  Area area{};
  double spacing = 5.0;
  double visit_radius = 0.5;
  double capture_radius = 0.3;
  double eligibility_radius = 6.0;
  double max_age = 3.0;
  double time_budget = 2700.0;  // s
  bool repeat_tour = true;      // sweep again (in reverse) while targets remain
  int target_count = 100;
  bool drift = false;
  double drift_speed_max = 0.1;  // m/s, per-target constant drift magnitude bound

  void validate() const {
    if (!(spacing > 0.0)) throw ConfigError("mission.spacing must be > 0");
    if (!(area.size_x > 0.0 && area.size_y > 0.0)) {
      throw ConfigError("mission.area must have positive size");
    }
    if (!(time_budget > 0.0)) throw ConfigError("mission.time_budget must be > 0");
    if (target_count < 0) throw ConfigError("mission.target_count must be >= 0");
    if (!(drift_speed_max >= 0.0)) throw ConfigError("mission.drift_speed_max must be >= 0");
    ActiveDetectionSet{{}, max_age, capture_radius, eligibility_radius, 0.2}.validate();
  }
  friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

/// Uniform static (or constantly drifting) targets inside the area.
inline std::vector<Target> sample_targets(const MissionConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Target> t;
  for (int i = 0; i < cfg.target_count; ++i) {
    Target tg;
    tg.position = {uniform(rng, cfg.area.x0, cfg.area.x0 + cfg.area.size_x),
                   uniform(rng, cfg.area.y0, cfg.area.y0 + cfg.area.size_y)};
    if (cfg.drift) {
      const double speed = uniform(rng, 0.0, cfg.drift_speed_max);
      const double heading = uniform(rng, -kPi, kPi);
      tg.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
    }
    t.push_back(tg);
  }
  return t;
}

struct MissionStats {
  int captured = 0;
  int missed = 0;
  double autonomous_time = 0.0;  // s
  double distance = 0.0;         // m
  bool complete = false;
  int tours = 1;
};

struct MissionLogRow {
  double t;
  VesselState state;
  ThrusterCommand cmd;
  GoalChoice choice;
  std::size_t waypoint_index;
  std::size_t active_detections;
  int captured;
};

struct MissionResult {
  MissionStats stats;
  std::vector<Target> targets;
  std::vector<MissionLogRow> log;
  std::vector<MissionEvent> events;
};

struct MissionOptions {
  PlantConfig plant{};
  CameraModel camera{};
  LatencyModel latency{};
  PerceptionNoise noise{};
};

/// Closed-loop mission at the control rate. The simulated detector reports
/// only the nearest uncaptured target in view on each frame. A target counts
/// as captured when the vessel centre passes within the capture radius.
inline MissionResult run_mission(const policy::PolicyNet& net, const MissionConfig& cfg,
                                 std::vector<Target> targets, Backend backend, std::uint64_t seed,
                                 const MissionOptions& opt = {}) {
  cfg.validate();
  PlantConfig pc = opt.plant;
  pc.backend = backend;
  if (backend == Backend::B) {
    pc.ambient.mode = AmbientMode::DriftEnvelope;
    pc.ambient.seed = child_seed(seed, 1);
  }
  pc.validate();
  PerceptionNoise noise = opt.noise;
  noise.seed = child_seed(seed, 2);
  PerceptionStream stream(opt.camera, noise, opt.latency);

  MissionResult res;
  WaypointPlan plan = lawnmower(cfg.area, cfg.spacing, cfg.visit_radius);
  ActiveDetectionSet set{{}, cfg.max_age, cfg.capture_radius, cfg.eligibility_radius, 0.2};
  Plant plant(pc);
  PoseHistory history;
  history.push(plant.state());
  policy::GoalController controller(net);

  while (true) {
    const VesselState now = plant.state();
    // Physical capture by the net.
    for (std::size_t i = 0; i < targets.size(); ++i) {
      auto& tg = targets[i];
      if (!tg.captured && distance(tg.position, now.position()) <= cfg.capture_radius) {
        tg.captured = true;
        tg.captured_at = now.t;
        ++res.stats.captured;
        res.events.push_back({now.t, EventType::Capture, tg.position, static_cast<int>(i)});
      }
    }
    std::vector<DetectionEvent> seen;
    if (stream.frame_due(now.t)) {
      const VesselState cap = history.at(now.t - opt.latency.pipeline_delay);
      const CameraModel& cam = stream.camera();
      const Target* nearest = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& tg : targets) {
        if (tg.captured) continue;
        const Vec2 local = world_to_local(tg.position, cap);
        if (!project_to_image(cam, local.x, local.y)) continue;
        const double d = local.norm();
        if (d < best) {
          best = d;
          nearest = &tg;
        }
      }
      if (nearest) {
        if (auto ev = stream.detect(nearest->position, history, now.t)) seen.push_back(*ev);
      }
    }
    for (auto& e : update_detections(set, plan, seen, now, now.t)) res.events.push_back(e);

    GoalChoice choice = select_goal(now, plan, set);
    const bool remaining = std::any_of(targets.begin(), targets.end(),
                                       [](const Target& t) { return !t.captured; });
    if (choice.complete() && cfg.repeat_tour && remaining) {
      std::reverse(plan.waypoints.begin(), plan.waypoints.end());
      plan.next = 0;
      ++res.stats.tours;
      res.events.push_back({now.t, EventType::TourRestart, now.position()});
      choice = select_goal(now, plan, set);
    }
    if (choice.complete()) {
      res.stats.complete = true;
      res.events.push_back({now.t, EventType::Complete, now.position()});
      break;
    }
    if (now.t >= cfg.time_budget - 1e-9) break;

    const ThrusterCommand cmd = controller.command(now, choice.goal);
    res.log.push_back({now.t, now, cmd, choice, plan.next, set.detections.size(),
                       res.stats.captured});
    plant.control_step(cmd);
    history.push(plant.state());
    res.stats.distance += distance(plant.state().position(), now.position());
    for (auto& tg : targets) {
      if (!tg.captured) tg.position = tg.position + pc.control_dt() * tg.velocity;
    }
  }
  res.stats.autonomous_time = plant.state().t;
  res.stats.missed = static_cast<int>(targets.size()) - res.stats.captured;
  res.targets = std::move(targets);
  return res;
}

}  // namespace asvlab::mission
