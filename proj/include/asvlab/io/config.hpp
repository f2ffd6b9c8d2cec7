#pragma once

// Run configuration: one JSON document holding every tunable of a run. Missing
// keys take defaults, unknown keys are rejected, and every section is
// validated after parsing.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "asvlab/evaluation/conditions.hpp"
#include "asvlab/evaluation/harness.hpp"
#include "asvlab/io/json_reader.hpp"
#include "asvlab/mission/mission.hpp"
#include "asvlab/perception.hpp"
#include "asvlab/plant.hpp"
#include "asvlab/policy/trainer.hpp"

namespace asvlab::io {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::uint64_t seed = 7;
  Backend backend = Backend::A;
  PlantConfig plant{};
  CameraMount camera{};
  LatencyModel latency{};
  double pitch_bias = 0.0;  // rad
  policy::TrainConfig training{};
  evaluation::ConditionSpec condition = evaluation::condition_catalog().front();
  mission::MissionConfig mission{};

  void validate() const {
    plant.validate();
    latency.validate();
    CameraModel{camera};
    training.validate();
    condition.validate();
    mission.validate();
  }

  /// Training environment with the shared plant settings.
  policy::TrainConfig train_config() const {
    policy::TrainConfig t = training;
    t.env.plant = plant;
    t.env.plant.backend = Backend::A;
    return t;
  }

  evaluation::EvalOptions eval_options() const {
    return {plant, CameraModel{camera}, latency, pitch_bias, training.env.timeout};
  }

  mission::MissionOptions mission_options() const {
    return {plant, CameraModel{camera}, latency, PerceptionNoise{0.0, pitch_bias,
                                                                 latency.frame_rate, 0}};
  }
};

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const evaluation::ConditionSpec& c) {
  Json j{{"id", c.id},
         {"name", c.name},
         {"localization_delay", c.localization_delay},
         {"policy", evaluation::to_string(c.policy)},
         {"loe_right", c.loe_right},
         {"pixel_radius", c.pixel_radius},
         {"composed_of", c.composed_of}};
  if (c.mass) j["mass"] = *c.mass;
  if (c.cog_y) j["cog_y"] = *c.cog_y;
  if (c.dq_u) j["dq_u"] = *c.dq_u;
  return j;
}

inline evaluation::ConditionSpec condition_from_json(const Json& j, const std::string& path) {
  evaluation::ConditionSpec c;
  if (j.is_string()) return evaluation::find_condition(j.get<std::string>());
  ObjectReader r(j, path);
  r.get("id", c.id);
  r.get("name", c.name);
  r.get("localization_delay", c.localization_delay);
  std::string policy = evaluation::to_string(c.policy);
  r.get("policy", policy);
  c.policy = evaluation::policy_variant_from_string(policy);
  r.get("loe_right", c.loe_right);
  r.get("pixel_radius", c.pixel_radius);
  r.get("composed_of", c.composed_of);
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (!r.has(key)) return;
    double v = 0.0;
    r.get(key, v);
    out = v;
  };
  opt("mass", c.mass);
  opt("cog_y", c.cog_y);
  opt("dq_u", c.dq_u);
  r.finish();
  c.validate();
  return c;
}

inline Json to_json(const RunConfig& c) {
  const auto& v = c.plant.vessel;
  Json curve_points = Json::array();
  for (const auto& p : c.plant.curve.points()) curve_points.push_back({p.command, p.force});
  const auto& e = c.plant.ambient.envelope;
  const auto& rw = c.training.env.reward;
  const auto& dr = c.training.env.dr;
  const auto& pp = c.training.ppo;
  const auto& m = c.mission;
  return Json{
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"backend", to_string(c.backend)},
      {"vessel",
       {{"mass", v.mass},
        {"added_mass_u", v.added_mass_u},
        {"added_mass_v", v.added_mass_v},
        {"added_mass_r", v.added_mass_r},
        {"inertia_z", v.inertia_z},
        {"dl_u", v.dl_u},
        {"dl_v", v.dl_v},
        {"dl_r", v.dl_r},
        {"dq_u", v.dq_u},
        {"dq_v", v.dq_v},
        {"dq_r", v.dq_r},
        {"cog_x", v.cog_x},
        {"cog_y", v.cog_y},
        {"thruster_lever", v.thruster_lever}}},
      {"thrust_curve", {{"points", curve_points}, {"deadband", c.plant.curve.deadband()}}},
      {"limiter", {{"slew_rate", c.plant.slew_rate}, {"enabled", c.plant.limiter_enabled}}},
      {"ambient",
       {{"window_s", c.plant.ambient.window_s},
        {"envelope",
         {{"u_lo", e.u_lo},
          {"u_hi", e.u_hi},
          {"v_lo", e.v_lo},
          {"v_hi", e.v_hi},
          {"r_lo", e.r_lo},
          {"r_hi", e.r_hi}}}}},
      {"sim",
       {{"physics_dt", c.plant.physics_dt},
        {"substeps", c.plant.substeps},
        {"timeout", c.training.env.timeout},
        {"out_of_bounds", c.training.env.out_of_bounds}}},
      {"camera",
       {{"width", c.camera.width},
        {"height", c.camera.height},
        {"hfov_deg", c.camera.hfov_deg},
        {"pitch_deg", c.camera.pitch_deg},
        {"mount_height", c.camera.mount_height},
        {"forward_offset", c.camera.forward_offset},
        {"lateral_offset", c.camera.lateral_offset},
        {"pitch_bias", c.pitch_bias}}},
      {"latency", {{"frame_rate", c.latency.frame_rate}, {"pipeline_delay", c.latency.pipeline_delay}}},
      {"reward",
       {{"weights", rw.weights},
        {"bearing_threshold", rw.bearing_threshold},
        {"energy_max", rw.energy_max},
        {"v_min", rw.v_min},
        {"v_max", rw.v_max},
        {"kappa", rw.kappa},
        {"success_distance", rw.success_distance},
        {"dt", rw.dt}}},
      {"domain_randomization",
       {{"enabled", dr.enabled},
        {"obs_position", dr.obs_position},
        {"obs_orientation", dr.obs_orientation},
        {"initial_surge", dr.initial_surge},
        {"com", dr.com},
        {"wrench_force", dr.wrench_force},
        {"wrench_torque", dr.wrench_torque},
        {"effectiveness", dr.effectiveness},
        {"action_noise", dr.action_noise},
        {"goal_range_min", dr.goal_range_min},
        {"goal_range_max", dr.goal_range_max}}},
      {"ppo",
       {{"horizon", pp.horizon},
        {"iterations", pp.iterations},
        {"num_envs", pp.num_envs},
        {"learning_rate", pp.learning_rate},
        {"adaptive_lr", pp.adaptive_lr},
        {"epochs", pp.epochs},
        {"minibatches", pp.minibatches},
        {"clip", pp.clip},
        {"value_coef", pp.value_coef},
        {"clip_value", pp.clip_value},
        {"entropy_coef", pp.entropy_coef},
        {"gamma", pp.gamma},
        {"lambda", pp.lambda},
        {"desired_kl", pp.desired_kl},
        {"init_std", pp.init_std},
        {"max_grad_norm", pp.max_grad_norm},
        {"hidden", c.training.shape.actor_hidden},
        {"critic_hidden", c.training.shape.critic_hidden}}},
      {"condition", to_json(c.condition)},
      {"mission",
       {{"area",
         {{"x0", m.area.x0}, {"y0", m.area.y0}, {"size_x", m.area.size_x}, {"size_y", m.area.size_y}}},
        {"spacing", m.spacing},
        {"visit_radius", m.visit_radius},
        {"capture_radius", m.capture_radius},
        {"eligibility_radius", m.eligibility_radius},
        {"max_age", m.max_age},
        {"time_budget", m.time_budget},
        {"repeat_tour", m.repeat_tour},
        {"target_count", m.target_count},
        {"drift", m.drift},
        {"drift_speed_max", m.drift_speed_max}}}};
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  ObjectReader root(j, "");
  int version = kSchemaVersion;
  root.get("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  root.get("seed", c.seed);
  std::string backend = to_string(c.backend);
  root.get("backend", backend);
  c.backend = backend_from_string(backend);

  auto with = [&](const char* key, auto&& fn) {
    if (!root.has(key)) return;
    ObjectReader r(root.child(key), key);
    fn(r);
    r.finish();
  };

  with("vessel", [&](ObjectReader& r) {
    auto& v = c.plant.vessel;
    r.get("mass", v.mass);
    r.get("added_mass_u", v.added_mass_u);
    r.get("added_mass_v", v.added_mass_v);
    r.get("added_mass_r", v.added_mass_r);
    r.get("inertia_z", v.inertia_z);
    r.get("dl_u", v.dl_u);
    r.get("dl_v", v.dl_v);
    r.get("dl_r", v.dl_r);
    r.get("dq_u", v.dq_u);
    r.get("dq_v", v.dq_v);
    r.get("dq_r", v.dq_r);
    r.get("cog_x", v.cog_x);
    r.get("cog_y", v.cog_y);
    r.get("thruster_lever", v.thruster_lever);
  });
  with("thrust_curve", [&](ObjectReader& r) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : c.plant.curve.points()) pts.emplace_back(p.command, p.force);
    double deadband = c.plant.curve.deadband();
    r.get("points", pts);
    r.get("deadband", deadband);
    std::vector<CurvePoint> cp;
    for (const auto& [cmd, f] : pts) cp.push_back({cmd, f});
    c.plant.curve = ThrustCurve(cp, deadband);
  });
  with("limiter", [&](ObjectReader& r) {
    r.get("slew_rate", c.plant.slew_rate);
    r.get("enabled", c.plant.limiter_enabled);
  });
  with("ambient", [&](ObjectReader& r) {
    r.get("window_s", c.plant.ambient.window_s);
    if (r.has("envelope")) {
      ObjectReader e(r.child("envelope"), "ambient.envelope");
      auto& env = c.plant.ambient.envelope;
      e.get("u_lo", env.u_lo);
      e.get("u_hi", env.u_hi);
      e.get("v_lo", env.v_lo);
      e.get("v_hi", env.v_hi);
      e.get("r_lo", env.r_lo);
      e.get("r_hi", env.r_hi);
      e.finish();
    }
  });
  with("sim", [&](ObjectReader& r) {
    r.get("physics_dt", c.plant.physics_dt);
    r.get("substeps", c.plant.substeps);
    r.get("timeout", c.training.env.timeout);
    r.get("out_of_bounds", c.training.env.out_of_bounds);
  });
  with("camera", [&](ObjectReader& r) {
    r.get("width", c.camera.width);
    r.get("height", c.camera.height);
    r.get("hfov_deg", c.camera.hfov_deg);
    r.get("pitch_deg", c.camera.pitch_deg);
    r.get("mount_height", c.camera.mount_height);
    r.get("forward_offset", c.camera.forward_offset);
    r.get("lateral_offset", c.camera.lateral_offset);
    r.get("pitch_bias", c.pitch_bias);
  });
  with("latency", [&](ObjectReader& r) {
    r.get("frame_rate", c.latency.frame_rate);
    r.get("pipeline_delay", c.latency.pipeline_delay);
  });
  with("reward", [&](ObjectReader& r) {
    auto& rw = c.training.env.reward;
    r.get("weights", rw.weights);
    r.get("bearing_threshold", rw.bearing_threshold);
    r.get("energy_max", rw.energy_max);
    r.get("v_min", rw.v_min);
    r.get("v_max", rw.v_max);
    r.get("kappa", rw.kappa);
    r.get("success_distance", rw.success_distance);
    r.get("dt", rw.dt);
  });
  with("domain_randomization", [&](ObjectReader& r) {
    auto& dr = c.training.env.dr;
    r.get("enabled", dr.enabled);
    r.get("obs_position", dr.obs_position);
    r.get("obs_orientation", dr.obs_orientation);
    r.get("initial_surge", dr.initial_surge);
    r.get("com", dr.com);
    r.get("wrench_force", dr.wrench_force);
    r.get("wrench_torque", dr.wrench_torque);
    r.get("effectiveness", dr.effectiveness);
    r.get("action_noise", dr.action_noise);
    r.get("goal_range_min", dr.goal_range_min);
    r.get("goal_range_max", dr.goal_range_max);
  });
  with("ppo", [&](ObjectReader& r) {
    auto& pp = c.training.ppo;
    r.get("horizon", pp.horizon);
    r.get("iterations", pp.iterations);
    r.get("num_envs", pp.num_envs);
    r.get("learning_rate", pp.learning_rate);
    r.get("adaptive_lr", pp.adaptive_lr);
    r.get("epochs", pp.epochs);
    r.get("minibatches", pp.minibatches);
    r.get("clip", pp.clip);
    r.get("value_coef", pp.value_coef);
    r.get("clip_value", pp.clip_value);
    r.get("entropy_coef", pp.entropy_coef);
    r.get("gamma", pp.gamma);
    r.get("lambda", pp.lambda);
    r.get("desired_kl", pp.desired_kl);
    r.get("init_std", pp.init_std);
    r.get("max_grad_norm", pp.max_grad_norm);
    r.get("hidden", c.training.shape.actor_hidden);
    r.get("critic_hidden", c.training.shape.critic_hidden);
  });
  if (root.has("condition")) {
    c.condition = condition_from_json(root.child("condition"), "condition");
  }
  with("mission", [&](ObjectReader& r) {
    auto& m = c.mission;
    if (r.has("area")) {
      ObjectReader a(r.child("area"), "mission.area");
      a.get("x0", m.area.x0);
      a.get("y0", m.area.y0);
      a.get("size_x", m.area.size_x);
      a.get("size_y", m.area.size_y);
      a.finish();
    }
    r.get("spacing", m.spacing);
    r.get("visit_radius", m.visit_radius);
    r.get("capture_radius", m.capture_radius);
    r.get("eligibility_radius", m.eligibility_radius);
    r.get("max_age", m.max_age);
    r.get("time_budget", m.time_budget);
    r.get("repeat_tour", m.repeat_tour);
    r.get("target_count", m.target_count);
    r.get("drift", m.drift);
    r.get("drift_speed_max", m.drift_speed_max);
  });
  root.finish();
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Stable hash of the canonical (sorted-key, compact) serialization.
inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(to_json(c).dump()); }

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return to_json(a) == to_json(b);
}

}  // namespace asvlab::io
