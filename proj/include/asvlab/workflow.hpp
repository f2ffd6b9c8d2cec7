#pragma once

// Seed layout and presets shared by the command line and the test suites, so
// that a run reproduced from either side sees the same random streams.

#include <string>

#include "asvlab/evaluation/harness.hpp"
#include "asvlab/io/config.hpp"
#include "asvlab/mission/mission.hpp"
#include "asvlab/policy/trainer.hpp"

namespace asvlab::workflow {

/// Training setup for one policy variant. The no-limiter variant only differs
/// in the plant it is trained against.
inline policy::TrainConfig training_for(const io::RunConfig& cfg,
                                        evaluation::PolicyVariant variant) {
  policy::TrainConfig t = cfg.train_config();
  if (variant == evaluation::PolicyVariant::NoRateLimiter) t.env.plant.limiter_enabled = false;
  return t;
}

/// Both variants train from the run seed itself.
inline std::uint64_t training_seed(std::uint64_t run_seed) { return run_seed; }

/// Evaluation streams depend on the condition id, not on the backend, so two
/// backends evaluated under one seed see the same perception noise.
inline std::uint64_t evaluation_seed(std::uint64_t run_seed, const std::string& condition_id) {
  const std::uint64_t id = std::stoull(io::fnv1a_hex(condition_id), nullptr, 16);
  return child_seed(child_seed(run_seed, 20), id);
}

inline std::uint64_t target_seed(std::uint64_t run_seed) { return child_seed(run_seed, 30); }
inline std::uint64_t mission_seed(std::uint64_t run_seed) { return child_seed(run_seed, 31); }

/// "e1": the configured area and target count without drift. "e2": a small
/// pool with five drifting targets.
inline mission::MissionConfig scenario(const io::RunConfig& cfg, const std::string& name) {
  mission::MissionConfig m = cfg.mission;
  if (name == "e1") {
    m.drift = false;
  } else if (name == "e2") {
    m.area = {0.0, 0.0, 5.0, 10.0};
    m.target_count = 5;
    m.drift = true;
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected e1 or e2)");
  }
  m.validate();
  return m;
}

inline mission::MissionResult run_scenario(const policy::PolicyNet& net, const io::RunConfig& cfg,
                                           const std::string& name, Backend backend) {
  const auto m = scenario(cfg, name);
  return mission::run_mission(net, m, mission::sample_targets(m, target_seed(cfg.seed)), backend,
                              mission_seed(cfg.seed), cfg.mission_options());
}

inline std::vector<evaluation::GoalRun> evaluate(const policy::PolicyNet& net,
                                                 const io::RunConfig& cfg,
                                                 const evaluation::ConditionSpec& spec,
                                                 Backend backend) {
  return evaluation::run_condition(net, spec, backend, evaluation_seed(cfg.seed, spec.id),
                                   cfg.eval_options());
}

}  // namespace asvlab::workflow
