#pragma once

// CSV for time series, JSON for aggregates. Every file records the config
// hash and seed of the run that produced it.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "asvlab/evaluation/harness.hpp"
#include "asvlab/evaluation/metrics.hpp"
#include "asvlab/io/config.hpp"
#include "asvlab/io/json_reader.hpp"
#include "asvlab/mission/mission.hpp"
#include "asvlab/policy/trainer.hpp"

namespace asvlab::io {

inline constexpr int kOutputVersion = 1;

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string backend;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Provenance& p, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw SimulationFault("cannot write '" + path + "'");
    out_ << "# config_hash=" << p.config_hash << " seed=" << p.seed;
    if (!p.backend.empty()) out_ << " backend=" << p.backend;
    out_ << "\n";
    row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw SimulationFault("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    Json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline Json provenance_json(const Provenance& p) {
  Json j{{"config_hash", p.config_hash}, {"seed", p.seed}};
  if (!p.backend.empty()) j["backend"] = p.backend;
  return j;
}

inline Json to_json(const evaluation::MetricsRecord& m) {
  Json j;
  const auto v = m.values();
  for (std::size_t k = 0; k < v.size(); ++k) j[evaluation::MetricsRecord::kNames[k]] = v[k];
  return j;
}

inline evaluation::MetricsRecord metrics_from_json(const Json& j) {
  evaluation::MetricsRecord m;
  m.nt = j.at("NT").get<double>();
  m.ne = j.at("NE").get<double>();
  m.fd = j.at("FD").get<double>();
  m.er = j.at("ER").get<double>();
  m.pd = j.at("PD").get<double>();
  m.sr = j.at("SR").get<double>();
  return m;
}

inline Json metrics_table(const Provenance& p, const evaluation::ConditionSpec& spec,
                          const std::vector<evaluation::GoalRun>& runs) {
  Json goals = Json::array();
  for (const auto& r : runs) {
    Json g{{"range", r.goal.range},
           {"bearing_deg", r.goal.bearing * 180.0 / kPi},
           {"goal", {r.goal.local.x, r.goal.local.y}},
           {"crossed", r.truncation.crossed},
           {"metrics", to_json(r.metrics)}};
    if (!r.fault.empty()) g["fault"] = r.fault;
    goals.push_back(g);
  }
  Json j{{"schema", "asvlab-metrics"},
         {"version", kOutputVersion},
         {"provenance", provenance_json(p)},
         {"condition", to_json(spec)},
         {"goals", goals},
         {"mean", to_json(evaluation::mean(evaluation::metrics_of(runs)))}};
  return j;
}

inline std::vector<evaluation::MetricsRecord> records_from_table(const Json& j) {
  if (j.value("schema", "") != "asvlab-metrics") throw ConfigError("not a metrics table");
  std::vector<evaluation::MetricsRecord> out;
  for (const auto& g : j.at("goals")) out.push_back(metrics_from_json(g.at("metrics")));
  return out;
}

inline Json gap_report(const evaluation::GapReport& g, const Json& prov_a, const Json& prov_b) {
  Json values;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    values[evaluation::MetricsRecord::kNames[k]] = g.values[k];
  }
  return Json{{"schema", "asvlab-gap"},
              {"version", kOutputVersion},
              {"a", prov_a},
              {"b", prov_b},
              {"count", g.count},
              {"gap", values}};
}

inline void write_trajectory_csv(const std::string& path, const Provenance& p,
                                 const evaluation::TrajectoryLog& log) {
  CsvWriter w(path, p,
              {"t", "x", "y", "psi", "u", "v", "r", "cmd_left", "cmd_right", "real_left",
               "real_right", "goal_x", "goal_y"});
  for (const auto& s : log.samples) {
    const auto& st = s.state;
    w.row({num(st.t), num(st.x), num(st.y), num(st.psi), num(st.u), num(st.v), num(st.r),
           num(s.commanded.left), num(s.commanded.right), num(s.realized.left),
           num(s.realized.right), num(log.goal.x), num(log.goal.y)});
  }
}

inline void write_learning_curve(const std::string& path, const Provenance& p,
                                 const std::vector<policy::CurveRow>& curve) {
  CsvWriter w(path, p,
              {"iteration", "mean_return", "success_rate", "episodes", "surrogate", "value_loss",
               "kl", "learning_rate", "action_std"});
  for (const auto& r : curve) {
    w.row({std::to_string(r.iteration), num(r.mean_return), num(r.success_rate),
           std::to_string(r.episodes), num(r.surrogate), num(r.value_loss), num(r.kl),
           num(r.learning_rate), num(r.action_std)});
  }
}

inline Json mission_stats_json(const Provenance& p, const mission::MissionStats& s) {
  return Json{{"schema", "asvlab-mission"},
              {"version", kOutputVersion},
              {"provenance", provenance_json(p)},
              {"captured", s.captured},
              {"missed", s.missed},
              {"autonomous_time", s.autonomous_time},
              {"distance", s.distance},
              {"complete", s.complete},
              {"tours", s.tours}};
}

inline void write_mission_csv(const std::string& path, const Provenance& p,
                              const mission::MissionResult& res) {
  CsvWriter w(path, p,
              {"t", "x", "y", "psi", "cmd_left", "cmd_right", "goal_x", "goal_y", "source",
               "waypoint", "active_detections", "captured"});
  for (const auto& r : res.log) {
    w.row({num(r.t), num(r.state.x), num(r.state.y), num(r.state.psi), num(r.cmd.left),
           num(r.cmd.right), num(r.choice.goal.x), num(r.choice.goal.y),
           mission::to_string(r.choice.source), std::to_string(r.waypoint_index),
           std::to_string(r.active_detections), std::to_string(r.captured)});
  }
}

inline void write_mission_events(const std::string& path, const Provenance& p,
                                 const mission::MissionResult& res) {
  CsvWriter w(path, p, {"t", "event", "x", "y", "index"});
  for (const auto& e : res.events) {
    w.row({num(e.t), mission::to_string(e.type), num(e.where.x), num(e.where.y),
           std::to_string(e.index)});
  }
}

}  // namespace asvlab::io
