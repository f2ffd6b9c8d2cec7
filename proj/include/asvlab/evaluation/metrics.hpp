#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "asvlab/actuation.hpp"
#include "asvlab/common.hpp"
#include "asvlab/vessel_dynamics.hpp"

namespace asvlab::evaluation {

inline constexpr double kSuccessRadius = 0.15;  // m

/// State at a control tick and the commands issued at that tick.
struct TrajectorySample {
  VesselState state;
  ThrusterCommand commanded;
  ThrusterCommand realized;
  double reward = 0.0;
};

struct TrajectoryLog {
  Vec2 start;
  Vec2 goal;
  std::vector<TrajectorySample> samples;

  void validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (!(samples[i].state.t > samples[i - 1].state.t)) {
        throw SimulationFault("trajectory timestamps must be strictly increasing (sample " +
                              std::to_string(i) + ")");
      }
    }
  }
};

struct Truncation {
  TrajectoryLog log;
  bool crossed = false;
  VesselState crossing;  // last retained pose
};

/// Cuts a trajectory at its first crossing of the line through the goal
/// orthogonal to the start-goal segment. The crossing pose is interpolated
/// linearly between the bracketing samples.
inline Truncation truncate_first_approach(const TrajectoryLog& traj) {
  if (traj.samples.empty()) throw SimulationFault("truncate_first_approach: empty trajectory");
  const Vec2 seg = traj.goal - traj.start;
  const double len = seg.norm();
  if (!(len > 1e-12)) throw GeometryError("truncate_first_approach: start and goal coincide");
  const Vec2 dir = (1.0 / len) * seg;
  auto along = [&](const VesselState& s) { return (s.position() - traj.goal).dot(dir); };

  Truncation out;
  out.log.start = traj.start;
  out.log.goal = traj.goal;
  const auto& smp = traj.samples;
  for (std::size_t k = 0; k < smp.size(); ++k) {
    const double sk = along(smp[k].state);
    if (sk < 0.0) {
      out.log.samples.push_back(smp[k]);
      continue;
    }
    out.crossed = true;
    if (k == 0) {
      out.log.samples.push_back(smp[0]);
      out.crossing = smp[0].state;
      return out;
    }
    const VesselState& a = smp[k - 1].state;
    const VesselState& b = smp[k].state;
    const double sa = along(a);
    const double w = -sa / (sk - sa);
    auto lerp = [w](double p, double q) { return p + w * (q - p); };
    VesselState c;
    c.x = lerp(a.x, b.x);
    c.y = lerp(a.y, b.y);
    c.psi = wrap_angle(a.psi + w * wrap_angle(b.psi - a.psi));
    c.u = lerp(a.u, b.u);
    c.v = lerp(a.v, b.v);
    c.r = lerp(a.r, b.r);
    c.t = lerp(a.t, b.t);
    out.crossing = c;
    out.log.samples.push_back({c, smp[k - 1].commanded, smp[k - 1].realized, 0.0});
    return out;
  }
  out.crossing = smp.back().state;
  return out;
}

struct MetricsRecord {
  double nt = 0.0;  // s/m
  double ne = 0.0;  // command units per m
  double er = 0.0;  // rad
  double fd = 0.0;  // m
  double pd = 0.0;  // m
  double sr = 0.0;  // 0 or 1

  static constexpr std::array<const char*, 6> kNames{"NT", "NE", "FD", "ER", "PD", "SR"};
  std::array<double, 6> values() const { return {nt, ne, fd, er, pd, sr}; }
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Scores a truncated approach. Commands are summed over every sample but the
/// last, i.e. over the control steps that produced the trajectory.
inline MetricsRecord compute_metrics(const Truncation& tr) {
  const auto& s = tr.log.samples;
  if (s.empty()) throw SimulationFault("compute_metrics: empty trajectory");
  const Vec2 goal = tr.log.goal;
  auto dist = [&](std::size_t i) { return distance(s[i].state.position(), goal); };
  const double d1 = dist(0);
  const double dn = dist(s.size() - 1);
  if (!(d1 > 0.0)) throw GeometryError("compute_metrics: trajectory starts on the goal");

  MetricsRecord m;
  m.nt = (s.back().state.t - s.front().state.t) / d1;
  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    energy += std::abs(s[i].commanded.left) + std::abs(s[i].commanded.right);
  }
  m.ne = energy / d1;

  const Vec2 g0 = goal - s[0].state.position();
  const double c = std::cos(s[0].state.psi);
  const double sn = std::sin(s[0].state.psi);
  const double bearing0 = std::atan2(-sn * g0.x + c * g0.y, c * g0.x + sn * g0.y);
  double rotation = 0.0;
  double path = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    rotation += std::abs(wrap_angle(s[i].state.psi - s[i - 1].state.psi));
    path += std::abs(dist(i) - dist(i - 1));
  }
  m.er = rotation - std::abs(bearing0);
  m.fd = dn;
  m.pd = path + dn - d1;
  m.sr = (tr.crossed && dn <= kSuccessRadius) ? 1.0 : 0.0;
  return m;
}

struct GapReport {
  std::array<double, 6> values{};  // ordered like MetricsRecord::kNames
  std::size_t count = 0;
  friend bool operator==(const GapReport&, const GapReport&) = default;
};

/// Per-metric mean absolute difference between matched records.
inline GapReport gap(const std::vector<MetricsRecord>& a, const std::vector<MetricsRecord>& b) {
  if (a.size() != b.size()) {
    throw SimulationFault("gap: record counts differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  GapReport g;
  g.count = a.size();
  if (a.empty()) return g;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto va = a[i].values();
    const auto vb = b[i].values();
    for (std::size_t k = 0; k < va.size(); ++k) g.values[k] += std::abs(va[k] - vb[k]);
  }
  for (double& v : g.values) v /= static_cast<double>(a.size());
  return g;
}

inline MetricsRecord mean(const std::vector<MetricsRecord>& records) {
  MetricsRecord m;
  if (records.empty()) return m;
  for (const auto& r : records) {
    m.nt += r.nt;
    m.ne += r.ne;
    m.er += r.er;
    m.fd += r.fd;
    m.pd += r.pd;
    m.sr += r.sr;
  }
  const double n = static_cast<double>(records.size());
  m.nt /= n;
  m.ne /= n;
  m.er /= n;
  m.fd /= n;
  m.pd /= n;
  m.sr /= n;
  return m;
}

}  // namespace asvlab::evaluation
