#pragma once

// Planar (surge, sway, yaw) reduction of the Fossen vessel model:
//
//   M nu_dot + (D_l + D_q(nu)) nu = tau_thruster + tau_ambient
//
// with a diagonal inertia matrix, no Coriolis terms and g(eta) = 0 in the
// plane. Two integrators are provided so that a policy trained against one can
// be validated against an independent implementation.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "asvlab/common.hpp"

namespace asvlab {

struct VesselState {
  double x = 0.0;    // m, world
  double y = 0.0;    // m, world
  double psi = 0.0;  // rad, wrapped to (-pi, pi]
  double u = 0.0;    // m/s, body surge
  double v = 0.0;    // m/s, body sway
  double r = 0.0;    // rad/s, yaw rate
  double t = 0.0;    // s

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const VesselState&, const VesselState&) = default;
};

struct VesselParams {
  double mass = 35.82;
  double added_mass_u = 5.0;
  double added_mass_v = 15.0;
  double added_mass_r = 3.0;
  double inertia_z = 4.2;
  double dl_u = 2.0;
  double dl_v = 8.0;
  double dl_r = 1.5;
  double dq_u = 17.26;
  double dq_v = 30.0;
  double dq_r = 1.0;
  double cog_x = 0.0;
  double cog_y = 0.0;
  double thruster_lever = 0.4;

  double m_u() const { return mass + added_mass_u; }
  double m_v() const { return mass + added_mass_v; }
  double m_r() const { return inertia_z + added_mass_r; }

  /// Throws ConfigError naming the first field that violates its bound.
  void validate() const {
    auto require = [](bool ok, const char* field, const char* bound) {
      if (!ok) throw ConfigError(std::string("vessel.") + field + " must be " + bound);
    };
    require(std::isfinite(mass) && mass > 0.0, "mass", "> 0");
    require(std::isfinite(inertia_z) && inertia_z > 0.0, "inertia_z", "> 0");
    require(added_mass_u >= 0.0, "added_mass_u", ">= 0");
    require(added_mass_v >= 0.0, "added_mass_v", ">= 0");
    require(added_mass_r >= 0.0, "added_mass_r", ">= 0");
    require(dl_u >= 0.0, "dl_u", ">= 0");
    require(dl_v >= 0.0, "dl_v", ">= 0");
    require(dl_r >= 0.0, "dl_r", ">= 0");
    require(dq_u >= 0.0, "dq_u", ">= 0");
    require(dq_v >= 0.0, "dq_v", ">= 0");
    require(dq_r >= 0.0, "dq_r", ">= 0");
    require(std::isfinite(cog_x), "cog_x", "finite");
    require(std::isfinite(cog_y), "cog_y", "finite");
    require(std::isfinite(thruster_lever) && thruster_lever > 0.0, "thruster_lever", "> 0");
  }

  friend bool operator==(const VesselParams&, const VesselParams&) = default;
};

/// Body-frame planar wrench.
struct Wrench {
  double fx = 0.0;     // N
  double fy = 0.0;     // N
  double tau_z = 0.0;  // N m

  friend Wrench operator+(Wrench a, Wrench b) {
    return {a.fx + b.fx, a.fy + b.fy, a.tau_z + b.tau_z};
  }
  friend bool operator==(const Wrench&, const Wrench&) = default;
};

enum class Backend { A, B };

inline const char* to_string(Backend b) { return b == Backend::A ? "A" : "B"; }

inline Backend backend_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Backend::A;
  if (s == "B" || s == "b") return Backend::B;
  throw ConfigError("backend must be A or B, got '" + s + "'");
}

/// -(D_l + D_q(nu)) nu, axis-wise with |nu| nu quadratic terms.
inline Wrench damping_wrench(const VesselParams& p, double u, double v, double r) {
  return {-(p.dl_u + p.dq_u * std::abs(u)) * u,
          -(p.dl_v + p.dq_v * std::abs(v)) * v,
          -(p.dl_r + p.dq_r * std::abs(r)) * r};
}

/// Differential thrust: both thrusters push along the body x axis, mounted at
/// +/- lever on the y axis (right thruster produces positive yaw torque).
inline Wrench thrust_wrench(double f_left, double f_right, double lever) {
  return {f_left + f_right, 0.0, lever * (f_right - f_left)};
}

namespace detail {

struct Derivative {
  double dx, dy, dpsi, du, dv, dr;
};

inline Derivative derivative(const VesselParams& p, double psi, double u, double v, double r,
                             const Wrench& tau) {
  const Wrench d = damping_wrench(p, u, v, r);
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {c * u - s * v,
          s * u + c * v,
          r,
          (tau.fx + d.fx) / p.m_u(),
          (tau.fy + d.fy) / p.m_v(),
          (tau.tau_z + d.tau_z) / p.m_r()};
}

inline void check_finite(const VesselState& s) {
  const std::array<std::pair<const char*, double>, 7> fields{{{"x", s.x},
                                                              {"y", s.y},
                                                              {"psi", s.psi},
                                                              {"u", s.u},
                                                              {"v", s.v},
                                                              {"r", s.r},
                                                              {"t", s.t}}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value)) {
      throw SimulationFault(std::string("non-finite vessel state component '") + name + "'");
    }
  }
}

inline void check_finite(const Wrench& w, const char* what) {
  if (!std::isfinite(w.fx) || !std::isfinite(w.fy) || !std::isfinite(w.tau_z)) {
    throw SimulationFault(std::string("non-finite ") + what + " wrench");
  }
}

}  // namespace detail

/// Total applied wrench, with the thrust moment re-expressed about an offset
/// centre of gravity.
inline Wrench applied_wrench(const Wrench& thrust, const Wrench& ambient, const VesselParams& p) {
  Wrench total = thrust + ambient;
  total.tau_z += p.cog_y * thrust.fx - p.cog_x * thrust.fy;
  return total;
}

/// Advances the vessel by dt under wrenches held constant over the step.
///
/// Backend A: semi-implicit Euler (velocities first, then heading and position
/// from the new velocities). Backend B: classical RK4 on the full state.
inline VesselState step(const VesselState& state, const Wrench& thrust, const Wrench& ambient,
                        const VesselParams& p, double dt, Backend backend) {
  detail::check_finite(thrust, "thrust");
  detail::check_finite(ambient, "ambient");
  const Wrench tau = applied_wrench(thrust, ambient, p);

  VesselState next = state;
  if (backend == Backend::A) {
    const Wrench d = damping_wrench(p, state.u, state.v, state.r);
    next.u = state.u + dt * (tau.fx + d.fx) / p.m_u();
    next.v = state.v + dt * (tau.fy + d.fy) / p.m_v();
    next.r = state.r + dt * (tau.tau_z + d.tau_z) / p.m_r();
    const double psi_new = state.psi + dt * next.r;
    const double c = std::cos(psi_new);
    const double s = std::sin(psi_new);
    next.x = state.x + dt * (c * next.u - s * next.v);
    next.y = state.y + dt * (s * next.u + c * next.v);
    next.psi = wrap_angle(psi_new);
  } else {
    using detail::derivative;
    const auto k1 = derivative(p, state.psi, state.u, state.v, state.r, tau);
    auto at = [&](const detail::Derivative& k, double h) {
      return derivative(p, state.psi + h * k.dpsi, state.u + h * k.du, state.v + h * k.dv,
                        state.r + h * k.dr, tau);
    };
    const auto k2 = at(k1, 0.5 * dt);
    const auto k3 = at(k2, 0.5 * dt);
    const auto k4 = at(k3, dt);
    auto comb = [dt](double a, double b, double c, double d) {
      return dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    };
    next.x = state.x + comb(k1.dx, k2.dx, k3.dx, k4.dx);
    next.y = state.y + comb(k1.dy, k2.dy, k3.dy, k4.dy);
    next.psi = wrap_angle(state.psi + comb(k1.dpsi, k2.dpsi, k3.dpsi, k4.dpsi));
    next.u = state.u + comb(k1.du, k2.du, k3.du, k4.du);
    next.v = state.v + comb(k1.dv, k2.dv, k3.dv, k4.dv);
    next.r = state.r + comb(k1.dr, k2.dr, k3.dr, k4.dr);
  }
  next.t = state.t + dt;
  detail::check_finite(next);
  return next;
}

inline double kinetic_energy(const VesselState& s, const VesselParams& p) {
  return 0.5 * (p.mass * (s.u * s.u + s.v * s.v) + p.inertia_z * s.r * s.r);
}

// ---------------------------------------------------------------------------
// Ambient disturbances

enum class AmbientMode { None, ConstantWrench, DriftEnvelope };

/// Drift velocities the unactuated hull may be pushed to, per body axis.
struct DriftEnvelope {
  double u_lo = -0.14, u_hi = 0.29;  // m/s
  double v_lo = -0.15, v_hi = 0.06;  // m/s
  double r_lo = -0.15, r_hi = 0.08;  // rad/s
  friend bool operator==(const DriftEnvelope&, const DriftEnvelope&) = default;
};

struct AmbientDisturbance {
  AmbientMode mode = AmbientMode::None;
  Wrench wrench{};
  DriftEnvelope envelope{};
  double window_s = 10.0;
  std::uint64_t seed = 0;

  void validate() const {
    const auto& e = envelope;
    if (e.u_lo > e.u_hi || e.v_lo > e.v_hi || e.r_lo > e.r_hi) {
      throw ConfigError("ambient.envelope bounds must satisfy low <= high");
    }
    if (!(window_s >= 5.0)) throw ConfigError("ambient.window_s must be >= 5");
  }
  friend bool operator==(const AmbientDisturbance&, const AmbientDisturbance&) = default;
};

/// Wrench at time t. Drift mode holds a wrench constant over each window; the
/// wrench is the damping force that sustains a drift velocity drawn from the
/// envelope, so unactuated velocities relax towards (and stay inside) it. The
/// result is a pure function of (dist, params, t).
inline Wrench ambient_sample(const AmbientDisturbance& dist, const VesselParams& p, double t) {
  switch (dist.mode) {
    case AmbientMode::None:
      return {};
    case AmbientMode::ConstantWrench:
      return dist.wrench;
    case AmbientMode::DriftEnvelope: {
      const auto window = static_cast<std::uint64_t>(std::max(0.0, std::floor(t / dist.window_s)));
      Rng rng(child_seed(dist.seed, window));
      const auto& e = dist.envelope;
      const double u = uniform(rng, e.u_lo, e.u_hi);
      const double v = uniform(rng, e.v_lo, e.v_hi);
      const double r = uniform(rng, e.r_lo, e.r_hi);
      const Wrench d = damping_wrench(p, u, v, r);
      return {-d.fx, -d.fy, -d.tau_z};
    }
  }
  return {};
}

}  // namespace asvlab
