#pragma once

// Simulated perception: a calibrated pinhole camera looking at the water plane
// (Z = 0 in the robot frame). Targets are projected to pixels through the
// plane-induced homography H = K [r1 r2 t], perturbed in the image, and mapped
// back through H^-1. Frames are emitted at a fixed rate and stamped with the
// capture time so that consumers can compensate pipeline latency.

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <tuple>
#include <vector>

#include "asvlab/common.hpp"
#include "asvlab/vessel_dynamics.hpp"

namespace asvlab {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Mount shorthand used by configs; the default is the synthetic camera built
/// from the published sensor numbers (2448x2048, 80.8 deg horizontal FOV,
/// 37 deg downward pitch) and a declared mount geometry.
struct CameraMount {
  int width = 2448;
  int height = 2048;
  double hfov_deg = 80.8;
  double pitch_deg = 37.0;  // downward
  double mount_height = 0.4;  // m above the water plane
  double forward_offset = 0.3;  // m ahead of the vessel centre
  double lateral_offset = 0.0;  // m, +left
  friend bool operator==(const CameraMount&, const CameraMount&) = default;
};

/// Homography K [r1 r2 t] and its inverse; throws GeometryError when the plane
/// is seen edge-on.
inline std::pair<Mat3, Mat3> homography_from_extrinsics(const Mat3& K, const Mat3& R_cr,
                                                        const Vec3& t_cr) {
  Mat3 Rt;
  Rt.col(0) = R_cr.col(0);
  Rt.col(1) = R_cr.col(1);
  Rt.col(2) = t_cr;
  const Mat3 H = K * Rt;
  const double det = H.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12) {
    throw GeometryError("water-plane homography is singular (camera parallel to the plane)");
  }
  return {H, H.inverse()};
}

/// Rotation about the camera x axis (image horizontal); positive tilts the
/// optical axis further down.
inline Mat3 camera_pitch_rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 R;
  R << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return R;
}

class CameraModel {
 public:
  CameraModel() : CameraModel(CameraMount{}) {}

  explicit CameraModel(const CameraMount& mount) {
    if (mount.width <= 0 || mount.height <= 0) {
      throw ConfigError("camera.width and camera.height must be positive");
    }
    if (!(mount.hfov_deg > 0.0 && mount.hfov_deg < 180.0)) {
      throw ConfigError("camera.hfov_deg must be in (0, 180)");
    }
    const double f = 0.5 * mount.width / std::tan(0.5 * mount.hfov_deg * kPi / 180.0);
    Mat3 K;
    K << f, 0, 0.5 * mount.width,
         0, f, 0.5 * mount.height,
         0, 0, 1;
    // Robot frame: x forward, y left, z up. Camera frame: x right, y down,
    // z along the optical axis.
    const double th = mount.pitch_deg * kPi / 180.0;
    Mat3 R;
    R << 0, -1, 0,
         -std::sin(th), 0, -std::cos(th),
         std::cos(th), 0, -std::sin(th);
    const Vec3 centre(mount.forward_offset, mount.lateral_offset, mount.mount_height);
    init(K, R, -R * centre, mount.width, mount.height);
  }

  CameraModel(const Mat3& K, const Mat3& R_cr, const Vec3& t_cr, int width, int height,
              std::array<double, 5> distortion = {}) {
    distortion_ = distortion;
    init(K, R_cr, t_cr, width, height);
  }

  const Mat3& K() const { return K_; }
  const Mat3& R_cr() const { return R_; }
  const Vec3& t_cr() const { return t_; }
  const Mat3& H() const { return H_; }
  const Mat3& H_inv() const { return H_inv_; }
  int width() const { return width_; }
  int height() const { return height_; }
  /// Plumb-bob coefficients; carried for completeness, pixels are treated as
  /// undistorted.
  const std::array<double, 5>& distortion() const { return distortion_; }

  /// Same camera with the extrinsic rotation tilted about the image
  /// horizontal axis (the camera centre stays put).
  CameraModel with_pitch_bias(double bias) const {
    if (bias == 0.0) return *this;
    const Mat3 Rb = camera_pitch_rotation(bias);
    return CameraModel(K_, Rb * R_, Rb * t_, width_, height_, distortion_);
  }

  /// Camera centre in the robot frame.
  Vec3 centre() const { return -R_.transpose() * t_; }

  bool in_image(const Pixel& p) const {
    return p.u >= 0.0 && p.u <= width_ && p.v >= 0.0 && p.v <= height_;
  }

 private:
  void init(const Mat3& K, const Mat3& R, const Vec3& t, int width, int height) {
    if (!(K(0, 0) > 0.0 && K(1, 1) > 0.0) || K(1, 0) != 0.0 || K(2, 0) != 0.0 ||
        K(2, 1) != 0.0 || K(2, 2) != 1.0) {
      throw ConfigError("camera.K must be upper-triangular with positive focal lengths");
    }
    if ((R.transpose() * R - Mat3::Identity()).norm() >= 1e-9 || R.determinant() < 0.0) {
      throw ConfigError("camera.R_cr must be a rotation matrix");
    }
    K_ = K;
    R_ = R;
    t_ = t;
    width_ = width;
    height_ = height;
    std::tie(H_, H_inv_) = homography_from_extrinsics(K_, R_, t_);
  }

  Mat3 K_;
  Mat3 R_;
  Vec3 t_;
  Mat3 H_;
  Mat3 H_inv_;
  int width_ = 0;
  int height_ = 0;
  std::array<double, 5> distortion_{};
};

/// Plane point (robot frame) to pixel. nullopt when the point is behind the
/// camera or falls outside the image rectangle.
inline std::optional<Pixel> project_to_image(const CameraModel& cam, double X, double Y) {
  const Vec3 h = cam.H() * Vec3(X, Y, 1.0);
  if (!(h.z() > 1e-12)) return std::nullopt;
  const Pixel p{h.x() / h.z(), h.y() / h.z()};
  if (!cam.in_image(p)) return std::nullopt;
  return p;
}

/// Pixel to water-plane point (robot frame). Throws GeometryError for pixels
/// on or above the horizon.
inline Vec2 backproject(const Mat3& H_inv, const Pixel& px) {
  if (!std::isfinite(px.u) || !std::isfinite(px.v)) {
    throw GeometryError("backproject: non-finite pixel");
  }
  const Vec3 q = H_inv * Vec3(px.u, px.v, 1.0);
  if (!(q.z() > 1e-12 * q.norm())) {
    throw GeometryError("backproject: pixel ray does not intersect the water plane");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

inline Vec2 backproject(const CameraModel& cam, const Pixel& px) {
  return backproject(cam.H_inv(), px);
}

// ---------------------------------------------------------------------------

struct PerceptionNoise {
  double pixel_radius = 0.0;   // px
  double pitch_bias = 0.0;     // rad
  double resample_rate = 2.0;  // Hz
  std::uint64_t seed = 0;

  void validate() const {
    if (!(pixel_radius >= 0.0)) throw ConfigError("noise.pixel_radius must be >= 0");
    if (!(resample_rate > 0.0)) throw ConfigError("noise.resample_rate must be > 0");
  }
};

struct LatencyModel {
  double frame_rate = 2.0;         // Hz
  double pipeline_delay = 0.248;   // s

  void validate() const {
    if (!(frame_rate > 0.0)) throw ConfigError("latency.frame_rate must be > 0");
    if (!(pipeline_delay >= 0.0)) throw ConfigError("latency.pipeline_delay must be >= 0");
  }
};

enum class DetectionSource { Simulated, Scripted };

struct DetectionEvent {
  Vec2 target;        // world frame
  double timestamp;   // sensor (capture) time
  DetectionSource source = DetectionSource::Simulated;
};

/// Image-plane offset for a noise frame: uniform over the disc of the given
/// radius, a pure function of (seed, frame index).
inline Pixel noise_offset(const PerceptionNoise& noise, std::uint64_t frame) {
  if (noise.pixel_radius == 0.0) return {};
  Rng rng(child_seed(noise.seed, frame));
  const double rad = noise.pixel_radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double ang = uniform(rng, -kPi, kPi);
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

inline std::uint64_t noise_frame_index(const PerceptionNoise& noise, double t) {
  return static_cast<std::uint64_t>(std::max(0.0, std::floor(t * noise.resample_rate + 1e-9)));
}

/// Adds the frame's disc offset to a pixel. Offsets are shared by every query
/// falling in the same resample frame.
inline Pixel perturb(const PerceptionNoise& noise, const Pixel& px, double t) {
  const Pixel d = noise_offset(noise, noise_frame_index(noise, t));
  return {px.u + d.u, px.v + d.v};
}

inline Vec2 world_to_local(Vec2 world, const VesselState& pose) {
  const Vec2 d = world - pose.position();
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 local_to_world(Vec2 local, const VesselState& pose) {
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  return {pose.x + c * local.x - s * local.y, pose.y + s * local.x + c * local.y};
}

/// Latency compensation: a world-frame detection re-expressed in the body
/// frame of the current pose estimate.
inline Vec2 goal_in_local_frame(const DetectionEvent& event, const VesselState& pose_now) {
  return world_to_local(event.target, pose_now);
}

/// One simulated detection. `capture_pose` must be the vessel pose at
/// now - pipeline_delay; the same pose is used to express the target in the
/// robot frame and to lift the perturbed goal back to the world frame.
/// `biased` is the camera the backprojection believes in (pitch bias).
inline std::optional<DetectionEvent> sense(Vec2 true_target, const VesselState& capture_pose,
                                           const CameraModel& camera, const CameraModel& biased,
                                           const PerceptionNoise& noise,
                                           const LatencyModel& latency, double now) {
  const double stamp = now - latency.pipeline_delay;
  const Vec2 local = world_to_local(true_target, capture_pose);
  const auto px = project_to_image(camera, local.x, local.y);
  if (!px) return std::nullopt;
  const Pixel noisy = perturb(noise, *px, stamp);
  Vec2 goal_local;
  try {
    goal_local = backproject(biased, noisy);
  } catch (const GeometryError&) {
    return std::nullopt;
  }
  return DetectionEvent{local_to_world(goal_local, capture_pose), stamp,
                        DetectionSource::Simulated};
}

inline std::optional<DetectionEvent> sense(Vec2 true_target, const VesselState& capture_pose,
                                           const CameraModel& camera,
                                           const PerceptionNoise& noise,
                                           const LatencyModel& latency, double now) {
  return sense(true_target, capture_pose, camera, camera.with_pitch_bias(noise.pitch_bias), noise,
               latency, now);
}

/// Time-indexed pose buffer with linear interpolation (heading interpolated
/// along the short arc). Queries before the first sample return the first.
class PoseHistory {
 public:
  explicit PoseHistory(double horizon_s = 5.0) : horizon_(horizon_s) {}

  void push(const VesselState& s) {
    if (!states_.empty() && s.t <= states_.back().t) states_.clear();
    states_.push_back(s);
    while (states_.size() > 2 && states_.back().t - states_[1].t > horizon_) states_.pop_front();
  }

  bool empty() const { return states_.empty(); }

  VesselState at(double t) const {
    if (states_.empty()) throw SimulationFault("pose history is empty");
    if (t <= states_.front().t) return states_.front();
    if (t >= states_.back().t) return states_.back();
    auto hi = std::lower_bound(states_.begin(), states_.end(), t,
                               [](const VesselState& s, double q) { return s.t < q; });
    const auto lo = std::prev(hi);
    const double w = (t - lo->t) / (hi->t - lo->t);
    auto lerp = [w](double a, double b) { return a + w * (b - a); };
    VesselState out;
    out.x = lerp(lo->x, hi->x);
    out.y = lerp(lo->y, hi->y);
    out.psi = wrap_angle(lo->psi + w * wrap_angle(hi->psi - lo->psi));
    out.u = lerp(lo->u, hi->u);
    out.v = lerp(lo->v, hi->v);
    out.r = lerp(lo->r, hi->r);
    out.t = t;
    return out;
  }

 private:
  double horizon_;
  std::deque<VesselState> states_;
};

/// Frame scheduler around sense(): emits at most frame_rate events per second,
/// each using the pose `pipeline_delay` seconds in the past.
class PerceptionStream {
 public:
  PerceptionStream(const CameraModel& camera, PerceptionNoise noise, LatencyModel latency)
      : camera_(camera),
        biased_(camera.with_pitch_bias(noise.pitch_bias)),
        noise_(noise),
        latency_(latency) {
    noise_.validate();
    latency_.validate();
  }

  /// True when a frame is due at `now` (call once per control tick).
  bool frame_due(double now) {
    if (now + 1e-9 < next_frame_) return false;
    next_frame_ += 1.0 / latency_.frame_rate;
    if (next_frame_ <= now) next_frame_ = now + 1.0 / latency_.frame_rate;
    return true;
  }

  std::optional<DetectionEvent> detect(Vec2 target, const PoseHistory& history,
                                       double now) const {
    const VesselState pose = history.at(now - latency_.pipeline_delay);
    return sense(target, pose, camera_, biased_, noise_, latency_, now);
  }

  const CameraModel& camera() const { return camera_; }
  const LatencyModel& latency() const { return latency_; }

 private:
  CameraModel camera_;
  CameraModel biased_;
  PerceptionNoise noise_;
  LatencyModel latency_;
  double next_frame_ = 0.0;
};

// ---------------------------------------------------------------------------

struct ErrorProfileRow {
  double range;                 // m, ahead of the vessel centre
  std::optional<double> error;  // m; nullopt when unresolvable
};

/// Worst-case planar error of a target dead ahead at each range, over pixel
/// offsets on the noise circle and both signs of the pitch bias.
inline std::vector<ErrorProfileRow> error_profile(const CameraModel& cam,
                                                  const std::vector<double>& ranges,
                                                  double px_noise, double pitch_bias,
                                                  int circle_samples = 360) {
  std::vector<CameraModel> biased;
  if (pitch_bias == 0.0) {
    biased.push_back(cam);
  } else {
    biased.push_back(cam.with_pitch_bias(std::abs(pitch_bias)));
    biased.push_back(cam.with_pitch_bias(-std::abs(pitch_bias)));
  }
  const int n = px_noise > 0.0 ? circle_samples : 1;

  std::vector<ErrorProfileRow> rows;
  rows.reserve(ranges.size());
  for (double range : ranges) {
    ErrorProfileRow row{range, std::nullopt};
    const auto px = project_to_image(cam, range, 0.0);
    if (px) {
      double worst = 0.0;
      bool ok = true;
      for (const auto& b : biased) {
        for (int k = 0; k < n && ok; ++k) {
          const double a = 2.0 * kPi * k / n;
          const Pixel q{px->u + px_noise * std::cos(a), px->v + px_noise * std::sin(a)};
          try {
            const Vec2 est = backproject(b, q);
            worst = std::max(worst, distance(est, Vec2{range, 0.0}));
          } catch (const GeometryError&) {
            ok = false;
          }
        }
      }
      if (ok) row.error = worst;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace asvlab
