#pragma once

#include "immot/core_types.hpp"
#include "immot/motion_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace immot {

enum class SegmentKind { Straight, Turn, Stop, Go };

/// One maneuver of a scripted route. Which fields apply depends on `kind`:
/// straight uses `length`; turn uses `radius` and signed `angle` (left positive);
/// stop uses `decel` and `hold`; go uses `accel` and `target_speed`.
struct Segment {
  SegmentKind kind = SegmentKind::Straight;
  double length = 0.0;
  double radius = 0.0;
  double angle = 0.0;
  double decel = 0.0;
  double hold = 0.0;
  double accel = 0.0;
  double target_speed = 0.0;
};

struct VehicleRoute {
  int id = 0;
  double start_time = 0.0;
  Pose2D start;
  double speed = 10.0;
  double l = 4.5;
  double w = 1.8;
  double h = 1.5;
  double z = 0.75;
  std::vector<Segment> segments;
};

struct DetectionNoise {
  double position = 0.1;
  double dims = 0.05;
  double yaw = 0.03;
};

struct SceneExtent {
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -50.0;
  double y_max = 50.0;
};

/// Step error of the ego pose applied to every detection from `time` onward.
struct DriftEvent {
  double time = 0.0;
  Pose2D offset;
};

struct Scenario {
  std::uint64_t seed = 0;
  double duration = 30.0;
  double rate = 10.0;
  std::vector<VehicleRoute> vehicles;
  DetectionNoise noise;
  double p_miss = 0.0;
  double clutter_rate = 0.0;
  SceneExtent extent;
  std::vector<DriftEvent> drift_events;
};

struct GroundTruthObject {
  int id = 0;
  BoxMeasurement box;
  ModelId mode = ModelId::CV;
};

struct GroundTruthFrame {
  int frame = 0;
  double time = 0.0;
  std::vector<GroundTruthObject> objects;
};

struct SimulationOutput {
  std::vector<GroundTruthFrame> truth;
  std::vector<DetectionFrame> detections;
};

/// Kinematic state of a route at one instant.
struct RouteSample {
  bool active = false;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  ModelId mode = ModelId::CV;
};

/// Closed-form evaluation of a scripted route.
class RouteKinematics {
 public:
  explicit RouteKinematics(const VehicleRoute& route) : route_(route) {
    if (!(route.l > 0.0 && route.w > 0.0 && route.h > 0.0)) {
      throw ValidationError("route " + std::to_string(route.id) + ": box dimensions must be positive");
    }
    if (route.speed < 0.0) throw ValidationError("route " + std::to_string(route.id) + ": negative speed");
    Anchor a{0.0, route.start.x, route.start.y, route.start.heading, route.speed};
    for (std::size_t i = 0; i < route.segments.size(); ++i) {
      const Segment& s = route.segments[i];
      const double dur = duration(s, a.speed, i);
      anchors_.push_back(a);
      durations_.push_back(dur);
      a = evaluate(s, a, dur);
      a.t += dur;
    }
    end_ = a;
  }

  [[nodiscard]] double total_duration() const { return end_.t; }

  [[nodiscard]] RouteSample at(double time) const {
    const double t = time - route_.start_time;
    RouteSample out;
    if (t < -1e-9 || t > end_.t + 1e-9 || anchors_.empty()) return out;
    std::size_t i = 0;
    while (i + 1 < anchors_.size() && t >= anchors_[i + 1].t) ++i;
    const Anchor a = anchors_[i];
    const double tau = std::clamp(t - a.t, 0.0, durations_[i]);
    const Anchor e = evaluate(route_.segments[i], a, tau);
    out.active = true;
    out.x = e.x;
    out.y = e.y;
    out.heading = e.heading;
    out.speed = e.speed;
    out.mode = mode_of(route_.segments[i], a, tau);
    return out;
  }

 private:
  struct Anchor {
    double t, x, y, heading, speed;
  };

  [[nodiscard]] double duration(const Segment& s, double v0, std::size_t i) const {
    const auto fail = [&](const std::string& what) {
      return ValidationError("route " + std::to_string(route_.id) + " segment " + std::to_string(i) + ": " + what);
    };
    switch (s.kind) {
      case SegmentKind::Straight:
        if (!(s.length > 0.0)) throw fail("zero-length straight");
        if (!(v0 > 0.0)) throw fail("straight segment needs positive speed");
        return s.length / v0;
      case SegmentKind::Turn:
        if (!(s.radius > 0.0) || s.angle == 0.0) throw fail("zero-length turn");
        if (!(v0 > 0.0)) throw fail("turn segment needs positive speed");
        return std::abs(s.angle) * s.radius / v0;
      case SegmentKind::Stop: {
        if (v0 > 0.0 && !(s.decel > 0.0)) throw fail("stop needs positive deceleration");
        const double brake = v0 > 0.0 ? v0 / s.decel : 0.0;
        if (!(brake + s.hold > 0.0) || s.hold < 0.0) throw fail("zero-length stop");
        return brake + s.hold;
      }
      case SegmentKind::Go:
        if (!(s.accel > 0.0) || !(s.target_speed > v0)) throw fail("go needs positive acceleration to a higher speed");
        return (s.target_speed - v0) / s.accel;
    }
    throw fail("unknown segment kind");
  }

  static Anchor evaluate(const Segment& s, const Anchor& a, double tau) {
    Anchor e = a;
    const double c = std::cos(a.heading);
    const double sn = std::sin(a.heading);
    switch (s.kind) {
      case SegmentKind::Straight:
        e.x = a.x + a.speed * tau * c;
        e.y = a.y + a.speed * tau * sn;
        break;
      case SegmentKind::Turn: {
        const double dir = s.angle > 0.0 ? 1.0 : -1.0;
        const double omega = dir * a.speed / s.radius;
        const double h = a.heading + omega * tau;
        const double cx = a.x - dir * s.radius * sn;
        const double cy = a.y + dir * s.radius * c;
        e.x = cx + dir * s.radius * std::sin(h);
        e.y = cy - dir * s.radius * std::cos(h);
        e.heading = wrap_angle(h);
        break;
      }
      case SegmentKind::Stop: {
        const double brake = a.speed > 0.0 ? a.speed / s.decel : 0.0;
        const double tb = std::min(tau, brake);
        const double dist = a.speed * tb - 0.5 * (a.speed > 0.0 ? s.decel : 0.0) * tb * tb;
        e.x = a.x + dist * c;
        e.y = a.y + dist * sn;
        e.speed = tau >= brake ? 0.0 : a.speed - s.decel * tau;
        break;
      }
      case SegmentKind::Go: {
        const double dist = a.speed * tau + 0.5 * s.accel * tau * tau;
        e.x = a.x + dist * c;
        e.y = a.y + dist * sn;
        e.speed = a.speed + s.accel * tau;
        break;
      }
    }
    return e;
  }

  static ModelId mode_of(const Segment& s, const Anchor& a, double tau) {
    switch (s.kind) {
      case SegmentKind::Straight: return ModelId::CV;
      case SegmentKind::Turn: return ModelId::CT;
      case SegmentKind::Stop: return (a.speed > 0.0 && tau < a.speed / s.decel) ? ModelId::CA : ModelId::CV;
      case SegmentKind::Go: return ModelId::CA;
    }
    return ModelId::CV;
  }

  VehicleRoute route_;
  std::vector<Anchor> anchors_;
  std::vector<double> durations_;
  Anchor end_{0.0, 0.0, 0.0, 0.0, 0.0};
};

inline void validate(const Scenario& s) {
  if (!(s.rate > 0.0)) throw ValidationError("scenario: rate must be positive");
  if (!(s.duration > 0.0)) throw ValidationError("scenario: duration must be positive");
  if (!(s.p_miss >= 0.0 && s.p_miss <= 1.0)) throw ValidationError("scenario: p_miss must lie in [0, 1]");
  if (!(s.clutter_rate >= 0.0)) throw ValidationError("scenario: clutter_rate must be >= 0");
  if (s.noise.position < 0.0 || s.noise.dims < 0.0 || s.noise.yaw < 0.0) {
    throw ValidationError("scenario: noise sigmas must be >= 0");
  }
  if (!(s.extent.x_max > s.extent.x_min) || !(s.extent.y_max > s.extent.y_min)) {
    throw ValidationError("scenario: empty scene extent");
  }
}

inline int frame_count(const Scenario& s) {
  return static_cast<int>(std::floor(s.duration * s.rate + 1e-9)) + 1;
}

/// Ground truth sampled at the frame rate plus noisy detections with misses, clutter and drift.
/// Identical scenarios (including the seed) give identical outputs.
inline SimulationOutput generate(const Scenario& scenario) {
  validate(scenario);
  std::vector<RouteKinematics> routes;
  routes.reserve(scenario.vehicles.size());
  for (const auto& v : scenario.vehicles) routes.emplace_back(v);

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::poisson_distribution<int> clutter_count(scenario.clutter_rate > 0.0 ? scenario.clutter_rate : 1.0);

  const auto& ext = scenario.extent;
  SimulationOutput out;
  const int frames = frame_count(scenario);
  for (int k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / scenario.rate;
    GroundTruthFrame gt{k, t, {}};
    DetectionFrame det{k, t, Pose2D{}, {}};

    for (std::size_t i = 0; i < routes.size(); ++i) {
      const RouteSample s = routes[i].at(t);
      if (!s.active) continue;
      const VehicleRoute& v = scenario.vehicles[i];
      const BoxMeasurement box{v.l, v.w, v.h, s.x, s.y, v.z, wrap_angle(s.heading), 1.0};
      gt.objects.push_back({v.id, box, s.mode});

      const bool missed = unit(rng) < scenario.p_miss;
      BoxMeasurement noisy = box;
      const auto& n = scenario.noise;
      noisy.l = std::max(0.1, box.l + n.dims * normal(rng));
      noisy.w = std::max(0.1, box.w + n.dims * normal(rng));
      noisy.h = std::max(0.1, box.h + n.dims * normal(rng));
      noisy.x = box.x + n.position * normal(rng);
      noisy.y = box.y + n.position * normal(rng);
      noisy.z = box.z + n.position * normal(rng);
      noisy.theta = wrap_angle(box.theta + n.yaw * normal(rng));
      if (!missed) det.detections.push_back(noisy);
    }

    if (scenario.clutter_rate > 0.0) {
      const int count = clutter_count(rng);
      for (int c = 0; c < count; ++c) {
        BoxMeasurement b;
        b.x = ext.x_min + (ext.x_max - ext.x_min) * unit(rng);
        b.y = ext.y_min + (ext.y_max - ext.y_min) * unit(rng);
        b.z = 0.75;
        b.theta = wrap_angle(2.0 * std::numbers::pi * unit(rng));
        b.l = 3.5 + 1.5 * unit(rng);
        b.w = 1.6 + 0.4 * unit(rng);
        b.h = 1.4 + 0.4 * unit(rng);
        b.score = 0.3 + 0.6 * unit(rng);
        det.detections.push_back(b);
      }
    }

    for (const DriftEvent& e : scenario.drift_events) {
      if (e.time > t) continue;
      const double c = std::cos(e.offset.heading);
      const double s = std::sin(e.offset.heading);
      for (BoxMeasurement& b : det.detections) {
        const double x = b.x;
        const double y = b.y;
        b.x = e.offset.x + c * x - s * y;
        b.y = e.offset.y + s * x + c * y;
        b.theta = wrap_angle(b.theta + e.offset.heading);
      }
    }

    out.truth.push_back(std::move(gt));
    out.detections.push_back(std::move(det));
  }
  return out;
}

}  // namespace immot
