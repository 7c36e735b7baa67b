#pragma once

#include "immot/immot.hpp"

#include <random>
#include <vector>

namespace immot::testing {

template <int N>
Eigen::Matrix<double, N, N> random_spd(std::mt19937_64& rng, double ridge = 0.1) {
  std::normal_distribution<double> n;
  Eigen::Matrix<double, N, N> a;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) a(r, c) = n(rng);
  Eigen::Matrix<double, N, N> p = a * a.transpose() / N;
  p.diagonal().array() += ridge;
  return p;
}

inline Eigen::VectorXd random_simplex(std::mt19937_64& rng, Eigen::Index m) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = e(rng);
  return v / v.sum();
}

inline Eigen::MatrixXd random_tpm(std::mt19937_64& rng, Eigen::Index m) {
  Eigen::MatrixXd p(m, m);
  for (Eigen::Index i = 0; i < m; ++i) p.row(i) = random_simplex(rng, m).transpose();
  return p;
}

/// A track-like ImmState over `models`, every model starting from `g`.
inline ImmState make_state(const std::vector<MotionModel>& models, const Gaussian& g, Eigen::VectorXd mu,
                           Eigen::MatrixXd tpm) {
  ImmState s;
  s.models = models;
  s.per_model.assign(models.size(), g);
  s.mu = std::move(mu);
  s.tpm = std::move(tpm);
  return s;
}

inline ImmState default_state(const Gaussian& g, double dt = 0.1) {
  return make_state(TrackerConfig::default_bank(dt), g, default_mode_prior(), default_tpm());
}

/// Initial estimate the tracker would create from `det`.
inline Gaussian initial_estimate(const BoxMeasurement& det, const TrackerConfig& config = {}) {
  return initialize_track(det, config).overall;
}

/// Straight route with one vehicle heading east from the origin.
inline VehicleRoute straight_route(double speed, double length, int id = 1) {
  VehicleRoute r;
  r.id = id;
  r.speed = speed;
  Segment s;
  s.kind = SegmentKind::Straight;
  s.length = length;
  r.segments = {s};
  return r;
}

inline Segment straight(double length) {
  Segment s;
  s.kind = SegmentKind::Straight;
  s.length = length;
  return s;
}

inline Segment turn(double radius, double angle) {
  Segment s;
  s.kind = SegmentKind::Turn;
  s.radius = radius;
  s.angle = angle;
  return s;
}

inline Segment stop(double decel, double hold) {
  Segment s;
  s.kind = SegmentKind::Stop;
  s.decel = decel;
  s.hold = hold;
  return s;
}

inline Segment go(double accel, double speed) {
  Segment s;
  s.kind = SegmentKind::Go;
  s.accel = accel;
  s.target_speed = speed;
  return s;
}

inline Scenario noiseless(Scenario s) {
  s.noise = {0.0, 0.0, 0.0};
  s.p_miss = 0.0;
  s.clutter_rate = 0.0;
  return s;
}

}  // namespace immot::testing
