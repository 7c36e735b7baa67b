#pragma once

#include "immot/core_types.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace immot {

/// The five primitive motion models of the filter bank.
enum class ModelId { CV, CA, CT, CTV, CTA };

inline constexpr std::array<ModelId, 5> kAllModels{ModelId::CV, ModelId::CA, ModelId::CT,
                                                   ModelId::CTV, ModelId::CTA};

inline std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::CV: return "CV";
    case ModelId::CA: return "CA";
    case ModelId::CT: return "CT";
    case ModelId::CTV: return "CTV";
    case ModelId::CTA: return "CTA";
  }
  return "?";
}

inline std::optional<ModelId> model_from_string(std::string_view s) {
  for (ModelId id : kAllModels) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

inline bool is_turning(ModelId id) {
  return id == ModelId::CT || id == ModelId::CTV || id == ModelId::CTA;
}

inline bool has_acceleration(ModelId id) { return id == ModelId::CA || id == ModelId::CTA; }

/// Continuous white-noise intensities driving each block of the state.
struct NoiseIntensity {
  double accel = 0.5;     // m/s^2, planar position/velocity (models without acceleration state)
  double jerk = 1.0;      // m/s^3, planar acceleration (CA, CTA)
  double yaw = 0.1;       // rad/s^2, heading and turn rate
  double vertical = 0.1;  // m/s^2, z / vz
  double size = 0.05;     // m/sqrt(s), box dimension random walk

  static NoiseIntensity defaults_for(ModelId id) {
    NoiseIntensity q;
    // Coordinated turn lets speed drift; the constant-velocity turn does not.
    if (id == ModelId::CT) q.accel = 1.0;
    return q;
  }

  static NoiseIntensity zero() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

struct MotionModel {
  ModelId id = ModelId::CV;
  double dt = 0.1;
  NoiseIntensity q = NoiseIntensity::defaults_for(ModelId::CV);

  static MotionModel make(ModelId id, double dt) { return {id, dt, NoiseIntensity::defaults_for(id)}; }

  [[nodiscard]] MotionModel with_dt(double new_dt) const { return {id, new_dt, q}; }
};

namespace detail {

inline double value_of(double v) { return v; }
template <typename D>
double value_of(const Eigen::AutoDiffScalar<D>& v) {
  return v.value();
}

/// Integrals of the rotation R(w s) over [0, t]:
///   s1 = int cos, c1 = int sin, s2 = int s*cos, c2 = int s*sin.
/// Second-order Taylor forms take over below |w| < 1e-4.
template <typename T>
struct TurnIntegrals {
  T cos_wt, sin_wt, s1, c1, s2, c2;
};

inline constexpr double kTurnRateEpsilon = 1e-4;

template <typename T>
TurnIntegrals<T> turn_integrals(const T& w, double t) {
  using std::cos;
  using std::sin;
  const T wt = w * t;
  TurnIntegrals<T> r{cos(wt), sin(wt), T(0), T(0), T(0), T(0)};
  if (std::abs(value_of(w)) < kTurnRateEpsilon) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    const double t5 = t4 * t;
    const T w2 = w * w;
    r.s1 = t - w2 * (t3 / 6.0);
    r.c1 = w * (t2 / 2.0) - w2 * w * (t4 / 24.0);
    r.s2 = t2 / 2.0 - w2 * (t4 / 8.0);
    r.c2 = w * (t3 / 3.0) - w2 * w * (t5 / 30.0);
  } else {
    // 1 - cos(wt) = 2 sin^2(wt / 2) avoids cancellation just above the threshold.
    const T half = sin(wt * 0.5);
    const T one_minus_cos = 2.0 * half * half;
    r.s1 = r.sin_wt / w;
    r.c1 = one_minus_cos / w;
    r.s2 = (wt * r.sin_wt - one_minus_cos) / (w * w);
    r.c2 = (r.sin_wt - wt * r.cos_wt) / (w * w);
  }
  return r;
}

/// Noise-free kinematics x(t+dt) = f(x(t)) of each model, theta left unwrapped.
/// Turning models rotate velocity (and, for CTA, acceleration) at the turn rate:
///   v' = w J v + a,  a' = w J a.
template <typename T>
Eigen::Matrix<T, kStateDim, 1> propagate(ModelId id, const Eigen::Matrix<T, kStateDim, 1>& s, double dt) {
  using namespace idx;
  Eigen::Matrix<T, kStateDim, 1> o = s;
  o(Z) = s(Z) + s(Vz) * dt;

  switch (id) {
    case ModelId::CV:
      o(X) = s(X) + s(Vx) * dt;
      o(Y) = s(Y) + s(Vy) * dt;
      o(Omega) = T(0);
      o(Ax) = T(0);
      o(Ay) = T(0);
      break;
    case ModelId::CA:
      o(X) = s(X) + s(Vx) * dt + s(Ax) * (0.5 * dt * dt);
      o(Y) = s(Y) + s(Vy) * dt + s(Ay) * (0.5 * dt * dt);
      o(Vx) = s(Vx) + s(Ax) * dt;
      o(Vy) = s(Vy) + s(Ay) * dt;
      o(Omega) = T(0);
      break;
    case ModelId::CT:
    case ModelId::CTV:
    case ModelId::CTA: {
      const auto r = turn_integrals<T>(s(Omega), dt);
      const bool accel = id == ModelId::CTA;
      const T ax = accel ? T(s(Ax)) : T(0);
      const T ay = accel ? T(s(Ay)) : T(0);
      o(X) = s(X) + r.s1 * s(Vx) - r.c1 * s(Vy) + r.s2 * ax - r.c2 * ay;
      o(Y) = s(Y) + r.c1 * s(Vx) + r.s1 * s(Vy) + r.c2 * ax + r.s2 * ay;
      const T vx = s(Vx) + ax * dt;
      const T vy = s(Vy) + ay * dt;
      o(Vx) = r.cos_wt * vx - r.sin_wt * vy;
      o(Vy) = r.sin_wt * vx + r.cos_wt * vy;
      o(Theta) = s(Theta) + s(Omega) * dt;
      o(Ax) = r.cos_wt * ax - r.sin_wt * ay;
      o(Ay) = r.sin_wt * ax + r.cos_wt * ay;
      break;
    }
  }
  return o;
}

}  // namespace detail

struct Transition {
  StateMatrix F;
  StateVector x_pred;
};

/// One-step prediction of `state` and the matrix (CV, CA) or Jacobian (turning models) of the map.
inline Transition transition(const MotionModel& model, const StateVector& state) {
  using namespace idx;
  const double dt = model.dt;
  Transition out;
  switch (model.id) {
    case ModelId::CV:
    case ModelId::CA: {
      StateMatrix F = StateMatrix::Identity();
      F(X, Vx) = dt;
      F(Y, Vy) = dt;
      F(Z, Vz) = dt;
      F(Omega, Omega) = 0.0;
      if (model.id == ModelId::CV) {
        F(Ax, Ax) = 0.0;
        F(Ay, Ay) = 0.0;
      } else {
        F(X, Ax) = 0.5 * dt * dt;
        F(Y, Ay) = 0.5 * dt * dt;
        F(Vx, Ax) = dt;
        F(Vy, Ay) = dt;
      }
      out.F = F;
      out.x_pred = F * state;
      break;
    }
    default: {
      using Jet = Eigen::AutoDiffScalar<StateVector>;
      Eigen::Matrix<Jet, kStateDim, 1> s;
      for (int i = 0; i < kStateDim; ++i) {
        s(i) = Jet(state(i), kStateDim, i);
      }
      const auto o = detail::propagate<Jet>(model.id, s, dt);
      for (int i = 0; i < kStateDim; ++i) {
        out.x_pred(i) = o(i).value();
        out.F.row(i) = o(i).derivatives().transpose();
      }
      break;
    }
  }
  out.x_pred(Theta) = wrap_angle(out.x_pred(Theta));
  return out;
}

/// Prediction only, without the Jacobian.
inline StateVector predict_state(const MotionModel& model, const StateVector& state) {
  StateVector o = detail::propagate<double>(model.id, state, model.dt);
  o(idx::Theta) = wrap_angle(o(idx::Theta));
  return o;
}

/// Discretized process noise: white acceleration (or jerk for CA/CTA) on the planar
/// kinematics, white acceleration on z, white yaw acceleration on (theta, omega) and a
/// random walk on the box dimensions.
inline StateMatrix process_noise(const MotionModel& model) {
  using namespace idx;
  const double dt = model.dt;
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const double dt4 = dt3 * dt;
  const double dt5 = dt4 * dt;
  const NoiseIntensity& q = model.q;
  StateMatrix Q = StateMatrix::Zero();

  for (int d : {L, W, H}) Q(d, d) = q.size * q.size * dt;

  const auto wna = [&](int p, int v, double intensity) {
    const double s = intensity * intensity;
    Q(p, p) += s * dt3 / 3.0;
    Q(p, v) += s * dt2 / 2.0;
    Q(v, p) += s * dt2 / 2.0;
    Q(v, v) += s * dt;
  };

  if (has_acceleration(model.id)) {
    const double s = q.jerk * q.jerk;
    for (auto [p, v, a] : {std::array{X, Vx, Ax}, std::array{Y, Vy, Ay}}) {
      Q(p, p) += s * dt5 / 20.0;
      Q(p, v) += s * dt4 / 8.0;
      Q(p, a) += s * dt3 / 6.0;
      Q(v, v) += s * dt3 / 3.0;
      Q(v, a) += s * dt2 / 2.0;
      Q(a, a) += s * dt;
      Q(v, p) = Q(p, v);
      Q(a, p) = Q(p, a);
      Q(a, v) = Q(v, a);
    }
  } else {
    wna(X, Vx, q.accel);
    wna(Y, Vy, q.accel);
  }
  wna(Z, Vz, q.vertical);
  wna(Theta, Omega, q.yaw);
  return Q;
}

}  // namespace immot
