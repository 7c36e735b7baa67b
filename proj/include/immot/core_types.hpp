#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace immot {

// ============================================================
// Dimensions and state layout
// ============================================================
inline constexpr int kStateDim = 13;
inline constexpr int kMeasDim = 7;

/// Index of each component inside the 13-dim state vector.
/// The first seven entries coincide with the box measurement layout.
namespace idx {
inline constexpr int L = 0;
inline constexpr int W = 1;
inline constexpr int H = 2;
inline constexpr int X = 3;
inline constexpr int Y = 4;
inline constexpr int Z = 5;
inline constexpr int Theta = 6;
inline constexpr int Vx = 7;
inline constexpr int Vy = 8;
inline constexpr int Vz = 9;
inline constexpr int Omega = 10;
inline constexpr int Ax = 11;
inline constexpr int Ay = 12;
}  // namespace idx

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;

// ============================================================
// Errors
// ============================================================

/// Malformed input: bad files, invalid scenarios, out-of-order frames.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A filter quantity lost positive (semi)definiteness or went non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ============================================================
// Angles
// ============================================================

/// Maps any finite angle to [-pi, pi).
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  if (a >= -std::numbers::pi && a < std::numbers::pi) return a;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  r -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (r >= std::numbers::pi) r -= two_pi;
  return r;
}

/// Shortest signed difference a - b.
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

// ============================================================
// Domain types
// ============================================================

/// Oriented 3D box as produced by a detector: dimensions, center, yaw, score.
struct BoxMeasurement {
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double score = 1.0;

  [[nodiscard]] bool valid() const {
    return l > 0.0 && w > 0.0 && h > 0.0 && std::isfinite(x) && std::isfinite(y) &&
           std::isfinite(z) && std::isfinite(theta) && theta >= -std::numbers::pi &&
           theta < std::numbers::pi;
  }

  [[nodiscard]] MeasVector as_vector() const {
    MeasVector v;
    v << l, w, h, x, y, z, theta;
    return v;
  }

  static BoxMeasurement from_vector(const MeasVector& v, double score = 1.0) {
    return {v(0), v(1), v(2), v(3), v(4), v(5), wrap_angle(v(6)), score};
  }

  bool operator==(const BoxMeasurement&) const = default;
};

/// Box part (first seven entries) of a state vector.
inline BoxMeasurement box_of(const StateVector& s, double score = 1.0) {
  return BoxMeasurement::from_vector(s.head<kMeasDim>(), score);
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  bool operator==(const Pose2D&) const = default;
};

/// All detections reported at one time instant, with the ego pose used to reach the map frame.
struct DetectionFrame {
  int frame = 0;
  double time = 0.0;
  Pose2D ego;
  std::vector<BoxMeasurement> detections;
};

/// Mean and covariance of one state estimate.
template <int N>
struct GaussianT {
  Eigen::Matrix<double, N, 1> mean = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> cov = Eigen::Matrix<double, N, N>::Identity();
};

using Gaussian = GaussianT<kStateDim>;

// ============================================================
// Matrix helpers
// ============================================================

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
  m = (0.5 * (m + m.transpose())).eval();
}

template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, double tol = 1e-9) {
  if (!m.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, Derived::RowsAtCompileTime,
                                              Derived::ColsAtCompileTime>>
      es(m.derived(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

/// Moves a pose given in the ego (tracker) frame into the map frame.
inline Pose2D to_map_frame(const Pose2D& local, const Pose2D& ego) {
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  return {ego.x + c * local.x - s * local.y, ego.y + s * local.x + c * local.y,
          wrap_angle(local.heading + ego.heading)};
}

/// Rotates the planar position and velocity parts of a state into the map frame.
inline StateVector to_map_frame(const StateVector& s, const Pose2D& ego) {
  const double c = std::cos(ego.heading);
  const double sn = std::sin(ego.heading);
  StateVector out = s;
  out(idx::X) = ego.x + c * s(idx::X) - sn * s(idx::Y);
  out(idx::Y) = ego.y + sn * s(idx::X) + c * s(idx::Y);
  out(idx::Vx) = c * s(idx::Vx) - sn * s(idx::Vy);
  out(idx::Vy) = sn * s(idx::Vx) + c * s(idx::Vy);
  out(idx::Ax) = c * s(idx::Ax) - sn * s(idx::Ay);
  out(idx::Ay) = sn * s(idx::Ax) + c * s(idx::Ay);
  out(idx::Theta) = wrap_angle(s(idx::Theta) + ego.heading);
  return out;
}

}  // namespace immot
