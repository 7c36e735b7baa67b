#pragma once

#include "immot/core_types.hpp"
#include "immot/motion_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace immot {

inline constexpr double kInnovationJitter = 1e-9;

/// Selector H picking (l, w, h, x, y, z, theta) out of the state, plus detector noise R.
struct MeasurementModel {
  Eigen::Matrix<double, kMeasDim, kStateDim> H = Eigen::Matrix<double, kMeasDim, kStateDim>::Identity();
  MeasMatrix R = MeasMatrix::Identity();

  /// Diagonal R from per-component standard deviations.
  static MeasurementModel from_sigmas(double dims, double position, double yaw) {
    MeasurementModel mm;
    MeasVector d;
    d << dims, dims, dims, position, position, position, yaw;
    mm.R = d.cwiseAbs2().asDiagonal();
    return mm;
  }
};

namespace detail {

template <typename Derived>
void require_psd(const Eigen::MatrixBase<Derived>& P, const char* what) {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  if (!P.allFinite()) throw NumericalError(std::string(what) + ": non-finite covariance");
  const double scale = 1.0 + P.diagonal().cwiseAbs().sum();
  Mat shifted = P;
  shifted.diagonal().array() += 1e-9 * scale;
  Eigen::LLT<Mat> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": covariance is not positive semidefinite");
  }
}

}  // namespace detail

// ============================================================
// Generic linear filter steps (any fixed dimension)
// ============================================================

template <int N>
GaussianT<N> predict_linear(const GaussianT<N>& est, const Eigen::Matrix<double, N, N>& F,
                            const Eigen::Matrix<double, N, N>& Q) {
  detail::require_psd(est.cov, "predict");
  GaussianT<N> out;
  out.mean = F * est.mean;
  out.cov = F * est.cov * F.transpose() + Q;
  symmetrize(out.cov);
  return out;
}

template <int N, int M>
struct UpdateResultT {
  GaussianT<N> posterior;
  Eigen::Matrix<double, M, 1> innovation;
  Eigen::Matrix<double, M, M> S;
  bool regularized = false;  // S needed diagonal jitter to factor
};

/// Kalman update. `angle_meas` / `angle_state` name the rows holding an angle (or -1);
/// that innovation component is wrapped before the gain is applied.
template <int N, int M>
UpdateResultT<N, M> update_linear(const GaussianT<N>& prior, const Eigen::Matrix<double, M, 1>& z,
                                  const Eigen::Matrix<double, M, N>& H,
                                  const Eigen::Matrix<double, M, M>& R, int angle_meas = -1,
                                  int angle_state = -1) {
  using MatM = Eigen::Matrix<double, M, M>;
  UpdateResultT<N, M> out;
  out.innovation = z - H * prior.mean;
  if (angle_meas >= 0) out.innovation(angle_meas) = wrap_angle(out.innovation(angle_meas));

  const Eigen::Matrix<double, N, M> PHt = prior.cov * H.transpose();
  out.S = H * PHt + R;
  symmetrize(out.S);
  Eigen::LLT<MatM> llt(out.S);
  if (llt.info() != Eigen::Success) {
    out.S.diagonal().array() += kInnovationJitter;
    out.regularized = true;
    llt.compute(out.S);
    if (llt.info() != Eigen::Success) throw NumericalError("update: innovation covariance is singular");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T.
  const Eigen::Matrix<double, N, M> K = llt.solve(PHt.transpose()).transpose();
  out.posterior.mean = prior.mean + K * out.innovation;
  if (angle_state >= 0) out.posterior.mean(angle_state) = wrap_angle(out.posterior.mean(angle_state));
  out.posterior.cov = (Eigen::Matrix<double, N, N>::Identity() - K * H) * prior.cov;
  symmetrize(out.posterior.cov);
  return out;
}

/// Log density of N(innovation; 0, S).
template <int M>
double gaussian_log_likelihood(const Eigen::Matrix<double, M, 1>& innovation,
                               const Eigen::Matrix<double, M, M>& S) {
  Eigen::LLT<Eigen::Matrix<double, M, M>> llt(S);
  if (llt.info() != Eigen::Success || !S.allFinite()) {
    throw NumericalError("gaussian_log_likelihood: S is not positive definite");
  }
  const double maha = llt.matrixL().solve(innovation).squaredNorm();
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double dim = static_cast<double>(innovation.size());
  return -0.5 * (maha + log_det + dim * std::log(2.0 * std::numbers::pi));
}

template <int M>
double gaussian_likelihood(const Eigen::Matrix<double, M, 1>& innovation,
                           const Eigen::Matrix<double, M, M>& S) {
  return std::exp(gaussian_log_likelihood(innovation, S));
}

/// KL(prior || posterior) between two Gaussians, in nats.
template <int N>
double kl_divergence(const GaussianT<N>& prior, const GaussianT<N>& posterior, int angle_index = -1) {
  using Mat = Eigen::Matrix<double, N, N>;
  Eigen::LLT<Mat> post(posterior.cov);
  if (post.info() != Eigen::Success || !posterior.cov.allFinite()) {
    throw NumericalError("kl_divergence: posterior covariance is singular");
  }
  detail::require_psd(prior.cov, "kl_divergence");
  Eigen::Matrix<double, N, 1> diff = posterior.mean - prior.mean;
  if (angle_index >= 0) diff(angle_index) = wrap_angle(diff(angle_index));

  const Mat L = post.matrixL();
  const double log_det_post = 2.0 * L.diagonal().array().log().sum();
  const double det_prior = Eigen::PartialPivLU<Mat>(prior.cov).determinant();
  const double log_det_prior =
      det_prior > 0.0 ? std::log(det_prior) : -std::numeric_limits<double>::infinity();
  const double trace_term = post.solve(prior.cov).trace();
  const double maha = post.matrixL().solve(diff).squaredNorm();
  const double n = static_cast<double>(prior.mean.size());
  return 0.5 * (log_det_post - log_det_prior - n + trace_term + maha);
}

// ============================================================
// State-space specific wrappers
// ============================================================

inline Gaussian predict(const Gaussian& est, const MotionModel& model) {
  detail::require_psd(est.cov, "predict");
  const Transition tr = transition(model, est.mean);
  Gaussian out;
  out.mean = tr.x_pred;
  out.cov = tr.F * est.cov * tr.F.transpose() + process_noise(model);
  symmetrize(out.cov);
  return out;
}

using UpdateResult = UpdateResultT<kStateDim, kMeasDim>;

inline UpdateResult update(const Gaussian& est, const BoxMeasurement& z, const MeasurementModel& mm) {
  return update_linear<kStateDim, kMeasDim>(est, z.as_vector(), mm.H, mm.R, idx::Theta, idx::Theta);
}

/// Innovation and its covariance without forming the posterior.
inline std::pair<MeasVector, MeasMatrix> innovation(const Gaussian& est, const BoxMeasurement& z,
                                                    const MeasurementModel& mm) {
  MeasVector nu = z.as_vector() - mm.H * est.mean;
  nu(idx::Theta) = wrap_angle(nu(idx::Theta));
  MeasMatrix S = mm.H * est.cov * mm.H.transpose() + mm.R;
  symmetrize(S);
  return {nu, S};
}

inline double kl_divergence(const Gaussian& prior, const Gaussian& posterior) {
  return kl_divergence<kStateDim>(prior, posterior, idx::Theta);
}

}  // namespace immot
