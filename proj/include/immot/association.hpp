#pragma once

#include "immot/box_iou.hpp"
#include "immot/core_types.hpp"
#include "immot/hungarian.hpp"
#include "immot/imm.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace immot {

/// Cost used to score detection-track pairs.
enum class AssociationMetric {
  KfIou,         // 1 - IoU against a single-model KF prediction
  ImmIou,        // 1 - IoU against the IMM prediction weighted by the previous mode probabilities
  ImmPosterior,  // residual against the IMM prediction weighted by the candidate's posterior modes
};

inline std::string_view to_string(AssociationMetric m) {
  switch (m) {
    case AssociationMetric::KfIou: return "kf-iou";
    case AssociationMetric::ImmIou: return "imm-iou";
    case AssociationMetric::ImmPosterior: return "imm-posterior";
  }
  return "?";
}

inline std::optional<AssociationMetric> metric_from_string(std::string_view s) {
  for (auto m : {AssociationMetric::KfIou, AssociationMetric::ImmIou, AssociationMetric::ImmPosterior}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

/// 99.7% quantile of the chi-square distribution with 3 degrees of freedom.
inline constexpr double kChiSquare3Dof997 = 13.931422665512084;

struct GateParams {
  double radius = 10.0;  // BEV center distance, m
  double chi2 = kChiSquare3Dof997;
};

/// One track as seen by association at frame t: the state after t-1 and its frame-t prediction.
struct PredictedTrack {
  ImmState before;
  ImmPrediction prediction;
  Gaussian prior;  // moment-matched per-model predictions, weighted by the predicted mode probabilities

  static PredictedTrack make(ImmState state, const MeasurementModel& mm) {
    PredictedTrack t;
    t.prediction = imm_predict(state, mm);
    t.prior = mixture_moments(t.prediction.predicted, t.prediction.predicted_mu / t.prediction.predicted_mu.sum());
    t.before = std::move(state);
    return t;
  }

  /// Index of the model with the highest predicted mode probability.
  [[nodiscard]] std::size_t best_model() const {
    Eigen::Index i = 0;
    prediction.predicted_mu.maxCoeff(&i);
    return static_cast<std::size_t>(i);
  }
};

/// Squared Mahalanobis distance of the (x, y, z) innovation under one model's prediction.
inline double position_mahalanobis2(const BoxMeasurement& det, const PredictedTrack& track, std::size_t model) {
  const Eigen::Vector3d nu(det.x - track.prediction.z_pred[model](idx::X),
                           det.y - track.prediction.z_pred[model](idx::Y),
                           det.z - track.prediction.z_pred[model](idx::Z));
  const Eigen::Matrix3d S = track.prediction.S[model].block<3, 3>(idx::X, idx::X);
  return nu.dot(S.ldlt().solve(nu));
}

inline bool gate_pair(const BoxMeasurement& det, const PredictedTrack& track, const GateParams& params) {
  const double d = std::hypot(det.x - track.prior.mean(idx::X), det.y - track.prior.mean(idx::Y));
  if (!(d <= params.radius)) return false;
  return position_mahalanobis2(det, track, track.best_model()) <= params.chi2;
}

/// Feasibility mask, rows = detections, columns = tracks.
inline Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> gate(const std::vector<BoxMeasurement>& detections,
                                                               const std::vector<PredictedTrack>& tracks,
                                                               const GateParams& params = {}) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(detections.size(), tracks.size());
  for (std::size_t d = 0; d < detections.size(); ++d) {
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      mask(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t)) = gate_pair(detections[d], tracks[t], params);
    }
  }
  return mask;
}

/// Weighted L2 norm of z - H x with the heading difference wrapped and scaled.
inline double box_residual(const BoxMeasurement& det, const StateVector& x, double angle_weight) {
  MeasVector r = det.as_vector() - x.head<kMeasDim>();
  r(idx::Theta) = angle_weight * wrap_angle(r(idx::Theta));
  return r.norm();
}

/// Association cost from the hybrid prediction weighted by the mode probabilities this
/// detection would produce. The track is only read.
inline double posterior_residual_cost(const BoxMeasurement& det, const PredictedTrack& track,
                                      double angle_weight = 2.0) {
  const ModePosterior post = mode_posterior(track.prediction, det);
  return box_residual(det, weighted_mean(track.prediction.propagated, post.mu), angle_weight);
}

/// Prediction prior weighted by the previous mode probabilities (plain KF for a single model).
inline StateVector prior_hybrid_state(const PredictedTrack& track) {
  return weighted_mean(track.prediction.propagated, track.before.mu);
}

inline double iou_cost(const BoxMeasurement& det, const PredictedTrack& track) {
  return 1.0 - iou_3d(det, box_of(prior_hybrid_state(track))).value;
}

struct CostParams {
  AssociationMetric metric = AssociationMetric::ImmPosterior;
  GateParams gate;
  double angle_weight = 2.0;
  double iou_min = 0.01;  // IoU metrics: pairs below this overlap are infeasible
};

/// Gated cost matrix for the configured metric; gated-out pairs are kInfeasible.
inline CostMatrix build_costs(const std::vector<BoxMeasurement>& detections,
                              const std::vector<PredictedTrack>& tracks, const CostParams& params) {
  CostMatrix c = CostMatrix::Constant(static_cast<Eigen::Index>(detections.size()),
                                      static_cast<Eigen::Index>(tracks.size()), kInfeasible);
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const bool iou_metric = params.metric != AssociationMetric::ImmPosterior;
    const BoxMeasurement prior_box = iou_metric ? box_of(prior_hybrid_state(tracks[t])) : BoxMeasurement{};
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (!gate_pair(detections[d], tracks[t], params.gate)) continue;
      double cost = kInfeasible;
      if (iou_metric) {
        const double iou = iou_3d(detections[d], prior_box).value;
        if (iou >= params.iou_min) cost = 1.0 - iou;
      } else {
        cost = posterior_residual_cost(detections[d], tracks[t], params.angle_weight);
      }
      c(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t)) = cost;
    }
  }
  return c;
}

}  // namespace immot
