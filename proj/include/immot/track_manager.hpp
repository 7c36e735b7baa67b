#pragma once

#include "immot/association.hpp"
#include "immot/core_types.hpp"
#include "immot/hungarian.hpp"
#include "immot/imm.hpp"
#include "immot/kalman.hpp"
#include "immot/motion_models.hpp"
#include "immot/road_context.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace immot {

enum class TrackStatus { Tentative, Confirmed, Coasting };

inline std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Coasting: return "coasting";
  }
  return "?";
}

inline std::optional<TrackStatus> status_from_string(std::string_view s) {
  for (auto v : {TrackStatus::Tentative, TrackStatus::Confirmed, TrackStatus::Coasting}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

/// Standard deviations of the detector noise, per measurement block.
struct MeasurementSigmas {
  double dims = 0.1;
  double position = 0.3;
  double yaw = 0.05;
};

/// Prior standard deviations for the unobserved part of a freshly created track.
struct InitialStd {
  double velocity = 10.0;
  double vertical_velocity = 1.0;
  double turn_rate = 0.5;
  double acceleration = 2.0;
};

struct TrackerConfig {
  int confirm_hits = 3;
  int max_misses = 5;
  double gate_radius = 10.0;
  double gate_chi2 = kChiSquare3Dof997;
  AssociationMetric metric = AssociationMetric::ImmPosterior;
  double angle_weight = 2.0;
  double iou_min = 0.01;
  std::vector<MotionModel> models = default_bank();
  Eigen::VectorXd mu0 = default_mode_prior();
  Eigen::MatrixXd tpm = immot::default_tpm();
  MeasurementSigmas r;
  InitialStd init;
  ContextOptions context;
  double default_dt = 0.1;     // used only when two frames share a timestamp
  bool report_coasting = true;  // emit confirmed tracks that missed this frame

  static std::vector<MotionModel> default_bank(double dt = 0.1) {
    std::vector<MotionModel> bank;
    for (ModelId id : kAllModels) bank.push_back(MotionModel::make(id, dt));
    return bank;
  }

  /// Switches the association metric; the plain KF baseline runs a single CV model.
  void set_metric(AssociationMetric m) {
    metric = m;
    if (m == AssociationMetric::KfIou) {
      models = {MotionModel::make(ModelId::CV, default_dt)};
      mu0 = Eigen::VectorXd::Ones(1);
      tpm = Eigen::MatrixXd::Ones(1, 1);
      context.enabled = false;
    }
  }

  [[nodiscard]] MeasurementModel measurement_model() const {
    return MeasurementModel::from_sigmas(r.dims, r.position, r.yaw);
  }

  void validate() const {
    if (confirm_hits < 1 || max_misses < 1) throw ValidationError("config: counts must be >= 1");
    if (!(gate_radius > 0.0) || !(gate_chi2 > 0.0)) throw ValidationError("config: gate must be positive");
    if (models.empty()) throw ValidationError("config: empty model bank");
    const auto m = static_cast<Eigen::Index>(models.size());
    if (mu0.size() != m || !on_simplex(mu0)) throw ValidationError("config: mu0 must be a probability vector over the models");
    if (tpm.rows() != m || !is_row_stochastic(tpm)) throw ValidationError("config: TPM must be row-stochastic over the models");
    if (!(r.dims > 0.0) || !(r.position > 0.0) || !(r.yaw > 0.0)) throw ValidationError("config: R sigmas must be positive");
    if (context.k < 1 || !(context.radius > 0.0)) throw ValidationError("config: context k and radius must be positive");
    if (!(default_dt > 0.0)) throw ValidationError("config: default_dt must be positive");
  }
};

struct TrackHistoryEntry {
  int frame = 0;
  StateVector state;
  Eigen::VectorXd mu;
};

struct Track {
  int id = 0;
  ImmState imm;
  Gaussian overall;
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;
  int misses = 0;
  int age = 0;
  std::vector<TrackHistoryEntry> history;
};

/// Fresh tentative track seeded from one detection: box copied, motion terms zero.
inline Track initialize_track(const BoxMeasurement& det, const TrackerConfig& config) {
  StateVector mean = StateVector::Zero();
  mean.head<kMeasDim>() = det.as_vector();
  StateVector sd;
  sd << config.r.dims, config.r.dims, config.r.dims, config.r.position, config.r.position, config.r.position,
      config.r.yaw, config.init.velocity, config.init.velocity, config.init.vertical_velocity, config.init.turn_rate,
      config.init.acceleration, config.init.acceleration;
  Gaussian g;
  g.mean = mean;
  g.cov = sd.cwiseAbs2().asDiagonal();

  Track t;
  t.imm.models = config.models;
  t.imm.per_model.assign(config.models.size(), g);
  t.imm.mu = config.mu0;
  t.imm.tpm = config.tpm;
  t.overall = g;
  t.hits = 1;
  t.age = 1;
  t.status = config.confirm_hits <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
  return t;
}

struct TrackSnapshot {
  int frame = 0;
  int id = 0;
  BoxMeasurement box;
  Eigen::VectorXd mu;
  TrackStatus status = TrackStatus::Confirmed;
};

struct FrameOutput {
  int frame = 0;
  double time = 0.0;
  std::vector<TrackSnapshot> tracks;
  std::vector<std::pair<int, int>> matches;  // (detection index, track id) for every matched track
};

/// Counters for the invariant sweep and for numerical corner cases hit during a run.
struct TrackerDiagnostics {
  std::size_t tpm_checks = 0;
  std::size_t tpm_violations = 0;
  std::size_t mu_checks = 0;
  std::size_t mu_violations = 0;
  std::size_t likelihood_underflows = 0;
  std::size_t mixing_fallbacks = 0;
  std::size_t context_fallbacks = 0;
};

/// Frame-by-frame multi-object tracker: predict, gate, score, assign, update, manage lifespans,
/// then refresh the confirmed tracks' TPMs from the road context.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config, const ContextMap* map = nullptr)
      : config_(std::move(config)), map_(map), mm_(config_.measurement_model()) {
    config_.validate();
  }

  FrameOutput step(const std::vector<BoxMeasurement>& detections, const Pose2D& ego, double time) {
    return step(DetectionFrame{frame_counter_, time, ego, detections});
  }

  FrameOutput step(const DetectionFrame& frame) {
    if (last_time_ && frame.time < *last_time_) {
      throw ValidationError("tracker: frame time " + std::to_string(frame.time) + " precedes " +
                            std::to_string(*last_time_));
    }
    for (const auto& d : frame.detections) {
      if (!d.valid()) throw ValidationError("tracker: invalid detection box in frame " + std::to_string(frame.frame));
    }
    double dt = last_time_ ? frame.time - *last_time_ : config_.default_dt;
    if (!(dt > 0.0)) dt = 1e-6;
    last_time_ = frame.time;
    frame_counter_ = frame.frame + 1;
    ++frames_seen_;

    // (1) prediction
    std::vector<PredictedTrack> predicted;
    predicted.reserve(tracks_.size());
    for (Track& t : tracks_) {
      for (MotionModel& m : t.imm.models) m.dt = dt;
      predicted.push_back(PredictedTrack::make(t.imm, mm_));
      if (predicted.back().prediction.mixing_fallback) ++diag_.mixing_fallbacks;
    }

    // (2)-(3) gating, costs, assignment
    CostParams cp;
    cp.metric = config_.metric;
    cp.gate = {config_.gate_radius, config_.gate_chi2};
    cp.angle_weight = config_.angle_weight;
    cp.iou_min = config_.iou_min;
    const CostMatrix costs = build_costs(frame.detections, predicted, cp);
    const AssociationResult assoc = solve_assignment(costs);

    FrameOutput out;
    out.frame = frame.frame;
    out.time = frame.time;

    // (4) matched tracks
    for (const auto& [d, ti] : assoc.matches) {
      Track& t = tracks_[static_cast<std::size_t>(ti)];
      ImmStepResult r = imm_update(predicted[static_cast<std::size_t>(ti)].before,
                                   predicted[static_cast<std::size_t>(ti)].prediction,
                                   frame.detections[static_cast<std::size_t>(d)], mm_);
      if (r.underflow) ++diag_.likelihood_underflows;
      t.imm = std::move(r.state);
      t.overall = r.overall;
      ++t.hits;
      t.misses = 0;
      ++t.age;
      if (t.status == TrackStatus::Tentative && t.hits >= config_.confirm_hits) t.status = TrackStatus::Confirmed;
      if (t.status == TrackStatus::Coasting) t.status = TrackStatus::Confirmed;
      out.matches.emplace_back(d, t.id);
    }

    // (5) unmatched tracks coast on the mixed prediction
    std::vector<char> remove(tracks_.size(), 0);
    for (int ti : assoc.unmatched_tracks) {
      Track& t = tracks_[static_cast<std::size_t>(ti)];
      ImmStepResult r = imm_coast(predicted[static_cast<std::size_t>(ti)].before,
                                  predicted[static_cast<std::size_t>(ti)].prediction);
      t.imm = std::move(r.state);
      t.overall = r.overall;
      t.hits = 0;
      ++t.misses;
      ++t.age;
      if (t.status == TrackStatus::Tentative) {
        remove[static_cast<std::size_t>(ti)] = 1;
      } else {
        t.status = TrackStatus::Coasting;
        if (t.misses >= config_.max_misses) remove[static_cast<std::size_t>(ti)] = 1;
      }
    }

    // (7) lifespan: drop terminated tracks before births so indices stay simple
    std::vector<Track> kept;
    kept.reserve(tracks_.size() + assoc.unmatched_detections.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (!remove[i]) kept.push_back(std::move(tracks_[i]));
    }
    tracks_ = std::move(kept);

    // (6) births
    for (int d : assoc.unmatched_detections) {
      Track t = initialize_track(frame.detections[static_cast<std::size_t>(d)], config_);
      t.id = next_id_++;
      for (MotionModel& m : t.imm.models) m.dt = dt;
      tracks_.push_back(std::move(t));
    }

    // Context-driven TPM for the next frame, invariant sweep, snapshots.
    for (Track& t : tracks_) {
      if (map_ != nullptr && config_.context.enabled && t.status != TrackStatus::Tentative) {
        const ContextTpm ctx = context_tpm(*map_, to_map_frame(t.overall.mean, frame.ego), frame.time, config_.context);
        if (ctx.fallback) ++diag_.context_fallbacks;
        if (ctx.tpm.rows() == static_cast<Eigen::Index>(t.imm.size())) t.imm.tpm = ctx.tpm;
      }
      ++diag_.tpm_checks;
      if (!is_row_stochastic(t.imm.tpm)) ++diag_.tpm_violations;
      ++diag_.mu_checks;
      if (!on_simplex(t.imm.mu)) ++diag_.mu_violations;

      t.history.push_back({frame.frame, t.overall.mean, t.imm.mu});
      // During the first confirm_hits - 1 frames no track can be confirmed yet, so tentative
      // tracks are reported to avoid a guaranteed miss at the start of every sequence.
      const bool warmup = frames_seen_ < config_.confirm_hits && t.status == TrackStatus::Tentative;
      const bool report = t.status == TrackStatus::Confirmed || warmup ||
                          (t.status == TrackStatus::Coasting && config_.report_coasting);
      if (report) out.tracks.push_back({frame.frame, t.id, box_of(t.overall.mean), t.imm.mu, t.status});
    }
    std::sort(out.tracks.begin(), out.tracks.end(),
              [](const TrackSnapshot& a, const TrackSnapshot& b) { return a.id < b.id; });
    return out;
  }

  [[nodiscard]] const std::vector<Track>& tracks() const { return tracks_; }
  [[nodiscard]] const TrackerDiagnostics& diagnostics() const { return diag_; }
  [[nodiscard]] const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  const ContextMap* map_ = nullptr;
  MeasurementModel mm_;
  std::vector<Track> tracks_;
  TrackerDiagnostics diag_;
  std::optional<double> last_time_;
  int frame_counter_ = 0;
  int frames_seen_ = 0;
  int next_id_ = 1;
};

}  // namespace immot
