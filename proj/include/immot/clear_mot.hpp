#pragma once

#include "immot/box_iou.hpp"
#include "immot/core_types.hpp"
#include "immot/hungarian.hpp"
#include "immot/simulator.hpp"
#include "immot/track_manager.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace immot {

/// One emitted track box at one frame, as written to and read from track files.
struct TrackRecord {
  int frame = 0;
  int id = 0;
  BoxMeasurement box;
  Eigen::VectorXd mu;
  TrackStatus status = TrackStatus::Confirmed;
};

inline std::vector<TrackRecord> to_records(const std::vector<FrameOutput>& frames) {
  std::vector<TrackRecord> out;
  for (const auto& f : frames) {
    for (const auto& s : f.tracks) out.push_back({s.frame, s.id, s.box, s.mu, s.status});
  }
  return out;
}

/// CLEAR-MOT summary. Percentages are in [0, 100] except MOTA, which can go negative.
struct MotReport {
  double mota = 0.0;
  double motp = 0.0;
  double mt = 0.0;
  double ml = 0.0;
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long frag = 0;
  long gt_total = 0;
  long matches = 0;
  long gt_trajectories = 0;

  bool operator==(const MotReport&) const = default;
};

/// Frame-by-frame IoU matching of tracks to ground truth with correspondence carry-over,
/// then the usual CLEAR-MOT counts. MOTP is the mean matched IoU.
inline MotReport evaluate(const std::vector<GroundTruthFrame>& truth, const std::vector<TrackRecord>& tracks,
                          double iou_threshold = 0.25) {
  std::map<int, std::size_t> frame_pos;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!frame_pos.emplace(truth[i].frame, i).second) {
      throw ValidationError("evaluate: duplicate truth frame " + std::to_string(truth[i].frame));
    }
  }
  std::vector<std::vector<const TrackRecord*>> per_frame(truth.size());
  for (const auto& r : tracks) {
    const auto it = frame_pos.find(r.frame);
    if (it == frame_pos.end()) {
      throw ValidationError("evaluate: track frame " + std::to_string(r.frame) + " outside the truth frame range");
    }
    per_frame[it->second].push_back(&r);
  }

  struct GtHistory {
    long present = 0;
    long tracked = 0;
    int last_id = -1;          // last track ever matched
    bool tracked_prev = false;  // matched in the previous frame where it was present
    bool ever_tracked = false;
  };
  std::map<int, GtHistory> hist;
  std::unordered_map<int, int> prev_match;  // gt id -> track id matched in the previous frame

  MotReport rep;
  double iou_sum = 0.0;
  for (std::size_t f = 0; f < truth.size(); ++f) {
    const auto& objs = truth[f].objects;
    const auto& hyps = per_frame[f];
    rep.gt_total += static_cast<long>(objs.size());

    std::vector<int> gt_to_hyp(objs.size(), -1);
    std::vector<char> hyp_used(hyps.size(), 0);
    std::vector<double> match_iou(objs.size(), 0.0);

    // Keep last frame's correspondences that are still valid.
    for (std::size_t g = 0; g < objs.size(); ++g) {
      const auto pm = prev_match.find(objs[g].id);
      if (pm == prev_match.end()) continue;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        if (hyp_used[h] || hyps[h]->id != pm->second) continue;
        const double iou = iou_3d(objs[g].box, hyps[h]->box).value;
        if (iou >= iou_threshold) {
          gt_to_hyp[g] = static_cast<int>(h);
          hyp_used[h] = 1;
          match_iou[g] = iou;
        }
        break;
      }
    }

    // Optimal matching of the rest on 1 - IoU.
    std::vector<std::size_t> free_gt, free_hyp;
    for (std::size_t g = 0; g < objs.size(); ++g) if (gt_to_hyp[g] < 0) free_gt.push_back(g);
    for (std::size_t h = 0; h < hyps.size(); ++h) if (!hyp_used[h]) free_hyp.push_back(h);
    if (!free_gt.empty() && !free_hyp.empty()) {
      CostMatrix c(static_cast<Eigen::Index>(free_gt.size()), static_cast<Eigen::Index>(free_hyp.size()));
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_hyp.size(); ++b) {
          const double iou = iou_3d(objs[free_gt[a]].box, hyps[free_hyp[b]]->box).value;
          c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = iou >= iou_threshold ? 1.0 - iou : kInfeasible;
        }
      }
      for (const auto& [a, b] : solve_assignment(c).matches) {
        const std::size_t g = free_gt[static_cast<std::size_t>(a)];
        const std::size_t h = free_hyp[static_cast<std::size_t>(b)];
        gt_to_hyp[g] = static_cast<int>(h);
        hyp_used[h] = 1;
        match_iou[g] = 1.0 - c(a, b);
      }
    }

    std::unordered_map<int, int> this_match;
    for (std::size_t g = 0; g < objs.size(); ++g) {
      GtHistory& gh = hist[objs[g].id];
      ++gh.present;
      if (gt_to_hyp[g] < 0) {
        ++rep.fn;
        gh.tracked_prev = false;
        continue;
      }
      const int tid = hyps[static_cast<std::size_t>(gt_to_hyp[g])]->id;
      ++rep.matches;
      ++gh.tracked;
      iou_sum += match_iou[g];
      if (gh.last_id >= 0 && gh.last_id != tid) ++rep.ids;
      if (gh.ever_tracked && !gh.tracked_prev) ++rep.frag;
      gh.last_id = tid;
      gh.tracked_prev = true;
      gh.ever_tracked = true;
      this_match[objs[g].id] = tid;
    }
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      if (!hyp_used[h]) ++rep.fp;
    }
    prev_match = std::move(this_match);
  }

  rep.gt_trajectories = static_cast<long>(hist.size());
  long mt = 0, ml = 0;
  for (const auto& [id, gh] : hist) {
    const double ratio = gh.present > 0 ? static_cast<double>(gh.tracked) / static_cast<double>(gh.present) : 0.0;
    if (ratio >= 0.8) ++mt;
    if (ratio <= 0.2) ++ml;
  }
  if (rep.gt_trajectories > 0) {
    rep.mt = 100.0 * static_cast<double>(mt) / static_cast<double>(rep.gt_trajectories);
    rep.ml = 100.0 * static_cast<double>(ml) / static_cast<double>(rep.gt_trajectories);
  }
  const double denom = static_cast<double>(std::max<long>(rep.gt_total, 1));
  rep.mota = 100.0 * (1.0 - static_cast<double>(rep.fp + rep.fn + rep.ids) / denom);
  rep.motp = rep.matches > 0 ? 100.0 * iou_sum / static_cast<double>(rep.matches) : 0.0;
  return rep;
}

}  // namespace immot
