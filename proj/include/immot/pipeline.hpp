#pragma once

#include "immot/association.hpp"
#include "immot/clear_mot.hpp"
#include "immot/road_context.hpp"
#include "immot/simulator.hpp"
#include "immot/track_manager.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace immot {

struct TrackingRun {
  std::vector<FrameOutput> frames;
  TrackerDiagnostics diagnostics;
};

/// Runs a tracker over a whole detection stream.
inline TrackingRun run_tracker(const std::vector<DetectionFrame>& detections, const TrackerConfig& config,
                               const ContextMap* map = nullptr) {
  Tracker tracker(config, map);
  TrackingRun run;
  run.frames.reserve(detections.size());
  for (const auto& f : detections) run.frames.push_back(tracker.step(f));
  run.diagnostics = tracker.diagnostics();
  return run;
}

inline constexpr std::array<AssociationMetric, 3> kCompareMetrics{
    AssociationMetric::KfIou, AssociationMetric::ImmIou, AssociationMetric::ImmPosterior};

/// Tracker configuration for one of the three compared variants. Only the
/// posterior variant consults the road context.
inline TrackerConfig variant_config(TrackerConfig base, AssociationMetric metric) {
  base.set_metric(metric);
  if (metric != AssociationMetric::ImmPosterior) base.context.enabled = false;
  return base;
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::array<MotReport, 3> reports;  // indexed like kCompareMetrics
  std::array<TrackerDiagnostics, 3> diagnostics;
};

struct CompareResult {
  std::vector<SeedResult> seeds;
  std::array<MotReport, 3> totals;  // counts summed, percentages recomputed over all seeds

  [[nodiscard]] std::size_t tpm_violations() const {
    std::size_t n = 0;
    for (const auto& s : seeds)
      for (const auto& d : s.diagnostics) n += d.tpm_violations + d.mu_violations;
    return n;
  }
};

/// Pools per-seed reports: counts add up, MOTA/MOTP/MT/ML are recomputed from the pooled counts.
inline MotReport pool_reports(const std::vector<MotReport>& reports) {
  MotReport t;
  double iou_weighted = 0.0;
  double mt = 0.0;
  double ml = 0.0;
  for (const auto& r : reports) {
    t.fp += r.fp;
    t.fn += r.fn;
    t.ids += r.ids;
    t.frag += r.frag;
    t.gt_total += r.gt_total;
    t.matches += r.matches;
    t.gt_trajectories += r.gt_trajectories;
    iou_weighted += r.motp * static_cast<double>(r.matches);
    mt += r.mt * static_cast<double>(r.gt_trajectories);
    ml += r.ml * static_cast<double>(r.gt_trajectories);
  }
  t.mota = 100.0 * (1.0 - static_cast<double>(t.fp + t.fn + t.ids) / static_cast<double>(std::max<long>(t.gt_total, 1)));
  t.motp = t.matches > 0 ? iou_weighted / static_cast<double>(t.matches) : 0.0;
  if (t.gt_trajectories > 0) {
    t.mt = mt / static_cast<double>(t.gt_trajectories);
    t.ml = ml / static_cast<double>(t.gt_trajectories);
  }
  return t;
}

/// Simulates the scenario once per seed (base seed + 0..n-1) and evaluates all three trackers.
inline CompareResult compare(Scenario scenario, const TrackerConfig& base, const ContextMap* map, int seeds,
                             double iou_threshold = 0.25) {
  if (seeds < 1) throw ValidationError("compare: seed count must be >= 1");
  CompareResult out;
  const std::uint64_t first = scenario.seed;
  std::array<std::vector<MotReport>, 3> all;
  for (int k = 0; k < seeds; ++k) {
    scenario.seed = first + static_cast<std::uint64_t>(k);
    const SimulationOutput sim = generate(scenario);
    SeedResult sr;
    sr.seed = scenario.seed;
    for (std::size_t m = 0; m < kCompareMetrics.size(); ++m) {
      const TrackingRun run = run_tracker(sim.detections, variant_config(base, kCompareMetrics[m]), map);
      sr.reports[m] = evaluate(sim.truth, to_records(run.frames), iou_threshold);
      sr.diagnostics[m] = run.diagnostics;
      all[m].push_back(sr.reports[m]);
    }
    out.seeds.push_back(sr);
  }
  for (std::size_t m = 0; m < 3; ++m) out.totals[m] = pool_reports(all[m]);
  return out;
}

/// Fixed-format text table; the same inputs always give the same bytes.
inline std::string format_compare_table(const CompareResult& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  const auto row = [&](const std::string& label, const std::string& metric, const MotReport& m) {
    os << std::left << std::setw(8) << label << std::setw(15) << metric << std::right << std::setw(9) << m.mota
       << std::setw(8) << m.motp << std::setw(8) << m.mt << std::setw(8) << m.ml << std::setw(7) << m.fp
       << std::setw(7) << m.fn << std::setw(6) << m.ids << std::setw(6) << m.frag << '\n';
  };
  os << std::left << std::setw(8) << "seed" << std::setw(15) << "metric" << std::right << std::setw(9) << "MOTA"
     << std::setw(8) << "MOTP" << std::setw(8) << "MT" << std::setw(8) << "ML" << std::setw(7) << "FP"
     << std::setw(7) << "FN" << std::setw(6) << "IDS" << std::setw(6) << "FRAG" << '\n';
  for (const auto& s : r.seeds) {
    for (std::size_t m = 0; m < 3; ++m) row(std::to_string(s.seed), std::string(to_string(kCompareMetrics[m])), s.reports[m]);
  }
  for (std::size_t m = 0; m < 3; ++m) row("total", std::string(to_string(kCompareMetrics[m])), r.totals[m]);
  os << "invariant violations (TPM rows, mode vectors): " << r.tpm_violations() << '\n';
  return os.str();
}

}  // namespace immot
