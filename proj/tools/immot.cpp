// Command-line front end: simulate, track, eval, compare.

#include "immot/immot.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using immot::io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const auto file = immot::io::load_scenario(scenario_path);
  const auto sim = immot::generate(file.scenario);
  fs::create_directories(out_dir);
  auto truth = immot::io::open_out(fs::path(out_dir) / "truth.jsonl");
  immot::io::write_truth(truth, sim.truth);
  auto dets = immot::io::open_out(fs::path(out_dir) / "detections.jsonl");
  immot::io::write_detections(dets, sim.detections);
  std::cout << "wrote " << sim.truth.size() << " frames to " << out_dir << '\n';
  return 0;
}

int cmd_track(const std::string& det_path, const std::string& config_path, const std::string& map_path,
              const std::string& metric, const std::string& out_path) {
  immot::TrackerConfig config = config_path.empty() ? immot::TrackerConfig{} : immot::io::load_config(config_path);
  if (!metric.empty()) config.set_metric(*immot::metric_from_string(metric));
  std::optional<immot::ContextMap> map;
  if (!map_path.empty()) map = immot::io::load_map(map_path);
  const auto detections = immot::io::load_detections(det_path);

  const auto start = std::chrono::steady_clock::now();
  const auto run = immot::run_tracker(detections, config, map ? &*map : nullptr);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto out = immot::io::open_out(out_path);
  immot::io::write_tracks(out, immot::to_records(run.frames));
  const double fps = seconds > 0.0 ? static_cast<double>(detections.size()) / seconds : 0.0;
  std::cerr << "tracked " << detections.size() << " frames at " << fps << " frames/s\n";
  return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& tracks_path, double iou_threshold) {
  const auto truth = immot::io::load_truth(truth_path);
  auto in = immot::io::open_in(tracks_path);
  const auto tracks = immot::io::read_tracks(in);
  std::cout << immot::io::report_to_json(immot::evaluate(truth, tracks, iou_threshold)).dump(2) << '\n';
  return 0;
}

int cmd_compare(const std::string& scenario_path, const std::string& config_path, int seeds, double iou_threshold,
                bool as_json) {
  const auto file = immot::io::load_scenario(scenario_path);
  const immot::TrackerConfig config =
      config_path.empty() ? immot::TrackerConfig{} : immot::io::load_config(config_path);
  const auto result =
      immot::compare(file.scenario, config, file.map ? &*file.map : nullptr, seeds, iou_threshold);
  if (!as_json) {
    std::cout << immot::format_compare_table(result);
    return 0;
  }
  json doc;
  for (const auto& s : result.seeds) {
    json row{{"seed", s.seed}};
    for (std::size_t m = 0; m < immot::kCompareMetrics.size(); ++m) {
      row[std::string(immot::to_string(immot::kCompareMetrics[m]))] = immot::io::report_to_json(s.reports[m]);
    }
    doc["seeds"].push_back(row);
  }
  for (std::size_t m = 0; m < immot::kCompareMetrics.size(); ++m) {
    doc["totals"][std::string(immot::to_string(immot::kCompareMetrics[m]))] =
        immot::io::report_to_json(result.totals[m]);
  }
  doc["invariant_violations"] = result.tpm_violations();
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D multi-object tracker with an IMM filter and road-context mode priors"};
  app.require_subcommand(1);

  std::string scenario, out_dir, detections, config, map, metric, out, truth, tracks;
  double iou_threshold = 0.25;
  int seeds = 20;
  bool as_json = false;

  auto* sim = app.add_subcommand("simulate", "Generate ground truth and detections from a scenario file");
  sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* trk = app.add_subcommand("track", "Run the tracker over a detection stream");
  trk->add_option("--detections", detections, "Detections JSONL, or KITTI tracking .txt")
      ->required()
      ->check(CLI::ExistingFile);
  trk->add_option("--config", config, "Tracker config JSON")->check(CLI::ExistingFile);
  trk->add_option("--map", map, "Context map JSON")->check(CLI::ExistingFile);
  trk->add_option("--metric", metric, "Association metric")
      ->check(CLI::IsMember({"kf-iou", "imm-iou", "imm-posterior"}));
  trk->add_option("--out", out, "Tracks JSONL")->required();

  auto* ev = app.add_subcommand("eval", "CLEAR-MOT evaluation of a track file");
  ev->add_option("--truth", truth, "Truth JSONL, or KITTI tracking .txt")->required()->check(CLI::ExistingFile);
  ev->add_option("--tracks", tracks, "Tracks JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--iou-threshold", iou_threshold, "3D IoU needed for a match")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Evaluate the three trackers over several seeds");
  cmp->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--config", config, "Tracker config JSON")->check(CLI::ExistingFile);
  cmp->add_option("--seeds", seeds, "Number of seeds, starting at the scenario seed")->capture_default_str();
  cmp->add_option("--iou-threshold", iou_threshold, "3D IoU needed for a match")->capture_default_str();
  cmp->add_flag("--json", as_json, "Print JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(scenario, out_dir);
    if (*trk) return cmd_track(detections, config, map, metric, out);
    if (*ev) return cmd_eval(truth, tracks, iou_threshold);
    if (*cmp) return cmd_compare(scenario, config, seeds, iou_threshold, as_json);
  } catch (const immot::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const immot::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
