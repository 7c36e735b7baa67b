#pragma once

#include "immot/clear_mot.hpp"
#include "immot/core_types.hpp"
#include "immot/road_context.hpp"
#include "immot/simulator.hpp"
#include "immot/track_manager.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// File formats
// ------------
// Detections, truth and tracks are JSON Lines (one JSON object per line):
//   detections: {"frame":0,"time":0.0,"ego":[x,y,heading],"detections":[[l,w,h,x,y,z,theta,score],...]}
//   truth:      {"frame":0,"time":0.0,"objects":[{"id":1,"box":[l,w,h,x,y,z,theta],"mode":"CV"},...]}
//   tracks:     {"frame":0,"id":3,"box":[l,w,h,x,y,z,theta],"mu":[...],"status":"confirmed"}
// Configuration, context maps and scenarios are single JSON documents; see README.md.
// Doubles are written in shortest round-trip form, so every reader recovers the exact value.

namespace immot::io {

using json = nlohmann::json;

// ============================================================
// Helpers
// ============================================================

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open " + p.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

inline json parse_document(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

template <typename Fn>
void for_each_line(std::istream& in, const std::string& what, Fn&& fn) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(what + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(what + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline json box_to_json(const BoxMeasurement& b) { return json::array({b.l, b.w, b.h, b.x, b.y, b.z, b.theta}); }

inline BoxMeasurement box_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 7 && j.size() != 8)) throw ValidationError("box must have 7 or 8 numbers");
  BoxMeasurement b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(),
                   j[4].get<double>(), j[5].get<double>(), j[6].get<double>(), 1.0};
  if (j.size() == 8) b.score = j[7].get<double>();
  if (!b.valid()) throw ValidationError("invalid box (non-positive size or yaw outside [-pi, pi))");
  return b;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ValidationError(what + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// ============================================================
// Detection / truth / track streams
// ============================================================

inline void write_detections(std::ostream& out, const std::vector<DetectionFrame>& frames) {
  for (const auto& f : frames) {
    json dets = json::array();
    for (const auto& d : f.detections) {
      json b = box_to_json(d);
      b.push_back(d.score);
      dets.push_back(std::move(b));
    }
    out << json{{"frame", f.frame}, {"time", f.time}, {"ego", {f.ego.x, f.ego.y, f.ego.heading}}, {"detections", dets}}.dump()
        << '\n';
  }
}

inline std::vector<DetectionFrame> read_detections(std::istream& in) {
  std::vector<DetectionFrame> frames;
  for_each_line(in, "detections", [&](const json& j) {
    DetectionFrame f;
    f.frame = j.at("frame").get<int>();
    f.time = j.at("time").get<double>();
    if (j.contains("ego")) {
      const json& e = j.at("ego");
      f.ego = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
    }
    for (const auto& d : j.at("detections")) f.detections.push_back(box_from_json(d));
    frames.push_back(std::move(f));
  });
  return frames;
}

inline void write_truth(std::ostream& out, const std::vector<GroundTruthFrame>& frames) {
  for (const auto& f : frames) {
    json objs = json::array();
    for (const auto& o : f.objects) {
      objs.push_back({{"id", o.id}, {"box", box_to_json(o.box)}, {"mode", std::string(to_string(o.mode))}});
    }
    out << json{{"frame", f.frame}, {"time", f.time}, {"objects", objs}}.dump() << '\n';
  }
}

inline std::vector<GroundTruthFrame> read_truth(std::istream& in) {
  std::vector<GroundTruthFrame> frames;
  for_each_line(in, "truth", [&](const json& j) {
    GroundTruthFrame f;
    f.frame = j.at("frame").get<int>();
    f.time = j.value("time", 0.0);
    for (const auto& o : j.at("objects")) {
      GroundTruthObject g;
      g.id = o.at("id").get<int>();
      g.box = box_from_json(o.at("box"));
      const auto mode = model_from_string(o.value("mode", std::string("CV")));
      if (!mode) throw ValidationError("unknown mode label");
      g.mode = *mode;
      f.objects.push_back(g);
    }
    frames.push_back(std::move(f));
  });
  return frames;
}

inline void write_tracks(std::ostream& out, const std::vector<TrackRecord>& records) {
  for (const auto& r : records) {
    out << json{{"frame", r.frame},
                {"id", r.id},
                {"box", box_to_json(r.box)},
                {"mu", vector_to_json(r.mu)},
                {"status", std::string(to_string(r.status))}}
               .dump()
        << '\n';
  }
}

inline std::vector<TrackRecord> read_tracks(std::istream& in) {
  std::vector<TrackRecord> out;
  for_each_line(in, "tracks", [&](const json& j) {
    TrackRecord r;
    r.frame = j.at("frame").get<int>();
    r.id = j.at("id").get<int>();
    r.box = box_from_json(j.at("box"));
    r.mu = vector_from_json(j.value("mu", json::array()));
    const auto st = status_from_string(j.value("status", std::string("confirmed")));
    if (!st) throw ValidationError("unknown track status");
    r.status = *st;
    out.push_back(std::move(r));
  });
  return out;
}

// ============================================================
// KITTI tracking labels
// ============================================================

struct KittiObject {
  int frame = 0;
  int track_id = -1;
  BoxMeasurement box;
};

/// Camera-frame KITTI box to the tracker frame (x forward, y left, z up):
///   x = z_cam, y = -x_cam, z = -y_cam + h/2 (KITTI y is the box bottom),
///   yaw = -rotation_y - pi/2.
inline BoxMeasurement kitti_to_tracker(double h, double w, double l, double x_cam, double y_cam, double z_cam,
                                       double rotation_y, double score) {
  return {l, w, h, z_cam, -x_cam, -y_cam + 0.5 * h, wrap_angle(-rotation_y - 0.5 * std::numbers::pi), score};
}

/// Car rows of a KITTI tracking label or result file; other types are skipped.
inline std::vector<KittiObject> read_kitti_tracking(std::istream& in) {
  std::vector<KittiObject> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    int frame = 0;
    int track_id = 0;
    std::string type;
    double v[14];
    if (!(ss >> frame >> track_id >> type)) {
      throw ValidationError("kitti line " + std::to_string(lineno) + ": expected frame, track id and type");
    }
    if (frame < 0) throw ValidationError("kitti line " + std::to_string(lineno) + ": negative frame index");
    for (double& x : v) {
      if (!(ss >> x)) throw ValidationError("kitti line " + std::to_string(lineno) + ": expected 17 columns");
    }
    double score = 1.0;
    if (!(ss >> score)) score = 1.0;
    if (type != "Car") continue;
    // v: truncated occluded alpha bbox(4) h w l x y z rotation_y
    const double h = v[7], w = v[8], l = v[9];
    if (!(h > 0.0 && w > 0.0 && l > 0.0)) {
      throw ValidationError("kitti line " + std::to_string(lineno) + ": non-positive box dimensions");
    }
    out.push_back({frame, track_id, kitti_to_tracker(h, w, l, v[10], v[11], v[12], v[13], score)});
  }
  return out;
}

/// Groups KITTI objects into consecutive frames 0..max, filling empty frames.
inline std::vector<GroundTruthFrame> kitti_truth(const std::vector<KittiObject>& objs, double rate = 10.0) {
  int last = -1;
  for (const auto& o : objs) last = std::max(last, o.frame);
  std::vector<GroundTruthFrame> frames;
  for (int f = 0; f <= last; ++f) frames.push_back({f, f / rate, {}});
  for (const auto& o : objs) frames[static_cast<std::size_t>(o.frame)].objects.push_back({o.track_id, o.box, ModelId::CV});
  return frames;
}

inline std::vector<DetectionFrame> kitti_detections(const std::vector<KittiObject>& objs, double rate = 10.0) {
  int last = -1;
  for (const auto& o : objs) last = std::max(last, o.frame);
  std::vector<DetectionFrame> frames;
  for (int f = 0; f <= last; ++f) frames.push_back({f, f / rate, Pose2D{}, {}});
  for (const auto& o : objs) frames[static_cast<std::size_t>(o.frame)].detections.push_back(o.box);
  return frames;
}

inline bool is_kitti_path(const std::filesystem::path& p) { return p.extension() == ".txt"; }

inline std::vector<DetectionFrame> load_detections(const std::filesystem::path& p) {
  auto in = open_in(p);
  return is_kitti_path(p) ? kitti_detections(read_kitti_tracking(in)) : read_detections(in);
}

inline std::vector<GroundTruthFrame> load_truth(const std::filesystem::path& p) {
  auto in = open_in(p);
  return is_kitti_path(p) ? kitti_truth(read_kitti_tracking(in)) : read_truth(in);
}

// ============================================================
// Tracker configuration
// ============================================================

inline std::vector<MotionModel> models_from_json(const json& j) {
  std::vector<MotionModel> out;
  for (const auto& m : j) {
    const std::string name = m.is_string() ? m.get<std::string>() : m.at("id").get<std::string>();
    const auto id = model_from_string(name);
    if (!id) throw ValidationError("config: unknown motion model '" + name + "'");
    MotionModel model = MotionModel::make(*id, 0.1);
    if (m.is_object() && m.contains("noise")) {
      const json& q = m.at("noise");
      model.q.accel = q.value("accel", model.q.accel);
      model.q.jerk = q.value("jerk", model.q.jerk);
      model.q.yaw = q.value("yaw", model.q.yaw);
      model.q.vertical = q.value("vertical", model.q.vertical);
      model.q.size = q.value("size", model.q.size);
    }
    out.push_back(model);
  }
  return out;
}

inline TrackerConfig config_from_json(const json& j) {
  TrackerConfig c;
  try {
    c.confirm_hits = j.value("confirm_hits", c.confirm_hits);
    c.max_misses = j.value("max_misses", c.max_misses);
    c.gate_radius = j.value("gate_radius", c.gate_radius);
    c.gate_chi2 = j.value("gate_chi2", c.gate_chi2);
    c.angle_weight = j.value("angle_weight", c.angle_weight);
    c.iou_min = j.value("iou_min", c.iou_min);
    c.default_dt = j.value("default_dt", c.default_dt);
    c.report_coasting = j.value("report_coasting", c.report_coasting);
    if (j.contains("models")) {
      c.models = models_from_json(j.at("models"));
      const auto m = static_cast<Eigen::Index>(c.models.size());
      if (m != 5) {
        c.mu0 = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
        c.tpm = Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
      }
    }
    if (j.contains("mu0")) c.mu0 = vector_from_json(j.at("mu0"));
    if (j.contains("tpm")) c.tpm = matrix_from_json(j.at("tpm"), "config tpm");
    if (j.contains("measurement_sigma")) {
      const json& r = j.at("measurement_sigma");
      c.r.dims = r.value("dims", c.r.dims);
      c.r.position = r.value("position", c.r.position);
      c.r.yaw = r.value("yaw", c.r.yaw);
    }
    if (j.contains("initial_std")) {
      const json& s = j.at("initial_std");
      c.init.velocity = s.value("velocity", c.init.velocity);
      c.init.vertical_velocity = s.value("vertical_velocity", c.init.vertical_velocity);
      c.init.turn_rate = s.value("turn_rate", c.init.turn_rate);
      c.init.acceleration = s.value("acceleration", c.init.acceleration);
    }
    if (j.contains("context")) {
      const json& x = j.at("context");
      c.context.enabled = x.value("enabled", c.context.enabled);
      c.context.k = x.value("k", c.context.k);
      c.context.radius = x.value("radius", c.context.radius);
    }
    if (j.contains("metric")) {
      const auto m = metric_from_string(j.at("metric").get<std::string>());
      if (!m) throw ValidationError("config: unknown metric");
      c.set_metric(*m);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline TrackerConfig load_config(const std::filesystem::path& p) {
  auto in = open_in(p);
  return config_from_json(parse_document(in, p.string()));
}

// ============================================================
// Context map
// ============================================================

inline ContextMap map_from_json(const json& j) {
  try {
    std::map<std::string, Eigen::MatrixXd> library;
    if (j.contains("tpm_library")) {
      for (const auto& [name, m] : j.at("tpm_library").items()) library[name] = matrix_from_json(m, "tpm " + name);
    }
    Eigen::MatrixXd def = j.contains("default_tpm") ? matrix_from_json(j.at("default_tpm"), "default_tpm") : default_tpm();
    std::vector<ContextVector> vectors;
    for (const auto& v : j.value("vectors", json::array())) {
      ContextVector c;
      c.position = {v.at("x").get<double>(), v.at("y").get<double>()};
      c.direction = {v.at("dir_x").get<double>(), v.at("dir_y").get<double>()};
      c.tpm_id = v.at("tpm").get<std::string>();
      c.toggle = v.value("toggle", 1.0);
      for (const auto& s : v.value("schedule", json::array())) {
        c.toggle_schedule.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
      }
      vectors.push_back(std::move(c));
    }
    return ContextMap(std::move(vectors), std::move(library), std::move(def), j.value("cell_size", 15.0));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("map: ") + e.what());
  }
}

inline ContextMap load_map(const std::filesystem::path& p) {
  auto in = open_in(p);
  return map_from_json(parse_document(in, p.string()));
}

// ============================================================
// Scenario
// ============================================================

inline Segment segment_from_json(const json& j) {
  Segment s;
  const std::string kind = j.at("type").get<std::string>();
  if (kind == "straight") {
    s.kind = SegmentKind::Straight;
    s.length = j.at("length").get<double>();
  } else if (kind == "turn") {
    s.kind = SegmentKind::Turn;
    s.radius = j.at("radius").get<double>();
    s.angle = j.at("angle_deg").get<double>() * std::numbers::pi / 180.0;
  } else if (kind == "stop") {
    s.kind = SegmentKind::Stop;
    s.decel = j.value("decel", 0.0);
    s.hold = j.value("hold", 0.0);
  } else if (kind == "go") {
    s.kind = SegmentKind::Go;
    s.accel = j.at("accel").get<double>();
    s.target_speed = j.at("speed").get<double>();
  } else {
    throw ValidationError("scenario: unknown segment type '" + kind + "'");
  }
  return s;
}

struct ScenarioFile {
  Scenario scenario;
  std::optional<ContextMap> map;
};

inline ScenarioFile scenario_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  ScenarioFile f;
  Scenario& s = f.scenario;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    s.duration = j.value("duration", s.duration);
    s.rate = j.value("rate", s.rate);
    s.p_miss = j.value("p_miss", s.p_miss);
    s.clutter_rate = j.value("clutter_rate", s.clutter_rate);
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      s.noise.position = n.value("position", s.noise.position);
      s.noise.dims = n.value("dims", s.noise.dims);
      s.noise.yaw = n.value("yaw", s.noise.yaw);
    }
    if (j.contains("extent")) {
      const json& e = j.at("extent");
      s.extent = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>(), e.at(3).get<double>()};
    }
    for (const auto& d : j.value("drift_events", json::array())) {
      s.drift_events.push_back({d.at("time").get<double>(),
                                {d.value("dx", 0.0), d.value("dy", 0.0), d.value("dheading", 0.0)}});
    }
    int next_id = 1;
    for (const auto& v : j.at("vehicles")) {
      VehicleRoute r;
      r.id = v.value("id", next_id);
      next_id = r.id + 1;
      r.start_time = v.value("start_time", 0.0);
      const json& st = v.at("start");
      r.start = {st.at(0).get<double>(), st.at(1).get<double>(), st.at(2).get<double>() * std::numbers::pi / 180.0};
      r.speed = v.value("speed", r.speed);
      if (v.contains("size")) {
        const json& sz = v.at("size");
        r.l = sz.at(0).get<double>();
        r.w = sz.at(1).get<double>();
        r.h = sz.at(2).get<double>();
      }
      r.z = v.value("z", r.z);
      for (const auto& seg : v.at("segments")) r.segments.push_back(segment_from_json(seg));
      s.vehicles.push_back(std::move(r));
    }
    if (j.contains("map")) {
      f.map = map_from_json(j.at("map"));
    } else if (j.contains("map_file")) {
      f.map = load_map(base_dir / j.at("map_file").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
  validate(s);
  for (const auto& v : s.vehicles) RouteKinematics{v};
  return f;
}

inline ScenarioFile load_scenario(const std::filesystem::path& p) {
  auto in = open_in(p);
  return scenario_from_json(parse_document(in, p.string()), p.parent_path());
}

// ============================================================
// Reports
// ============================================================

inline json report_to_json(const MotReport& r) {
  return json{{"MOTA", r.mota}, {"MOTP", r.motp}, {"MT", r.mt},   {"ML", r.ml},
              {"FP", r.fp},     {"FN", r.fn},     {"IDS", r.ids}, {"FRAG", r.frag},
              {"GT", r.gt_total}, {"matches", r.matches}, {"trajectories", r.gt_trajectories}};
}

}  // namespace immot::io
