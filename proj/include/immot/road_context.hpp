#pragma once

#include "immot/core_types.hpp"
#include "immot/imm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace immot {

/// Directed unit vector on the map carrying a traffic toggle and a reference to a TPM.
struct ContextVector {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
  double toggle = 1.0;  // 0 stop, 0.5 slow, 1 go
  std::string tpm_id;
  std::vector<std::pair<double, double>> toggle_schedule;  // (time s, toggle), sorted by time

  /// Piecewise-constant toggle: the last schedule entry at or before `time`, else `toggle`.
  [[nodiscard]] double toggle_at(double time) const {
    double t = toggle;
    for (const auto& [start, value] : toggle_schedule) {
      if (start <= time) t = value;
      else break;
    }
    return t;
  }
};

inline bool valid_toggle(double t) { return t == 0.0 || t == 0.5 || t == 1.0; }

struct ContextOptions {
  bool enabled = true;
  int k = 3;
  double radius = 15.0;
};

/// Immutable collection of context vectors with a bucket grid for neighbour queries.
class ContextMap {
 public:
  ContextMap() : default_tpm_(default_tpm()) {}

  ContextMap(std::vector<ContextVector> vectors, std::map<std::string, Eigen::MatrixXd> library,
             Eigen::MatrixXd default_matrix, double cell_size = 15.0)
      : vectors_(std::move(vectors)),
        library_(std::move(library)),
        default_tpm_(std::move(default_matrix)),
        cell_(cell_size) {
    if (!is_row_stochastic(default_tpm_)) throw ValidationError("context map: default TPM is not row-stochastic");
    for (const auto& [name, tpm] : library_) {
      if (!is_row_stochastic(tpm)) throw ValidationError("context map: TPM '" + name + "' is not row-stochastic");
      if (tpm.rows() != default_tpm_.rows()) throw ValidationError("context map: TPM '" + name + "' has wrong size");
    }
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      ContextVector& v = vectors_[i];
      const double n = v.direction.norm();
      if (!(n > 0.0) || !v.position.allFinite()) {
        throw ValidationError("context map: vector " + std::to_string(i) + " has no direction");
      }
      v.direction /= n;
      if (!library_.contains(v.tpm_id)) {
        throw ValidationError("context map: vector " + std::to_string(i) + " references unknown TPM '" +
                              v.tpm_id + "'");
      }
      if (!valid_toggle(v.toggle)) throw ValidationError("context map: toggle must be 0, 0.5 or 1");
      std::sort(v.toggle_schedule.begin(), v.toggle_schedule.end());
      for (const auto& [t, value] : v.toggle_schedule) {
        if (!valid_toggle(value)) throw ValidationError("context map: toggle must be 0, 0.5 or 1");
      }
      grid_[key(cell_of(v.position.x()), cell_of(v.position.y()))].push_back(i);
    }
  }

  [[nodiscard]] const std::vector<ContextVector>& vectors() const { return vectors_; }
  [[nodiscard]] const std::map<std::string, Eigen::MatrixXd>& library() const { return library_; }
  [[nodiscard]] const Eigen::MatrixXd& default_tpm_matrix() const { return default_tpm_; }
  [[nodiscard]] const Eigen::MatrixXd& tpm(const std::string& id) const { return library_.at(id); }
  [[nodiscard]] bool empty() const { return vectors_.empty(); }

  /// Indices of up to k vectors within `radius` of (x, y), nearest first, ties by index.
  [[nodiscard]] std::vector<std::size_t> nearest(double x, double y, int k, double radius) const {
    std::vector<std::pair<double, std::size_t>> hits;
    const std::int64_t cx = cell_of(x);
    const std::int64_t cy = cell_of(y);
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
    for (std::int64_t gx = cx - reach; gx <= cx + reach; ++gx) {
      for (std::int64_t gy = cy - reach; gy <= cy + reach; ++gy) {
        const auto it = grid_.find(key(gx, gy));
        if (it == grid_.end()) continue;
        for (std::size_t i : it->second) {
          const double d = std::hypot(vectors_[i].position.x() - x, vectors_[i].position.y() - y);
          if (d <= radius) hits.emplace_back(d, i);
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    if (hits.size() > static_cast<std::size_t>(std::max(k, 0))) hits.resize(static_cast<std::size_t>(k));
    std::vector<std::size_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.second);
    return out;
  }

 private:
  [[nodiscard]] std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
  static std::int64_t key(std::int64_t gx, std::int64_t gy) { return gx * 1'000'003 + gy; }

  std::vector<ContextVector> vectors_;
  std::map<std::string, Eigen::MatrixXd> library_;
  Eigen::MatrixXd default_tpm_;
  double cell_ = 15.0;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;
};

/// The k nearest context vectors around the target within `radius`.
inline std::vector<ContextVector> activate(const ContextMap& map, const Pose2D& target, int k,
                                           double radius = 15.0) {
  if (k < 1) throw std::invalid_argument("activate: k must be >= 1");
  std::vector<ContextVector> out;
  for (std::size_t i : map.nearest(target.x, target.y, k, radius)) out.push_back(map.vectors()[i]);
  return out;
}

/// Heading used for context alignment: velocity direction when moving, box yaw otherwise.
inline double motion_heading(const StateVector& s, double min_speed = 0.5) {
  const double speed = std::hypot(s(idx::Vx), s(idx::Vy));
  return speed >= min_speed ? std::atan2(s(idx::Vy), s(idx::Vx)) : s(idx::Theta);
}

/// Unnormalized alignment score max(0, cos(heading, direction)) * toggle(time).
inline double context_likelihood(const StateVector& target_state, const ContextVector& ctx, double time) {
  const double heading = motion_heading(target_state);
  const double align = std::cos(heading) * ctx.direction.x() + std::sin(heading) * ctx.direction.y();
  return std::max(0.0, align) * ctx.toggle_at(time);
}

/// Convex combination of the active vectors' TPMs; falls back to the map default when
/// nothing is active or every weight is zero.
inline Eigen::MatrixXd blend_tpm(const ContextMap& map, const std::vector<ContextVector>& active,
                                 const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (active.empty() || !(total > 0.0)) return map.default_tpm_matrix();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(map.default_tpm_matrix().rows(), map.default_tpm_matrix().cols());
  for (std::size_t i = 0; i < active.size(); ++i) out += weights[i] * map.tpm(active[i].tpm_id);
  // Renormalize rows so rounding in the weights cannot leave the simplex.
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double sum = out.row(r).sum();
    if (std::abs(sum - 1.0) > 1e-12) out.row(r) /= sum;
  }
  return out;
}

struct ContextTpm {
  Eigen::MatrixXd tpm;
  std::size_t active = 0;
  bool fallback = false;  // default TPM used
};

/// Activation, alignment weighting (normalized over the active set) and blending for one
/// target whose state is already expressed in the map frame.
inline ContextTpm context_tpm(const ContextMap& map, const StateVector& map_state, double time,
                              const ContextOptions& opt) {
  const Pose2D pose{map_state(idx::X), map_state(idx::Y), map_state(idx::Theta)};
  const std::vector<ContextVector> active = activate(map, pose, opt.k, opt.radius);
  std::vector<double> weights;
  weights.reserve(active.size());
  double total = 0.0;
  for (const auto& v : active) {
    weights.push_back(context_likelihood(map_state, v, time));
    total += weights.back();
  }
  ContextTpm out;
  out.active = active.size();
  if (total > 0.0) {
    for (double& w : weights) w /= total;
  }
  out.fallback = active.empty() || !(total > 0.0);
  out.tpm = blend_tpm(map, active, weights);
  return out;
}

}  // namespace immot
