#pragma once

#include "immot/core_types.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace immot {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Counter-clockwise footprint corners of an oriented box.
inline std::array<Point2, 4> footprint(const BoxMeasurement& b) {
  const double c = std::cos(b.theta);
  const double s = std::sin(b.theta);
  const double hl = 0.5 * b.l;
  const double hw = 0.5 * b.w;
  const std::array<std::pair<double, double>, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<Point2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [lx, ly] = local[i];
    out[i] = {b.x + c * lx - s * ly, b.y + s * lx + c * ly};
  }
  return out;
}

/// Shoelace area; positive for counter-clockwise polygons.
inline double polygon_area(const std::vector<Point2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

/// Sutherland-Hodgman clipping of `subject` by the convex counter-clockwise `clip`.
inline std::vector<Point2> clip_convex(std::vector<Point2> subject, const std::vector<Point2>& clip) {
  const auto side = [](const Point2& a, const Point2& b, const Point2& p) {
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  };
  for (std::size_t e = 0, n = clip.size(); e < n && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % n];
    std::vector<Point2> input;
    input.swap(subject);
    for (std::size_t i = 0, m = input.size(); i < m; ++i) {
      const Point2& cur = input[i];
      const Point2& prev = input[(i + m - 1) % m];
      const double sc = side(a, b, cur);
      const double sp = side(a, b, prev);
      if (sc >= 0.0) {
        if (sp < 0.0) {
          const double t = sp / (sp - sc);
          subject.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        subject.push_back(cur);
      } else if (sp >= 0.0) {
        const double t = sp / (sp - sc);
        subject.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
  }
  return subject;
}

struct IouResult {
  double value = 0.0;
  bool degenerate = false;  // set when either box has zero volume
};

/// Oriented 3D IoU: footprint intersection (convex clipping) times vertical overlap.
inline IouResult iou_3d(const BoxMeasurement& first, const BoxMeasurement& second) {
  // Clip in a canonical argument order so that iou_3d(a, b) == iou_3d(b, a) bit for bit.
  const auto key = [](const BoxMeasurement& b) {
    return std::array{b.x, b.y, b.z, b.theta, b.l, b.w, b.h};
  };
  const bool swap = key(second) < key(first);
  const BoxMeasurement& a = swap ? second : first;
  const BoxMeasurement& b = swap ? first : second;
  const double vol_a = a.l * a.w * a.h;
  const double vol_b = b.l * b.w * b.h;
  if (!(vol_a > 0.0) || !(vol_b > 0.0)) return {0.0, true};

  const double z_lo = std::max(a.z - 0.5 * a.h, b.z - 0.5 * b.h);
  const double z_hi = std::min(a.z + 0.5 * a.h, b.z + 0.5 * b.h);
  const double dz = z_hi - z_lo;
  if (dz <= 0.0) return {};

  // Disjoint bounding circles need no clipping.
  const double ra = 0.5 * std::hypot(a.l, a.w);
  const double rb = 0.5 * std::hypot(b.l, b.w);
  if (std::hypot(a.x - b.x, a.y - b.y) >= ra + rb) return {};

  const auto fa = footprint(a);
  const auto fb = footprint(b);
  const double inter_area =
      std::max(0.0, polygon_area(clip_convex({fa.begin(), fa.end()}, {fb.begin(), fb.end()})));
  const double inter = inter_area * dz;
  const double uni = vol_a + vol_b - inter;
  if (uni <= 0.0) return {};
  // Identical boxes must give exactly 1 regardless of rounding in the clipper.
  if (a.l == b.l && a.w == b.w && a.h == b.h && a.x == b.x && a.y == b.y && a.z == b.z &&
      a.theta == b.theta) {
    return {1.0, false};
  }
  return {std::clamp(inter / uni, 0.0, 1.0), false};
}

}  // namespace immot
