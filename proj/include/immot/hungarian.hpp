#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace immot {

/// Marks a pair that must never be matched.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Rows are detections, columns tracks.
using CostMatrix = Eigen::MatrixXd;

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (detection, track), sorted by detection
  std::vector<int> unmatched_detections;
  std::vector<int> unmatched_tracks;
};

namespace detail {

inline constexpr double kInfeasibleSentinel = 1e9;

/// Shortest-augmenting-path Hungarian method for n <= m. Returns the column of each row.
/// Ties go to the lowest index because every comparison is strict.
inline std::vector<int> hungarian_rows_le_cols(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  const int m = static_cast<int>(c.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost matching restricted to feasible (finite) entries. Rectangular input is fine;
/// infeasible entries are never reported as matches.
inline AssociationResult solve_assignment(const CostMatrix& costs) {
  const int rows = static_cast<int>(costs.rows());
  const int cols = static_cast<int>(costs.cols());
  AssociationResult out;
  std::vector<int> row_to_col(rows, -1);

  if (rows > 0 && cols > 0) {
    Eigen::MatrixXd dense = costs.unaryExpr([](double v) {
      return std::isfinite(v) && v < detail::kInfeasibleSentinel ? v : detail::kInfeasibleSentinel;
    });
    if (rows <= cols) {
      row_to_col = detail::hungarian_rows_le_cols(dense);
    } else {
      const std::vector<int> col_to_row = detail::hungarian_rows_le_cols(dense.transpose());
      for (int j = 0; j < cols; ++j) {
        if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = j;
      }
    }
  }

  std::vector<char> track_used(cols, 0);
  for (int r = 0; r < rows; ++r) {
    const int c = row_to_col[r];
    if (c >= 0 && std::isfinite(costs(r, c)) && costs(r, c) < detail::kInfeasibleSentinel) {
      out.matches.emplace_back(r, c);
      track_used[c] = 1;
    } else {
      out.unmatched_detections.push_back(r);
    }
  }
  for (int c = 0; c < cols; ++c) {
    if (!track_used[c]) out.unmatched_tracks.push_back(c);
  }
  return out;
}

/// Sum of the matched costs.
inline double total_cost(const CostMatrix& costs, const AssociationResult& r) {
  double s = 0.0;
  for (const auto& [d, t] : r.matches) s += costs(d, t);
  return s;
}

}  // namespace immot
