#pragma once

// Rectangular linear assignment (Hungarian / shortest augmenting path with
// potentials). O(n^2 m) for an n x m matrix with n <= m.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace evfish {

/// Dense row-major cost matrix.
class CostMatrix {
public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using AssignmentPairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// Minimum-total-cost matching that saturates the smaller side. Pairs are
/// returned as (row, col) sorted by row. Deterministic: among equal-cost
/// candidates the lowest column index is taken at each pivot.
inline AssignmentPairs solve_assignment(const CostMatrix& cost) {
  const bool transposed = cost.rows() > cost.cols();
  const std::size_t n = transposed ? cost.cols() : cost.rows();
  const std::size_t m = transposed ? cost.rows() : cost.cols();
  AssignmentPairs result;
  if (n == 0) return result;
  auto a = [&](std::size_t i, std::size_t j) { return transposed ? cost(j, i) : cost(i, j); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based; index 0 is the virtual column/row.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      result.emplace_back(j - 1, p[j] - 1);
    } else {
      result.emplace_back(p[j] - 1, j - 1);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

inline double assignment_cost(const CostMatrix& cost, const AssignmentPairs& pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

}  // namespace evfish
