#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "hf/bench/synthetic.hpp"
#include "hf/errors.hpp"
#include "hf/geometry.hpp"

namespace hf::bench {

using ParamList = std::vector<std::vector<double>>;

/// Count mismatch plus greedily matched pairwise errors |p - q| / sqrt(2):
/// at each step the smallest remaining pairwise error is taken and both
/// members leave the pool.
inline double fitting_error(const ParamList& gt, const ParamList& est) {
  const std::size_t a0 = gt.size(), b0 = est.size();
  struct Pair {
    double err;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(a0 * b0);
  for (std::size_t i = 0; i < a0; ++i) {
    for (std::size_t j = 0; j < b0; ++j) {
      if (gt[i].size() != est[j].size()) throw Error(ErrorCode::LengthMismatch, "parameter vectors differ in size");
      double s = 0.0;
      for (std::size_t d = 0; d < gt[i].size(); ++d) s += (gt[i][d] - est[j][d]) * (gt[i][d] - est[j][d]);
      pairs.push_back({std::sqrt(s) / std::numbers::sqrt2, i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.err < b.err; });
  std::vector<char> used_i(a0, 0), used_j(b0, 0);
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto& p : pairs) {
    if (matched == std::min(a0, b0)) break;
    if (used_i[p.i] || used_j[p.j]) continue;
    used_i[p.i] = used_j[p.j] = 1;
    sum += p.err;
    ++matched;
  }
  const double count_gap = a0 > b0 ? static_cast<double>(a0 - b0) : static_cast<double>(b0 - a0);
  return count_gap + sum;
}

/// Line parameters re-expressed for coordinates mapped from `domain` onto
/// the unit square (x' = (x - x_min) / s, s = the larger box side), then
/// renormalized. This is the frame line fitting errors are reported in.
inline std::vector<double> line_params_in_unit_frame(const std::vector<double>& abc, const Box& domain) {
  const double s = std::max(domain.width(), domain.height());
  const double a = abc[0], b = abc[1];
  const double c = (abc[2] + a * domain.x_min + b * domain.y_min) / s;
  // a (s x' + x_min) + b (s y' + y_min) + c = 0  =>  (a s) x' + (b s) y' + (c + a x_min + b y_min) = 0
  const ModelHypothesis h(ModelKind::Line2D, {a, b, c});
  return h.param_vector();
}

namespace detail {

/// Maximum-weight assignment on a square matrix (Hungarian algorithm, O(n^3)).
/// Returns row -> column.
inline std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const std::size_t n = weight.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

inline void best_injective(const std::vector<std::vector<double>>& overlap, std::size_t row, std::vector<char>& used,
                           double acc, double& best) {
  if (row == overlap.size()) {
    best = std::max(best, acc);
    return;
  }
  best_injective(overlap, row + 1, used, acc, best);  // row left unmapped
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c]) continue;
    used[c] = 1;
    best_injective(overlap, row + 1, used, acc + overlap[row][c], best);
    used[c] = 0;
  }
}

}  // namespace detail

/// Percentage of mislabeled points under the best injective mapping from
/// estimated structure ids to ground-truth ids (0 always maps to 0).
/// Exhaustive for up to 8 structures per side, Hungarian beyond.
inline double segmentation_error(const std::vector<int>& gt, const std::vector<int>& est) {
  if (gt.size() != est.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (gt.empty()) return 0.0;
  std::map<int, std::size_t> gt_ids, est_ids;
  for (int g : gt)
    if (g != 0) gt_ids.emplace(g, 0);
  for (int e : est)
    if (e != 0) est_ids.emplace(e, 0);
  std::size_t idx = 0;
  for (auto& [id, slot] : gt_ids) slot = idx++;
  idx = 0;
  for (auto& [id, slot] : est_ids) slot = idx++;

  std::vector<std::vector<double>> overlap(est_ids.size(), std::vector<double>(gt_ids.size(), 0.0));
  double correct_outliers = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == 0 && est[i] == 0) {
      correct_outliers += 1.0;
    } else if (gt[i] != 0 && est[i] != 0) {
      overlap[est_ids[est[i]]][gt_ids[gt[i]]] += 1.0;
    }
  }

  double matched = 0.0;
  if (est_ids.size() <= 8 && gt_ids.size() <= 8) {
    std::vector<char> used(gt_ids.size(), 0);
    detail::best_injective(overlap, 0, used, 0.0, matched);
  } else {
    const std::size_t m = std::max(est_ids.size(), gt_ids.size());
    std::vector<std::vector<double>> square(m, std::vector<double>(m, 0.0));
    for (std::size_t r = 0; r < overlap.size(); ++r)
      for (std::size_t c = 0; c < overlap[r].size(); ++c) square[r][c] = overlap[r][c];
    const auto assignment = detail::max_weight_assignment(square);
    for (std::size_t r = 0; r < m; ++r) matched += square[r][assignment[r]];
  }
  const double total = static_cast<double>(gt.size());
  return 100.0 * (total - correct_outliers - matched) / total;
}

}  // namespace hf::bench
