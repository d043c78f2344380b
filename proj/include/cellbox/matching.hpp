// Copyright 2026 The cellbox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/jitter.hpp"
#include "cellbox/postprocess.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

struct MatchConfig {
  enum class Strategy { kGreedyByScore, kOptimalAssignment };

  /// Pairs farther apart than this are localization failures, not jitter;
  /// default is half a ground-truth side.
  double max_center_distance = 50.0;
  Strategy strategy = Strategy::kGreedyByScore;
};

/// One matched (ground truth, detection) pair. Indices refer to positions in
/// the caller's input arrays; the offset is detection center minus truth
/// center, stored signed.
struct MatchPair {
  std::int64_t image_id = 0;
  std::size_t gt_index = 0;
  std::size_t det_index = 0;
  JitterOffset offset;
  double score = 0.0;
};

namespace detail {

// Minimum-total-cost assignment of rows to columns, rows <= cols, via the
// standard potentials (Jonker-Volgenant style) formulation. Returns the
// column assigned to each row.
inline std::vector<int> min_cost_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> assigned_row(m + 1, 0);  // column -> row (1-based, 0 = free)
  std::vector<int> way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    assigned_row[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = assigned_row[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[assigned_row[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (assigned_row[j0] != 0);
    do {
      const int j1 = way[j0];
      assigned_row[j0] = assigned_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (assigned_row[j] > 0) row_to_col[assigned_row[j] - 1] = j - 1;
  }
  return row_to_col;
}

inline double center_distance(CenterPoint a, CenterPoint b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace detail

/// One-to-one matching of detections to ground truths of a single image.
///
/// Greedy: detections in descending score order (ties by input index) each
/// take the nearest unmatched truth within max_center_distance (distance ties
/// by truth input index). Optimal: the assignment of maximum cardinality over
/// feasible pairs that minimizes total center distance.
///
/// Output is ordered by detection index.
inline std::vector<MatchPair> match_image(std::span<const GroundTruth> gts,
                                          std::span<const Detection> dets,
                                          const MatchConfig& cfg = {}) {
  detail::require(std::isfinite(cfg.max_center_distance) &&
                      cfg.max_center_distance > 0.0,
                  "match_image: max_center_distance must be positive");
  std::int64_t image_id = 0;
  bool have_id = false;
  for (const GroundTruth& g : gts) {
    if (!have_id) {
      image_id = g.image_id;
      have_id = true;
    }
    detail::require(g.image_id == image_id, "match_image: mixed image ids");
  }
  for (const Detection& d : dets) {
    if (!have_id) {
      image_id = d.image_id;
      have_id = true;
    }
    detail::require(d.image_id == image_id, "match_image: mixed image ids");
  }
  if (gts.empty() || dets.empty()) return {};

  std::vector<CenterPoint> det_centers(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) det_centers[i] = center_of(dets[i]);

  std::vector<MatchPair> pairs;
  const double radius = cfg.max_center_distance;

  if (cfg.strategy == MatchConfig::Strategy::kGreedyByScore) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dets[a].score > dets[b].score;
    });
    std::vector<bool> gt_taken(gts.size(), false);
    for (const std::size_t di : order) {
      double best = radius;
      std::ptrdiff_t best_gt = -1;
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (gt_taken[gi]) continue;
        const double dist = detail::center_distance(det_centers[di], gts[gi].center);
        if (dist < best || (best_gt < 0 && dist <= best)) {
          best = dist;
          best_gt = static_cast<std::ptrdiff_t>(gi);
        }
      }
      if (best_gt < 0) continue;
      gt_taken[static_cast<std::size_t>(best_gt)] = true;
      const GroundTruth& g = gts[static_cast<std::size_t>(best_gt)];
      pairs.push_back({image_id, static_cast<std::size_t>(best_gt), di,
                       {det_centers[di].x - g.center.x, det_centers[di].y - g.center.y},
                       dets[di].score});
    }
  } else {
    // Infeasible pairs get a cost big enough that minimizing the total first
    // maximizes the number of feasible pairs.
    const std::size_t rows = std::min(dets.size(), gts.size());
    const bool dets_are_rows = dets.size() <= gts.size();
    const double big = radius * (static_cast<double>(rows) + 1.0) + 1.0;
    std::vector<std::vector<double>> cost(
        dets_are_rows ? dets.size() : gts.size(),
        std::vector<double>(dets_are_rows ? gts.size() : dets.size(), big));
    for (std::size_t di = 0; di < dets.size(); ++di) {
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        const double dist = detail::center_distance(det_centers[di], gts[gi].center);
        if (dist <= radius) {
          if (dets_are_rows)
            cost[di][gi] = dist;
          else
            cost[gi][di] = dist;
        }
      }
    }
    const std::vector<int> row_to_col = detail::min_cost_assignment(cost);
    for (std::size_t r = 0; r < row_to_col.size(); ++r) {
      if (row_to_col[r] < 0) continue;
      const std::size_t di = dets_are_rows ? r : static_cast<std::size_t>(row_to_col[r]);
      const std::size_t gi = dets_are_rows ? static_cast<std::size_t>(row_to_col[r]) : r;
      if (detail::center_distance(det_centers[di], gts[gi].center) > radius) continue;
      pairs.push_back({image_id, gi, di,
                       {det_centers[di].x - gts[gi].center.x,
                        det_centers[di].y - gts[gi].center.y},
                       dets[di].score});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.det_index < b.det_index; });
  return pairs;
}

/// Matches a multi-image dataset image by image. Images are processed in
/// ascending id order so the aggregate output is deterministic; returned
/// indices refer to the full input arrays.
inline std::vector<MatchPair> match_dataset(std::span<const GroundTruth> gts,
                                            std::span<const Detection> dets,
                                            const MatchConfig& cfg = {}) {
  std::map<std::int64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
      by_image;
  for (std::size_t i = 0; i < gts.size(); ++i) by_image[gts[i].image_id].first.push_back(i);
  for (std::size_t i = 0; i < dets.size(); ++i) by_image[dets[i].image_id].second.push_back(i);

  std::vector<MatchPair> all;
  for (const auto& [image_id, indices] : by_image) {
    const auto& [gt_idx, det_idx] = indices;
    std::vector<GroundTruth> img_gts;
    std::vector<Detection> img_dets;
    img_gts.reserve(gt_idx.size());
    img_dets.reserve(det_idx.size());
    for (std::size_t i : gt_idx) img_gts.push_back(gts[i]);
    for (std::size_t i : det_idx) img_dets.push_back(dets[i]);
    for (MatchPair p : match_image(img_gts, img_dets, cfg)) {
      p.gt_index = gt_idx[p.gt_index];
      p.det_index = det_idx[p.det_index];
      all.push_back(p);
    }
  }
  return all;
}

/// Extracts the signed offset samples of matched pairs: the empirical
/// localization jitter distribution consumed by the size optimizer.
inline EmpiricalJitter collect_jitter(std::span<const MatchPair> pairs) {
  EmpiricalJitter jitter;
  jitter.samples.reserve(pairs.size());
  for (const MatchPair& p : pairs) jitter.samples.push_back(p.offset);
  return jitter;
}

}  // namespace cellbox
