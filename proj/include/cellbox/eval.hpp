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
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <unordered_set>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/geometry.hpp"
#include "cellbox/postprocess.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

/// IoU thresholds 0.50, 0.55, ..., 0.95.
inline std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

struct EvalConfig {
  /// Strictly increasing thresholds in (0, 1].
  std::vector<double> iou_thresholds = default_iou_thresholds();
  /// Pool every class into one (detection-only evaluation).
  bool class_agnostic = false;
  /// Per image and class, only the top-scoring detections are evaluated;
  /// <= 0 disables the cap.
  int max_dets_per_image = 100;
  /// Number of interpolated recall points; 0 selects all-point
  /// interpolation (exact area under the precision envelope).
  int recall_points = 101;
};

struct EvalReport {
  double map = 0.0;
  double ap50 = std::numeric_limits<double>::quiet_NaN();
  double ap75 = std::numeric_limits<double>::quiet_NaN();
  /// (threshold, AP averaged over classes with at least one ground truth).
  std::vector<std::pair<double, double>> per_threshold_ap;
  /// class id -> AP averaged over thresholds; only classes with ground truth.
  std::map<int, double> per_class_ap;
  std::int64_t n_gt = 0;
  std::int64_t n_det = 0;
  /// Matched detections at the 0.5 threshold (0 if 0.5 is not evaluated).
  std::int64_t n_tp_at_50 = 0;
};

namespace detail {

// Interpolated AP from per-rank hit flags (already in descending score
// order). recall_points = 0 integrates the precision envelope exactly.
inline double average_precision(const std::vector<char>& hit, std::int64_t n_gt,
                                int recall_points) {
  if (n_gt <= 0) return 0.0;
  const std::size_t n = hit.size();
  std::vector<double> precision(n), recall(n);
  std::int64_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (hit[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // precision envelope: best precision at this recall or beyond
  for (std::size_t k = n; k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  if (recall_points == 0) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!hit[k]) continue;
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
    return ap;
  }
  double ap = 0.0;
  std::size_t k = 0;
  for (int j = 0; j < recall_points; ++j) {
    const double r = static_cast<double>(j) / static_cast<double>(recall_points - 1);
    while (k < n && recall[k] < r) ++k;
    if (k == n) break;
    ap += precision[k];
  }
  return ap / static_cast<double>(recall_points);
}

struct ClassEval {
  std::vector<std::vector<char>> hit_per_threshold;  // [threshold][rank]
  std::int64_t n_gt = 0;
};

}  // namespace detail

/// COCO-style mean average precision.
///
/// Per image and class (classes pooled when class_agnostic), detections in
/// descending score order greedily match the unmatched ground truth of
/// highest IoU at or above the threshold; the PR curve is accumulated over
/// the global score ranking and AP is the interpolated mean precision at the
/// configured recall points. mAP averages thresholds, and classes with at
/// least one ground truth. Ties in score resolve by detection input index,
/// ties in IoU by ground-truth input index.
///
/// category_universe, when non-empty, fixes the set of valid category ids;
/// annotations outside it are a contract error. When empty the universe is
/// the union of the categories seen.
inline EvalReport evaluate(std::span<const GroundTruth> gts,
                           std::span<const Detection> dets,
                           const EvalConfig& cfg = {},
                           std::span<const int> category_universe = {}) {
  detail::require(!cfg.iou_thresholds.empty(), "evaluate: no IoU thresholds");
  for (std::size_t i = 0; i < cfg.iou_thresholds.size(); ++i) {
    const double t = cfg.iou_thresholds[i];
    detail::require(std::isfinite(t) && t > 0.0 && t <= 1.0,
                    "evaluate: IoU thresholds must lie in (0, 1]");
    detail::require(i == 0 || cfg.iou_thresholds[i - 1] < t,
                    "evaluate: IoU thresholds must be strictly increasing");
  }
  detail::require(cfg.recall_points == 0 || cfg.recall_points >= 2,
                  "evaluate: recall_points must be 0 (all-point) or >= 2");

  {
    std::unordered_set<std::int64_t> ids;
    for (const GroundTruth& g : gts) {
      detail::require(ids.insert(g.id).second,
                      "evaluate: duplicate ground-truth annotation id " +
                          std::to_string(g.id));
    }
  }
  std::set<int> universe(category_universe.begin(), category_universe.end());
  if (!universe.empty()) {
    for (const GroundTruth& g : gts) {
      detail::require(universe.count(g.category_id) > 0,
                      "evaluate: ground-truth category_id " +
                          std::to_string(g.category_id) +
                          " is not in the category universe");
    }
    if (!cfg.class_agnostic) {
      for (const Detection& d : dets) {
        detail::require(universe.count(d.category_id) > 0,
                        "evaluate: detection category_id " +
                            std::to_string(d.category_id) +
                            " is not in the category universe");
      }
    }
  } else {
    for (const GroundTruth& g : gts) universe.insert(g.category_id);
    for (const Detection& d : dets) universe.insert(d.category_id);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    detail::require(dets[i].box.has_value(),
                    "evaluate: detection " + std::to_string(i) +
                        " has no bbox; apply a size first");
  }

  std::vector<int> classes;
  if (cfg.class_agnostic) {
    classes.push_back(std::numeric_limits<int>::min());  // single pooled class
  } else {
    classes.assign(universe.begin(), universe.end());
  }

  const std::size_t n_thresholds = cfg.iou_thresholds.size();
  std::map<int, detail::ClassEval> evals;
  std::int64_t n_tp_at_50 = 0;
  std::ptrdiff_t threshold_50 = -1;
  for (std::size_t t = 0; t < n_thresholds; ++t) {
    if (std::abs(cfg.iou_thresholds[t] - 0.5) < 1e-9) threshold_50 = static_cast<std::ptrdiff_t>(t);
  }

  for (const int cls : classes) {
    const bool pooled = cfg.class_agnostic;
    detail::ClassEval ce;
    ce.hit_per_threshold.assign(n_thresholds, {});

    // group the class's annotations per image, keeping input order
    std::map<std::int64_t, std::vector<std::size_t>> gt_by_image, det_by_image;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (pooled || gts[i].category_id == cls) {
        gt_by_image[gts[i].image_id].push_back(i);
        ++ce.n_gt;
      }
    }
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (pooled || dets[i].category_id == cls) det_by_image[dets[i].image_id].push_back(i);
    }

    // (score, global index, hit flags) per detection, matched per image
    struct Ranked {
      double score;
      std::size_t index;
      std::vector<char> hit;
    };
    std::vector<Ranked> ranked;

    for (auto& [image_id, det_indices] : det_by_image) {
      std::stable_sort(det_indices.begin(), det_indices.end(),
                       [&](std::size_t a, std::size_t b) {
                         return dets[a].score > dets[b].score;
                       });
      if (cfg.max_dets_per_image > 0 &&
          det_indices.size() > static_cast<std::size_t>(cfg.max_dets_per_image)) {
        det_indices.resize(static_cast<std::size_t>(cfg.max_dets_per_image));
      }
      const auto gt_it = gt_by_image.find(image_id);
      const std::span<const std::size_t> img_gts =
          gt_it == gt_by_image.end() ? std::span<const std::size_t>{}
                                     : std::span<const std::size_t>(gt_it->second);

      std::vector<std::vector<double>> ious(det_indices.size(),
                                            std::vector<double>(img_gts.size()));
      for (std::size_t d = 0; d < det_indices.size(); ++d) {
        for (std::size_t g = 0; g < img_gts.size(); ++g) {
          ious[d][g] = iou(*dets[det_indices[d]].box, gts[img_gts[g]].box);
        }
      }

      std::vector<std::vector<char>> hits(det_indices.size(),
                                          std::vector<char>(n_thresholds, 0));
      for (std::size_t t = 0; t < n_thresholds; ++t) {
        const double threshold = cfg.iou_thresholds[t];
        std::vector<bool> taken(img_gts.size(), false);
        for (std::size_t d = 0; d < det_indices.size(); ++d) {
          double best = threshold;
          std::ptrdiff_t best_gt = -1;
          for (std::size_t g = 0; g < img_gts.size(); ++g) {
            if (taken[g]) continue;
            if (ious[d][g] > best || (best_gt < 0 && ious[d][g] >= best)) {
              best = ious[d][g];
              best_gt = static_cast<std::ptrdiff_t>(g);
            }
          }
          if (best_gt >= 0) {
            taken[static_cast<std::size_t>(best_gt)] = true;
            hits[d][t] = 1;
          }
        }
      }
      for (std::size_t d = 0; d < det_indices.size(); ++d) {
        ranked.push_back({dets[det_indices[d]].score, det_indices[d], std::move(hits[d])});
      }
    }

    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.index < b.index;
    });
    for (std::size_t t = 0; t < n_thresholds; ++t) {
      ce.hit_per_threshold[t].reserve(ranked.size());
      for (const Ranked& r : ranked) ce.hit_per_threshold[t].push_back(r.hit[t]);
    }
    if (threshold_50 >= 0) {
      for (const Ranked& r : ranked) n_tp_at_50 += r.hit[static_cast<std::size_t>(threshold_50)];
    }
    evals[cls] = std::move(ce);
  }

  EvalReport report;
  report.n_gt = static_cast<std::int64_t>(gts.size());
  report.n_det = static_cast<std::int64_t>(dets.size());
  report.n_tp_at_50 = n_tp_at_50;

  std::vector<int> eligible;  // classes that contribute to the mean
  for (const auto& [cls, ce] : evals) {
    if (ce.n_gt > 0) eligible.push_back(cls);
  }
  for (std::size_t t = 0; t < n_thresholds; ++t) {
    double mean_ap = 0.0;
    for (const int cls : eligible) {
      mean_ap += detail::average_precision(evals[cls].hit_per_threshold[t],
                                           evals[cls].n_gt, cfg.recall_points);
    }
    if (!eligible.empty()) mean_ap /= static_cast<double>(eligible.size());
    report.per_threshold_ap.emplace_back(cfg.iou_thresholds[t], mean_ap);
    report.map += mean_ap;
    if (std::abs(cfg.iou_thresholds[t] - 0.5) < 1e-9) report.ap50 = mean_ap;
    if (std::abs(cfg.iou_thresholds[t] - 0.75) < 1e-9) report.ap75 = mean_ap;
  }
  report.map /= static_cast<double>(n_thresholds);
  if (!cfg.class_agnostic) {
    for (const int cls : eligible) {
      double mean_ap = 0.0;
      for (std::size_t t = 0; t < n_thresholds; ++t) {
        mean_ap += detail::average_precision(evals[cls].hit_per_threshold[t],
                                             evals[cls].n_gt, cfg.recall_points);
      }
      report.per_class_ap[cls] = mean_ap / static_cast<double>(n_thresholds);
    }
  }
  return report;
}

/// mAP as a function of the reconstructed box side: applies each size to the
/// detections (no clipping) and evaluates. Returns (size, mAP) in input
/// order.
inline std::vector<std::pair<double, double>> sweep_size_vs_map(
    std::span<const GroundTruth> gts, std::span<const Detection> dets,
    std::span<const double> sizes, const EvalConfig& cfg = {},
    std::span<const int> category_universe = {}) {
  detail::require(!sizes.empty(), "sweep_size_vs_map: no sizes given");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(sizes.size());
  for (const double s : sizes) {
    const std::vector<Detection> resized = apply_fixed_size(dets, s);
    curve.emplace_back(s, evaluate(gts, resized, cfg, category_universe).map);
  }
  return curve;
}

}  // namespace cellbox
