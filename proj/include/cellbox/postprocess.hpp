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
#include <optional>
#include <span>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

/// Canonical center of a detection: the explicit center when present, else
/// the box midpoint.
inline CenterPoint center_of(const Detection& det) {
  if (det.center) return *det.center;
  if (det.box) return det.box->center();
  throw ContractError("detection has neither a center nor a bbox");
}

/// Rewrites every detection to a pred_side square centered on the detection
/// center. Scores, classes, and ordering are preserved; the original center
/// is kept on the output record, so the transform is idempotent.
///
/// Detections that carry only a class probability vector are labeled here:
/// the best foreground class and its probability become (category_id, score),
/// and detections whose overall argmax is the background entry are dropped.
///
/// When clip_to is given, boxes are intersected with the image rectangle
/// (detections whose square falls entirely outside are dropped). Default is
/// no clipping: evaluation against unclipped fixed-size truth is what the
/// size optimization models, so clipping is an explicit opt-in.
inline std::vector<Detection> apply_fixed_size(
    std::span<const Detection> dets, double pred_side,
    std::optional<ImageExtent> clip_to = std::nullopt) {
  detail::require(std::isfinite(pred_side) && pred_side > 0.0,
                  "apply_fixed_size: pred_side must be positive");
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const Detection& det : dets) {
    Detection d = det;
    if (d.category_id < 0 && !d.class_probs.empty()) {
      detail::require(
          d.class_probs.size() == kNumForegroundClasses + 1,
          "apply_fixed_size: class_probs must have 9 entries (background last)");
      const auto overall = std::max_element(d.class_probs.begin(), d.class_probs.end());
      if (overall - d.class_probs.begin() == kNumForegroundClasses) continue;
      const auto fg_end = d.class_probs.begin() + kNumForegroundClasses;
      const auto best = std::max_element(d.class_probs.begin(), fg_end);
      d.category_id = static_cast<int>(best - d.class_probs.begin()) + 1;
      d.score = *best;
    }
    const CenterPoint c = center_of(d);
    BBox box = box_from_center(c, pred_side, pred_side);
    if (clip_to) {
      const double x0 = std::max(box.x_min, 0.0);
      const double y0 = std::max(box.y_min, 0.0);
      const double x1 = std::min(box.x_max(), clip_to->width);
      const double y1 = std::min(box.y_max(), clip_to->height);
      if (x1 <= x0 || y1 <= y0) continue;
      box = {x0, y0, x1 - x0, y1 - y0};
    }
    d.center = c;
    d.box = box;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace cellbox
