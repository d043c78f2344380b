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
#include <utility>

namespace cellbox {

/// Sub-pixel point in image coordinates.
struct CenterPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned box in corner+size form. Valid boxes have positive extent;
/// geometry stays real-valued throughout, rounding is an I/O concern.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double width = 0.0;
  double height = 0.0;

  double x_max() const { return x_min + width; }
  double y_max() const { return y_min + height; }
  double area() const { return width * height; }
  CenterPoint center() const {
    return {x_min + width / 2.0, y_min + height / 2.0};
  }
};

inline BBox box_from_center(CenterPoint c, double width, double height) {
  return {c.x - width / 2.0, c.y - height / 2.0, width, height};
}

inline bool is_valid(const BBox& b) {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) &&
         std::isfinite(b.width) && std::isfinite(b.height) && b.width > 0.0 &&
         b.height > 0.0;
}

/// Signed center localization error of a detection relative to its matched
/// ground truth (detection minus truth). The intersection formulas below
/// depend only on the magnitudes |dx|, |dy|.
struct JitterOffset {
  double dx = 0.0;
  double dy = 0.0;
};

/// Side lengths of the fixed-size setting: square ground-truth boxes of side
/// gt_side and square reconstructed predictions of side pred_side.
struct FixedSizeSpec {
  double gt_side = 100.0;
  double pred_side = 100.0;

  /// Half-margin by which the prediction absorbs center shift before losing
  /// intersection area; negative when the prediction is smaller than the
  /// truth.
  double buffer() const { return (pred_side - gt_side) / 2.0; }
};

/// Intersection-over-union of two valid boxes; 0 when disjoint.
inline double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

namespace detail {

// 1-D overlap of a gt_side interval and a pred_side interval whose centers
// are |delta| apart. The upper clamp is min(gt, pred) rather than gt alone,
// which keeps the closed form equal to concrete interval overlap when the
// prediction is smaller than the truth.
inline double overlap_1d(double gt_side, double pred_side, double delta) {
  const double raw = (gt_side + pred_side) / 2.0 - std::abs(delta);
  return std::clamp(raw, 0.0, std::min(gt_side, pred_side));
}

}  // namespace detail

/// Intersection extents (width, height) of the two squares of `spec` whose
/// centers differ by (delta_x, delta_y). Offsets may be passed signed; only
/// magnitudes matter. Each extent lies in [0, min(gt_side, pred_side)].
inline std::pair<double, double> jittered_intersection(const FixedSizeSpec& spec,
                                                       double delta_x,
                                                       double delta_y) {
  return {detail::overlap_1d(spec.gt_side, spec.pred_side, delta_x),
          detail::overlap_1d(spec.gt_side, spec.pred_side, delta_y)};
}

/// IoU of the two squares of `spec` under center offset (delta_x, delta_y).
/// Equals iou() of the concretely placed boxes.
inline double jittered_iou(const FixedSizeSpec& spec, double delta_x,
                           double delta_y) {
  const auto [w, h] = jittered_intersection(spec, delta_x, delta_y);
  const double inter = w * h;
  return inter /
         (spec.gt_side * spec.gt_side + spec.pred_side * spec.pred_side - inter);
}

}  // namespace cellbox
