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
#include <span>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

/// Closed crop region [x_min, x_max] x [y_min, y_max].
struct CropWindow {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  /// Closed-interval membership on both axes. The retention predicate of
  /// crop_annotations is exactly this test.
  bool contains(CenterPoint p) const {
    return x_min <= p.x && p.x <= x_max && y_min <= p.y && p.y <= y_max;
  }
};

inline bool is_valid(const CropWindow& w) {
  return std::isfinite(w.x_min) && std::isfinite(w.x_max) &&
         std::isfinite(w.y_min) && std::isfinite(w.y_max) && w.x_min < w.x_max &&
         w.y_min < w.y_max;
}

struct CropOptions {
  /// Clip retained boxes to the window. A retained center near the edge has
  /// a box protruding outside; training pipelines typically need in-window
  /// boxes, so this defaults on. Centers are never altered by clipping.
  bool clip_boxes = true;
};

/// Keeps exactly the annotations whose center lies in the closed window and
/// translates them into the window frame (origin at the window corner).
/// Input order is preserved; annotations with centers outside the window are
/// discarded.
inline std::vector<GroundTruth> crop_annotations(std::span<const GroundTruth> gts,
                                                 const CropWindow& window,
                                                 const CropOptions& opts = {}) {
  detail::require(is_valid(window), "crop_annotations: invalid window");
  std::vector<GroundTruth> out;
  for (const GroundTruth& gt : gts) {
    if (!window.contains(gt.center)) continue;
    GroundTruth g = gt;
    g.center = {gt.center.x - window.x_min, gt.center.y - window.y_min};
    BBox b{gt.box.x_min - window.x_min, gt.box.y_min - window.y_min, gt.box.width,
           gt.box.height};
    if (opts.clip_boxes) {
      const double x0 = std::max(b.x_min, 0.0);
      const double y0 = std::max(b.y_min, 0.0);
      const double x1 = std::min(b.x_max(), window.width());
      const double y1 = std::min(b.y_max(), window.height());
      b = {x0, y0, x1 - x0, y1 - y0};  // positive area: the center is inside
    }
    g.box = b;
    out.push_back(g);
  }
  return out;
}

/// Sliding-window tiling of an image. Windows advance by tile - overlap and
/// the last row/column shifts inward so every window lies fully inside the
/// image. Together the windows cover the image; with overlap >= the
/// ground-truth side, every truth box fully inside the image is wholly
/// contained in at least one window. Output is row-major.
inline std::vector<CropWindow> plan_tiles(double image_width, double image_height,
                                          double tile_width, double tile_height,
                                          double overlap) {
  detail::require(std::isfinite(tile_width) && std::isfinite(tile_height) &&
                      tile_width > 0.0 && tile_height > 0.0,
                  "plan_tiles: tile dimensions must be positive");
  detail::require(tile_width <= image_width && tile_height <= image_height,
                  "plan_tiles: tile exceeds the image");
  detail::require(std::isfinite(overlap) && overlap >= 0.0 &&
                      overlap < std::min(tile_width, tile_height),
                  "plan_tiles: overlap must be in [0, min(tile dims))");

  const auto positions = [](double extent, double tile, double stride) {
    std::vector<double> xs;
    const double span = extent - tile;
    const auto n = span <= 0.0 ? std::int64_t{0}
                               : static_cast<std::int64_t>(std::ceil(span / stride - 1e-9));
    xs.reserve(static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = 0; i <= n; ++i) {
      xs.push_back(std::min(static_cast<double>(i) * stride, span));
    }
    return xs;
  };

  const std::vector<double> xs = positions(image_width, tile_width, tile_width - overlap);
  const std::vector<double> ys = positions(image_height, tile_height, tile_height - overlap);
  std::vector<CropWindow> windows;
  windows.reserve(xs.size() * ys.size());
  for (const double y : ys) {
    for (const double x : xs) {
      windows.push_back({x, y, x + tile_width, y + tile_height});
    }
  }
  return windows;
}

}  // namespace cellbox
