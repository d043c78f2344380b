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

#include <cstdint>
#include <optional>
#include <vector>

#include "cellbox/geometry.hpp"

namespace cellbox {

/// Number of foreground categories; category ids 1..8 in file formats. A
/// class probability vector carries one extra trailing background entry.
inline constexpr int kNumForegroundClasses = 8;

/// One annotated object. In the fixed-size setting `box` is a square of the
/// ground-truth side centered on `center`; after cropping with clipping the
/// box may be smaller, so `center` stays authoritative.
struct GroundTruth {
  std::int64_t image_id = 0;
  std::int64_t id = 0;
  int category_id = 0;
  CenterPoint center;
  BBox box;
};

inline GroundTruth make_fixed_gt(std::int64_t image_id, std::int64_t id,
                                 int category_id, CenterPoint center,
                                 double gt_side) {
  return {image_id, id, category_id, center,
          box_from_center(center, gt_side, gt_side)};
}

/// One predicted object. Carries a center, a box, or both; `center` is
/// authoritative when present. `class_probs`, when non-empty, holds
/// kNumForegroundClasses foreground entries plus one trailing background
/// entry. category_id < 0 means no label has been assigned yet.
struct Detection {
  std::int64_t image_id = 0;
  int category_id = -1;
  double score = 0.0;
  std::optional<CenterPoint> center;
  std::optional<BBox> box;
  std::vector<double> class_probs;
};

struct ImageExtent {
  double width = 0.0;
  double height = 0.0;
};

}  // namespace cellbox
