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

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/jitter.hpp"
#include "cellbox/random.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

/// Rejection-sampling budget per object before generate_scene fails loudly.
inline constexpr int kPlacementAttemptsPerObject = 10000;

/// Synthetic scene: fixed-size objects scattered over an image with a
/// minimum center separation, mimicking densely clustered cells.
struct SceneConfig {
  double width = 1024.0;
  double height = 1024.0;
  int n_objects = 50;
  double min_center_separation = 0.0;
  double gt_side = 100.0;
  /// Probabilities of the foreground classes; must sum to 1.
  std::array<double, kNumForegroundClasses> class_distribution = {
      0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125};
  std::uint64_t seed = 1;
};

struct ScoreModel {
  double tp_mean = 0.9;
  double tp_std = 0.05;
  double fp_mean = 0.3;
  double fp_std = 0.1;
};

/// Row-stochastic class confusion: row = true class, column = predicted.
using ConfusionMatrix =
    std::array<std::array<double, kNumForegroundClasses>, kNumForegroundClasses>;

inline ConfusionMatrix identity_confusion() {
  ConfusionMatrix m{};
  for (int i = 0; i < kNumForegroundClasses; ++i) m[i][i] = 1.0;
  return m;
}

/// Noise model of a synthetic detector: center jitter, misses, uniform
/// false positives, score distributions, and class confusion.
struct DetectorNoise {
  JitterModel jitter = DeterministicJitter{};
  double miss_rate = 0.0;
  double false_positives_per_image = 0.0;
  ScoreModel score_model;
  ConfusionMatrix confusion = identity_confusion();
  std::uint64_t seed = 2;
};

namespace detail {

inline void validate(const SceneConfig& cfg) {
  require(std::isfinite(cfg.width) && std::isfinite(cfg.height) &&
              cfg.width >= cfg.gt_side && cfg.height >= cfg.gt_side,
          "scene: extent must fit at least one object");
  require(cfg.gt_side > 0.0, "scene: gt_side must be positive");
  require(cfg.n_objects >= 0, "scene: n_objects must be >= 0");
  require(std::isfinite(cfg.min_center_separation) && cfg.min_center_separation >= 0.0,
          "scene: min_center_separation must be >= 0");
  double total = 0.0;
  for (const double p : cfg.class_distribution) {
    require(std::isfinite(p) && p >= 0.0, "scene: class probabilities must be >= 0");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, "scene: class probabilities must sum to 1");
}

inline void validate(const DetectorNoise& noise) {
  cellbox::validate(noise.jitter);
  require(noise.miss_rate >= 0.0 && noise.miss_rate <= 1.0,
          "detector noise: miss_rate must be in [0, 1]");
  require(std::isfinite(noise.false_positives_per_image) &&
              noise.false_positives_per_image >= 0.0,
          "detector noise: false_positives_per_image must be >= 0");
  require(noise.score_model.tp_std >= 0.0 && noise.score_model.fp_std >= 0.0,
          "detector noise: score stddevs must be >= 0");
  for (int r = 0; r < kNumForegroundClasses; ++r) {
    double total = 0.0;
    for (const double p : noise.confusion[r]) {
      require(std::isfinite(p) && p >= 0.0, "detector noise: confusion entries must be >= 0");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-9,
            "detector noise: confusion row " + std::to_string(r + 1) + " must sum to 1");
  }
}

inline int categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace detail

/// Seeded placement of n_objects fixed-size ground truths. Boxes lie fully
/// inside the extent and all pairwise center distances respect the
/// configured separation; an infeasible packing fails loudly after
/// kPlacementAttemptsPerObject rejections rather than degrading separation.
inline std::vector<GroundTruth> generate_scene(const SceneConfig& cfg,
                                               std::int64_t image_id = 1) {
  detail::validate(cfg);
  Rng rng(cfg.seed);
  const double margin = cfg.gt_side / 2.0;
  const double sep2 = cfg.min_center_separation * cfg.min_center_separation;
  std::vector<GroundTruth> gts;
  gts.reserve(static_cast<std::size_t>(cfg.n_objects));
  for (int k = 0; k < cfg.n_objects; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttemptsPerObject; ++attempt) {
      const CenterPoint c{rng.uniform(margin, cfg.width - margin),
                          rng.uniform(margin, cfg.height - margin)};
      bool ok = true;
      for (const GroundTruth& g : gts) {
        const double dx = c.x - g.center.x;
        const double dy = c.y - g.center.y;
        if (dx * dx + dy * dy < sep2) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const int cls = detail::categorical(cfg.class_distribution, rng);
      gts.push_back(make_fixed_gt(image_id, k + 1, cls + 1, c, cfg.gt_side));
      placed = true;
      break;
    }
    detail::require(placed, "generate_scene: could not place object " +
                                std::to_string(k + 1) + " after " +
                                std::to_string(kPlacementAttemptsPerObject) +
                                " attempts; extent too small for the separation");
  }
  return gts;
}

/// Seeded synthetic detector over one image's ground truths: each truth is
/// missed with miss_rate, survivors emit a detection at center + jitter with
/// a confused class and a clipped-normal score, then a Poisson number of
/// uniform false positives is appended. Output boxes are gt_side squares, so
/// the detections evaluate directly and can be resized downstream.
inline std::vector<Detection> simulate_detector(std::span<const GroundTruth> gts,
                                                const DetectorNoise& noise,
                                                ImageExtent extent,
                                                double gt_side = 100.0,
                                                std::int64_t image_id = 1) {
  detail::validate(noise);
  detail::require(std::isfinite(extent.width) && std::isfinite(extent.height) &&
                      extent.width > 0.0 && extent.height > 0.0,
                  "simulate_detector: extent must be positive");
  for (const GroundTruth& g : gts) {
    detail::require(g.image_id == image_id, "simulate_detector: mixed image ids");
    detail::require(g.category_id >= 1 && g.category_id <= kNumForegroundClasses,
                    "simulate_detector: ground-truth category_id out of range");
  }
  Rng rng(noise.seed);
  const auto clipped_score = [&rng](double mean, double std) {
    return std::clamp(mean + std * rng.normal(), 0.0, 1.0);
  };

  std::vector<Detection> dets;
  for (const GroundTruth& g : gts) {
    if (rng.uniform() < noise.miss_rate) continue;
    const JitterOffset off = sample(noise.jitter, rng);
    const CenterPoint c{g.center.x + off.dx, g.center.y + off.dy};
    const int cls = detail::categorical(noise.confusion[g.category_id - 1], rng);
    Detection d;
    d.image_id = image_id;
    d.category_id = cls + 1;
    d.score = clipped_score(noise.score_model.tp_mean, noise.score_model.tp_std);
    d.center = c;
    d.box = box_from_center(c, gt_side, gt_side);
    dets.push_back(std::move(d));
  }
  const std::uint64_t n_fp = rng.poisson(noise.false_positives_per_image);
  for (std::uint64_t i = 0; i < n_fp; ++i) {
    const CenterPoint c{rng.uniform(0.0, extent.width), rng.uniform(0.0, extent.height)};
    Detection d;
    d.image_id = image_id;
    d.category_id = static_cast<int>(rng.below(kNumForegroundClasses)) + 1;
    d.score = clipped_score(noise.score_model.fp_mean, noise.score_model.fp_std);
    d.center = c;
    d.box = box_from_center(c, gt_side, gt_side);
    dets.push_back(std::move(d));
  }
  return dets;
}

}  // namespace cellbox
