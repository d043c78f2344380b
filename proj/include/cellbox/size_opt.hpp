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
#include <utility>
#include <variant>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/geometry.hpp"
#include "cellbox/jitter.hpp"
#include "cellbox/random.hpp"

namespace cellbox {

struct SearchRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Output of optimize_size: the side length maximizing expected IoU, the
/// objective there, and the coarse grid samples for reporting.
struct SizeOptimizationResult {
  double s_star = 0.0;
  double expected_iou_at_star = 0.0;
  std::vector<std::pair<double, double>> curve;  // (size, expected IoU)
  SearchRange search_range;
};

/// Gauss-Legendre nodes per integration panel for the parametric models.
/// Fixed so repeated evaluations are bit-identical.
inline constexpr int kQuadratureNodes = 512;

inline constexpr double kDefaultGridStep = 0.25;
inline constexpr double kDefaultRefineTol = 0.01;

/// Brackets the small-jitter regime with margin on both sides of gt_side.
inline SearchRange default_search_range(double gt_side) {
  return {std::max(gt_side - 5.0, gt_side / 2.0), gt_side + 15.0};
}

namespace detail {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// Legendre roots by Newton iteration from the Chebyshev initial guess.
inline QuadRule make_gauss_legendre(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  constexpr double kPi = 3.141592653589793;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    double step = 1.0;
    for (int iter = 0; iter < 100 && std::abs(step) > 1e-15; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      step = p1 / dp;
      x -= step;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline const QuadRule& base_quad_rule() {
  static const QuadRule rule = make_gauss_legendre(kQuadratureNodes);
  return rule;
}

struct AxisRule {
  std::vector<double> nodes;    // offset magnitudes
  std::vector<double> weights;  // include the density; normalized to sum 1
};

// Per-axis rule for |N(0, sigma^2)| with panels split at the kinks of the
// overlap function, so each panel integrates a smooth piece.
inline AxisRule half_normal_axis_rule(double gt_side, double pred_side,
                                      double sigma) {
  const double limit = 8.0 * sigma;  // P(|delta| > 8 sigma) ~ 1e-15
  std::vector<double> cuts{0.0, limit};
  const double kink_clamp = std::abs(pred_side - gt_side) / 2.0;
  const double kink_zero = (gt_side + pred_side) / 2.0;
  if (kink_clamp > 0.0 && kink_clamp < limit) cuts.push_back(kink_clamp);
  if (kink_zero > 0.0 && kink_zero < limit) cuts.push_back(kink_zero);
  std::sort(cuts.begin(), cuts.end());

  const QuadRule& base = base_quad_rule();
  AxisRule axis;
  const double norm = 2.0 / (sigma * std::sqrt(2.0 * 3.141592653589793));
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p];
    const double b = cuts[p + 1];
    if (b - a <= 0.0) continue;
    for (int i = 0; i < kQuadratureNodes; ++i) {
      const double x = a + (b - a) * (base.nodes[i] + 1.0) / 2.0;
      const double pdf = norm * std::exp(-x * x / (2.0 * sigma * sigma));
      const double w = base.weights[i] * (b - a) / 2.0 * pdf;
      axis.nodes.push_back(x);
      axis.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : axis.weights) w /= total;
  return axis;
}

}  // namespace detail

/// Expected IoU of the fixed-size pair (gt_side, pred_side) over the jitter
/// model.
///
/// Deterministic models evaluate the closed form once; empirical models take
/// the exact mean over the sample magnitudes; the parametric families use
/// fixed-node Gauss-Legendre quadrature (kQuadratureNodes per panel, panels
/// split at the integrand's kinks) so repeated calls are bit-identical.
inline double expected_iou(double gt_side, double pred_side,
                           const JitterModel& model) {
  detail::require(std::isfinite(gt_side) && gt_side > 0.0,
                  "expected_iou: gt_side must be positive");
  detail::require(std::isfinite(pred_side) && pred_side > 0.0,
                  "expected_iou: pred_side must be positive");
  validate(model);
  const FixedSizeSpec spec{gt_side, pred_side};

  if (const auto* det = std::get_if<DeterministicJitter>(&model)) {
    return jittered_iou(spec, det->delta_x, det->delta_y);
  }
  if (const auto* emp = std::get_if<EmpiricalJitter>(&model)) {
    detail::require(!emp->samples.empty(),
                    "expected_iou: empirical jitter model has no samples");
    double sum = 0.0;
    for (const JitterOffset& o : emp->samples) sum += jittered_iou(spec, o.dx, o.dy);
    return sum / static_cast<double>(emp->samples.size());
  }
  if (const auto* gauss = std::get_if<GaussianJitter>(&model)) {
    if (gauss->sigma == 0.0) return jittered_iou(spec, 0.0, 0.0);
    const detail::AxisRule axis =
        detail::half_normal_axis_rule(gt_side, pred_side, gauss->sigma);
    std::vector<double> overlap(axis.nodes.size());
    for (std::size_t i = 0; i < axis.nodes.size(); ++i) {
      overlap[i] = detail::overlap_1d(gt_side, pred_side, axis.nodes[i]);
    }
    const double c = gt_side * gt_side + pred_side * pred_side;
    double sum = 0.0;
    for (std::size_t i = 0; i < axis.nodes.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < axis.nodes.size(); ++j) {
        const double inter = overlap[i] * overlap[j];
        row += axis.weights[j] * inter / (c - inter);
      }
      sum += axis.weights[i] * row;
    }
    return sum;
  }
  const auto& radial = std::get<UniformRadialJitter>(model);
  const detail::QuadRule& base = detail::base_quad_rule();
  constexpr double kHalfPi = 1.5707963267948966;
  std::vector<double> cos_t(kQuadratureNodes), sin_t(kQuadratureNodes);
  for (int j = 0; j < kQuadratureNodes; ++j) {
    const double theta = kHalfPi * (base.nodes[j] + 1.0) / 2.0;
    cos_t[j] = std::cos(theta);
    sin_t[j] = std::sin(theta);
  }
  const double c = gt_side * gt_side + pred_side * pred_side;
  auto integrate_theta = [&](double r) {
    double row = 0.0;
    for (int j = 0; j < kQuadratureNodes; ++j) {
      const double inter = detail::overlap_1d(gt_side, pred_side, r * cos_t[j]) *
                           detail::overlap_1d(gt_side, pred_side, r * sin_t[j]);
      row += base.weights[j] / 2.0 * inter / (c - inter);
    }
    return row;
  };
  if (radial.hi == radial.lo) return integrate_theta(radial.lo);
  double sum = 0.0;
  for (int i = 0; i < kQuadratureNodes; ++i) {
    const double r = radial.lo + (radial.hi - radial.lo) * (base.nodes[i] + 1.0) / 2.0;
    sum += base.weights[i] / 2.0 * integrate_theta(r);
  }
  return sum;
}

/// Seeded sample-mean oracle for expected_iou. Deterministic models (and
/// empirical models swept exhaustively with n_samples equal to the sample
/// count) reproduce expected_iou exactly; otherwise the estimate converges at
/// the usual 1/sqrt(n) rate. Identical (seed, n_samples) give identical
/// results.
inline double monte_carlo_expected_iou(double gt_side, double pred_side,
                                       const JitterModel& model,
                                       std::int64_t n_samples,
                                       std::uint64_t seed) {
  detail::require(n_samples >= 1, "monte_carlo_expected_iou: n_samples must be >= 1");
  validate(model);
  if (std::holds_alternative<DeterministicJitter>(model)) {
    return expected_iou(gt_side, pred_side, model);
  }
  if (const auto* emp = std::get_if<EmpiricalJitter>(&model)) {
    detail::require(!emp->samples.empty(),
                    "monte_carlo_expected_iou: empirical jitter model has no samples");
    if (static_cast<std::size_t>(n_samples) == emp->samples.size()) {
      return expected_iou(gt_side, pred_side, model);
    }
  }
  const FixedSizeSpec spec{gt_side, pred_side};
  Rng rng(seed);
  double sum = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const JitterOffset o = sample(model, rng);
    sum += jittered_iou(spec, o.dx, o.dy);
  }
  return sum / static_cast<double>(n_samples);
}

/// Maximizes expected_iou over [range.lo, range.hi]: a coarse scan at
/// grid_step (recorded as the result curve) followed by golden-section
/// refinement of the bracket around the best grid point down to refine_tol.
/// The result is never worse than any evaluated point. No assumption is made
/// that the optimum exceeds gt_side: distributions with frequent zero offsets
/// on an axis can place it at gt_side.
inline SizeOptimizationResult optimize_size(double gt_side, const JitterModel& model,
                                            SearchRange range,
                                            double grid_step = kDefaultGridStep,
                                            double refine_tol = kDefaultRefineTol) {
  detail::require(std::isfinite(range.lo) && std::isfinite(range.hi) &&
                      range.lo > 0.0 && range.lo < range.hi,
                  "optimize_size: search range must satisfy 0 < lo < hi");
  detail::require(std::isfinite(grid_step) && grid_step > 0.0,
                  "optimize_size: grid_step must be positive");
  detail::require(std::isfinite(refine_tol) && refine_tol > 0.0,
                  "optimize_size: refine_tol must be positive");
  if (const auto* emp = std::get_if<EmpiricalJitter>(&model)) {
    detail::require(!emp->samples.empty(),
                    "optimize_size: empirical jitter model has no samples");
  }

  SizeOptimizationResult result;
  result.search_range = range;

  auto objective = [&](double s) { return expected_iou(gt_side, s, model); };

  double best_s = range.lo;
  double best_v = -1.0;
  auto consider = [&](double s, double v) {
    if (v > best_v) {
      best_v = v;
      best_s = s;
    }
  };

  const auto n_steps =
      static_cast<std::int64_t>(std::floor((range.hi - range.lo) / grid_step + 1e-9));
  for (std::int64_t i = 0; i <= n_steps; ++i) {
    const double s = std::min(range.lo + static_cast<double>(i) * grid_step, range.hi);
    const double v = objective(s);
    result.curve.emplace_back(s, v);
    consider(s, v);
  }
  if (result.curve.back().first < range.hi - 1e-12) {
    const double v = objective(range.hi);
    result.curve.emplace_back(range.hi, v);
    consider(range.hi, v);
  }

  double a = std::max(range.lo, best_s - grid_step);
  double b = std::min(range.hi, best_s + grid_step);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  consider(c, fc);
  consider(d, fd);
  while (b - a > refine_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
      consider(d, fd);
    }
  }

  result.s_star = best_s;
  result.expected_iou_at_star = best_v;
  return result;
}

inline SizeOptimizationResult optimize_size(double gt_side, const JitterModel& model) {
  detail::require(std::isfinite(gt_side) && gt_side > 0.0,
                  "optimize_size: gt_side must be positive");
  return optimize_size(gt_side, model, default_search_range(gt_side));
}

}  // namespace cellbox
