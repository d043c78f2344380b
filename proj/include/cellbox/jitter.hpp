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
#include <variant>
#include <vector>

#include "cellbox/error.hpp"
#include "cellbox/geometry.hpp"
#include "cellbox/random.hpp"

namespace cellbox {

/// Fixed offset magnitudes. This is the analytic anchor of the size
/// optimizer: equal-axis deterministic jitter of magnitude d has optimal
/// prediction side gt_side + 2*d.
struct DeterministicJitter {
  double delta_x = 0.0;
  double delta_y = 0.0;
};

/// Offset magnitude uniform in [lo, hi], direction uniform in angle.
struct UniformRadialJitter {
  double lo = 0.0;
  double hi = 0.0;
};

/// Independent zero-mean gaussian per axis.
struct GaussianJitter {
  double sigma = 0.0;
};

/// Measured offsets, stored signed so axis asymmetry survives; consumers
/// that need magnitudes fold the signs on demand.
struct EmpiricalJitter {
  std::vector<JitterOffset> samples;
};

using JitterModel = std::variant<DeterministicJitter, UniformRadialJitter,
                                 GaussianJitter, EmpiricalJitter>;

inline void validate(const JitterModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DeterministicJitter>) {
          detail::require(std::isfinite(m.delta_x) && std::isfinite(m.delta_y) &&
                              m.delta_x >= 0.0 && m.delta_y >= 0.0,
                          "deterministic jitter: deltas must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, UniformRadialJitter>) {
          detail::require(std::isfinite(m.lo) && std::isfinite(m.hi) &&
                              0.0 <= m.lo && m.lo <= m.hi,
                          "uniform jitter: requires 0 <= lo <= hi");
        } else if constexpr (std::is_same_v<T, GaussianJitter>) {
          detail::require(std::isfinite(m.sigma) && m.sigma >= 0.0,
                          "gaussian jitter: sigma must be finite and >= 0");
        } else {
          for (const JitterOffset& s : m.samples) {
            detail::require(std::isfinite(s.dx) && std::isfinite(s.dy),
                            "empirical jitter: samples must be finite");
          }
        }
      },
      model);
}

/// One signed draw from the model. Deterministic magnitudes receive uniform
/// random signs per axis; empirical draws return a stored sample unchanged.
inline JitterOffset sample(const JitterModel& model, Rng& rng) {
  return std::visit(
      [&rng](const auto& m) -> JitterOffset {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DeterministicJitter>) {
          const double sx = rng.below(2) == 0 ? 1.0 : -1.0;
          const double sy = rng.below(2) == 0 ? 1.0 : -1.0;
          return {sx * m.delta_x, sy * m.delta_y};
        } else if constexpr (std::is_same_v<T, UniformRadialJitter>) {
          const double r = rng.uniform(m.lo, m.hi);
          const double t = rng.uniform() * 6.283185307179586;
          return {r * std::cos(t), r * std::sin(t)};
        } else if constexpr (std::is_same_v<T, GaussianJitter>) {
          return {m.sigma * rng.normal(), m.sigma * rng.normal()};
        } else {
          detail::require(!m.samples.empty(),
                          "empirical jitter: cannot sample an empty set");
          return m.samples[rng.below(m.samples.size())];
        }
      },
      model);
}

/// Linear-interpolation quantile of an unsorted value set, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// Reporting statistics over a signed offset sample set. All fields are zero
/// when the set is empty.
struct JitterSummary {
  std::size_t count = 0;
  double mean_abs_dx = 0.0;
  double mean_abs_dy = 0.0;
  double stddev_dx = 0.0;  // sample stddev of the signed offsets
  double stddev_dy = 0.0;
  double median_abs_dx = 0.0;
  double median_abs_dy = 0.0;
  double p90_abs_dx = 0.0;
  double p90_abs_dy = 0.0;
  double mean_radial = 0.0;
};

inline JitterSummary summarize(const EmpiricalJitter& jitter) {
  JitterSummary s;
  s.count = jitter.samples.size();
  if (s.count == 0) return s;
  const double n = static_cast<double>(s.count);
  std::vector<double> abs_dx, abs_dy;
  abs_dx.reserve(s.count);
  abs_dy.reserve(s.count);
  double sum_dx = 0.0, sum_dy = 0.0;
  for (const JitterOffset& o : jitter.samples) {
    abs_dx.push_back(std::abs(o.dx));
    abs_dy.push_back(std::abs(o.dy));
    s.mean_abs_dx += std::abs(o.dx) / n;
    s.mean_abs_dy += std::abs(o.dy) / n;
    s.mean_radial += std::hypot(o.dx, o.dy) / n;
    sum_dx += o.dx;
    sum_dy += o.dy;
  }
  if (s.count > 1) {
    const double mean_dx = sum_dx / n;
    const double mean_dy = sum_dy / n;
    double ss_dx = 0.0, ss_dy = 0.0;
    for (const JitterOffset& o : jitter.samples) {
      ss_dx += (o.dx - mean_dx) * (o.dx - mean_dx);
      ss_dy += (o.dy - mean_dy) * (o.dy - mean_dy);
    }
    s.stddev_dx = std::sqrt(ss_dx / (n - 1.0));
    s.stddev_dy = std::sqrt(ss_dy / (n - 1.0));
  }
  s.median_abs_dx = quantile(abs_dx, 0.5);
  s.median_abs_dy = quantile(abs_dy, 0.5);
  s.p90_abs_dx = quantile(abs_dx, 0.9);
  s.p90_abs_dy = quantile(abs_dy, 0.9);
  return s;
}

}  // namespace cellbox
