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

#include "cellbox/geometry.hpp"

#include <gtest/gtest.h>

#include "cellbox/random.hpp"

namespace cellbox {
namespace {

TEST(Iou, IdenticalBoxes) {
  const BBox a{0, 0, 100, 100};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
}

TEST(Iou, DisjointBoxes) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 100, 100}, {200, 200, 100, 100}), 0.0);
}

TEST(Iou, PartialOverlap) {
  // 50x100 intersection, union 20000 - 5000
  EXPECT_DOUBLE_EQ(iou({0, 0, 100, 100}, {50, 0, 100, 100}), 1.0 / 3.0);
}

TEST(Iou, TouchingEdgesCountAsDisjoint) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 100, 100}, {100, 0, 100, 100}), 0.0);
}

TEST(JitteredIntersection, BufferedAxisStaysFull) {
  const FixedSizeSpec spec{100.0, 101.5};
  const auto [w, h] = jittered_intersection(spec, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(w, 99.75);  // (100 + 101.5) / 2 - 1
  EXPECT_DOUBLE_EQ(h, 100.0);  // 0 <= buffer, clamped at the gt side
}

TEST(JitteredIntersection, AlignedEqualSides) {
  const FixedSizeSpec spec{100.0, 100.0};
  const auto [w, h] = jittered_intersection(spec, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(w, 100.0);
  EXPECT_DOUBLE_EQ(h, 100.0);
}

TEST(JitteredIntersection, FarOffsetClampsToZero) {
  const FixedSizeSpec spec{100.0, 100.0};
  const auto [w, h] = jittered_intersection(spec, 150.0, 0.0);
  EXPECT_DOUBLE_EQ(w, 0.0);
  EXPECT_DOUBLE_EQ(h, 100.0);
}

TEST(JitteredIntersection, SmallerPredictionClampsToItsOwnSide) {
  // with pred < gt the overlap can never exceed the prediction side
  const FixedSizeSpec spec{100.0, 90.0};
  const auto [w, h] = jittered_intersection(spec, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(w, 90.0);
  EXPECT_DOUBLE_EQ(h, 90.0);
}

TEST(JitteredIou, AlignedBufferedBox) {
  const FixedSizeSpec spec{100.0, 101.5};
  const double expected = 10000.0 / 10302.25;  // ~0.970662
  EXPECT_NEAR(jittered_iou(spec, 0.0, 0.0), expected, 1e-15);
  EXPECT_NEAR(expected, 0.970662, 1e-6);
}

TEST(JitteredIou, UnitOffsetsEqualSides) {
  const FixedSizeSpec spec{100.0, 100.0};
  const double expected = 9801.0 / 10199.0;  // ~0.960977
  EXPECT_NEAR(jittered_iou(spec, 1.0, 1.0), expected, 1e-15);
  EXPECT_NEAR(expected, 0.960977, 1e-6);
}

TEST(JitteredIou, BufferBeatsExactSizeUnderUnitJitter) {
  const FixedSizeSpec buffered{100.0, 101.5};
  const FixedSizeSpec exact{100.0, 100.0};
  const double expected = 99.75 * 99.75 / (10000.0 + 10302.25 - 99.75 * 99.75);
  EXPECT_NEAR(jittered_iou(buffered, 1.0, 1.0), expected, 1e-15);
  EXPECT_GT(jittered_iou(buffered, 1.0, 1.0), jittered_iou(exact, 1.0, 1.0));
}

// The closed form must equal IoU of concretely placed boxes: a gt square
// centered at the origin against a prediction square centered at the offset.
TEST(JitteredIou, MatchesConcreteBoxes) {
  Rng rng(20260811);
  for (int i = 0; i < 20000; ++i) {
    const double g = rng.uniform(5.0, 300.0);
    const double s = rng.uniform(0.3 * g, 3.0 * g);
    const double dx = rng.uniform(0.0, 1.2 * g);
    const double dy = rng.uniform(0.0, 1.2 * g);
    const BBox gt_box = box_from_center({0.0, 0.0}, g, g);
    const BBox pred_box = box_from_center({dx, dy}, s, s);
    const double closed = jittered_iou({g, s}, dx, dy);
    const double concrete = iou(gt_box, pred_box);
    ASSERT_NEAR(closed, concrete, 1e-12)
        << "g=" << g << " s=" << s << " dx=" << dx << " dy=" << dy;
  }
}

TEST(JitteredIou, NonIncreasingInEachOffset) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const FixedSizeSpec spec{rng.uniform(10.0, 200.0), rng.uniform(10.0, 200.0)};
    const double fixed = rng.uniform(0.0, 50.0);
    double prev = 2.0;
    for (double d = 0.0; d <= 250.0; d += 1.0) {
      const double v = jittered_iou(spec, d, fixed);
      ASSERT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
}

TEST(JitteredIou, BufferPropertyExactWithinMargin) {
  const FixedSizeSpec spec{100.0, 103.0};  // buffer 1.5
  ASSERT_DOUBLE_EQ(spec.buffer(), 1.5);
  for (double dx : {0.0, 0.5, 1.0, 1.5}) {
    for (double dy : {0.0, 0.75, 1.5}) {
      const auto [w, h] = jittered_intersection(spec, dx, dy);
      EXPECT_EQ(w, 100.0);
      EXPECT_EQ(h, 100.0);
    }
  }
}

TEST(JitteredIou, SymmetricInAxes) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const FixedSizeSpec spec{rng.uniform(10.0, 200.0), rng.uniform(10.0, 200.0)};
    const double a = rng.uniform(0.0, 150.0);
    const double b = rng.uniform(0.0, 150.0);
    ASSERT_DOUBLE_EQ(jittered_iou(spec, a, b), jittered_iou(spec, b, a));
  }
}

TEST(JitteredIou, AlwaysInUnitInterval) {
  Rng rng(13);
  for (int i = 0; i < 5000; ++i) {
    const FixedSizeSpec spec{rng.uniform(1.0, 500.0), rng.uniform(1.0, 500.0)};
    const double v = jittered_iou(spec, rng.uniform(0.0, 600.0), rng.uniform(0.0, 600.0));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(FixedSizeSpec, NegativeBufferWhenPredictionSmaller) {
  EXPECT_DOUBLE_EQ((FixedSizeSpec{100.0, 95.0}.buffer()), -2.5);
  EXPECT_DOUBLE_EQ((FixedSizeSpec{100.0, 101.5}.buffer()), 0.75);
}

TEST(BBox, CenterAndBounds) {
  const BBox b{10.0, 20.0, 90.0, 110.0};
  EXPECT_DOUBLE_EQ(b.center().x, 55.0);
  EXPECT_DOUBLE_EQ(b.center().y, 75.0);
  EXPECT_DOUBLE_EQ(b.x_max(), 100.0);
  EXPECT_DOUBLE_EQ(b.y_max(), 130.0);
  EXPECT_TRUE(is_valid(b));
  EXPECT_FALSE(is_valid(BBox{0, 0, 0, 10}));
  EXPECT_FALSE(is_valid(BBox{0, 0, 10, -1}));
}

}  // namespace
}  // namespace cellbox
