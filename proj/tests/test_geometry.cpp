// Copyright 2026 The domaingap Authors.
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "domaingap/geometry.hpp"
#include "test_support.hpp"

namespace domaingap {
namespace {

using Key = std::tuple<long, long, long>;

Key key(const Vec3& v) {
  return {std::lround(v.x * 1e6), std::lround(v.y * 1e6),
          std::lround(v.z * 1e6)};
}

std::set<Key> corner_set(const Box3D& b) {
  std::set<Key> out;
  for (const auto& c : box_corners(b)) out.insert(key(c));
  return out;
}

Box3D cube2() { return {{0, 0, 0}, 2, 2, 2, 0}; }

TEST(BoxCorners, AxisAlignedCube) {
  const auto c = box_corners(cube2());
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(std::abs(c[i].x), 1.0);
    EXPECT_DOUBLE_EQ(c[i].y, 0.0);
    EXPECT_DOUBLE_EQ(std::abs(c[i].z), 1.0);
    EXPECT_DOUBLE_EQ(c[i + 4].x, c[i].x);
    EXPECT_DOUBLE_EQ(c[i + 4].y, -2.0);
    EXPECT_DOUBLE_EQ(c[i + 4].z, c[i].z);
  }
  EXPECT_EQ(corner_set(cube2()).size(), 8u);
}

TEST(BoxCorners, HalfTurnKeepsCornerSet) {
  Box3D a{{1.0, 1.5, 20.0}, 1.5, 1.6, 3.9, 0.0};
  Box3D b = a;
  b.yaw = std::numbers::pi;
  EXPECT_EQ(corner_set(a), corner_set(b));
}

TEST(BoxCorners, QuarterTurnMatchesRotationMatrix) {
  Box3D b{{0, 0, 0}, 1.0, 2.0, 4.0, std::numbers::pi / 2};
  // Length axis for yaw t is (cos t, 0, -sin t): at pi/2 it points to -z.
  const auto c = box_corners(b);
  EXPECT_NEAR(c[0].x, -1.0, 1e-12);  // (+l/2, -w/2): -w/2 along +x is -1
  EXPECT_NEAR(c[0].z, -2.0, 1e-12);
  std::set<Key> expected;
  for (double x : {-1.0, 1.0}) {
    for (double z : {-2.0, 2.0}) {
      expected.insert(key({x, 0.0, z}));
      expected.insert(key({x, -1.0, z}));
    }
  }
  EXPECT_EQ(corner_set(b), expected);
}

TEST(BoxCorners, BottomFaceCounterClockwiseFromAbove) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const auto b = testing::random_box(gen);
    const auto c = box_corners(b);
    // Looking down along +y, x points right and z points up on screen.
    double twice = 0;
    for (int i = 0; i < 4; ++i) {
      const auto& p = c[i];
      const auto& q = c[(i + 1) % 4];
      twice += p.x * q.z - q.x * p.z;
    }
    EXPECT_GT(twice, 0.0);
    EXPECT_NEAR(std::abs(twice) / 2, b.l * b.w, 1e-9);
  }
}

TEST(IouBev, Identical) {
  Box3D b{{0.3, 1.0, 12.0}, 1.5, 1.7, 4.1, 0.4};
  EXPECT_NEAR(iou_bev(b, b), 1.0, 1e-12);
}

TEST(IouBev, OffsetSquares) {
  Box3D a{{0, 0, 0}, 1, 2, 2, 0};
  Box3D b = a;
  b.location.x = 1.0;  // length axis at yaw 0 is +x
  EXPECT_NEAR(iou_bev(a, b), 1.0 / 3.0, 1e-12);
}

TEST(IouBev, RotatedSquareOctagon) {
  Box3D a{{0, 0, 0}, 1, 2, 2, 0};
  Box3D b = a;
  b.yaw = std::numbers::pi / 4;
  const double octagon = 8 * (std::sqrt(2.0) - 1);
  EXPECT_NEAR(iou_bev(a, b), octagon / (8 - octagon), 1e-12);
  EXPECT_NEAR(iou_bev(a, b), 0.70711, 1e-4);
}

TEST(Iou3d, Cases) {
  Box3D a{{0.5, 1.6, 15.0}, 1.6, 1.8, 4.2, -0.7};
  EXPECT_NEAR(iou_3d(a, a), 1.0, 1e-12);
  Box3D raised = a;
  raised.location.y -= a.h / 2;
  EXPECT_NEAR(iou_3d(a, raised), 1.0 / 3.0, 1e-12);
  Box3D far = a;
  far.location.x += 10;
  EXPECT_EQ(iou_3d(a, far), 0.0);
  EXPECT_EQ(iou_bev(a, far), 0.0);
}

TEST(Iou3d, SymmetricAndBounded) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 500; ++t) {
    const auto a = testing::random_box(gen, 1.5);
    const auto b = testing::random_box(gen, 1.5);
    const double ab = iou_3d(a, b);
    EXPECT_NEAR(ab, iou_3d(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_LE(ab, iou_bev(a, b) + 1e-12);
  }
}

TEST(Iou3d, MatchesMonteCarlo) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const auto a = testing::random_box(gen, 1.0);
    const auto b = testing::random_box(gen, 1.0);
    EXPECT_NEAR(iou_3d(a, b), testing::monte_carlo_iou_3d(a, b, 200000, t),
                0.01)
        << "pair " << t;
  }
}

TEST(PointsInBox, CenterAndCorner) {
  Box3D b{{1, 1.5, 10}, 1.5, 1.6, 3.9, 0.3};
  PointCloud cloud;
  cloud.frame = Frame::kCamera;
  cloud.points.push_back({1, 1.5 - 0.75, 10, 0});
  const auto top = box_corners(b)[5];
  cloud.points.push_back({top.x, top.y, top.z, 0});
  cloud.points.push_back({1, 1.5 + 0.01, 10, 0});
  EXPECT_EQ(points_in_box(cloud, b), (std::vector<std::size_t>{0, 1}));
}

TEST(PointsInBox, MatchesBruteForce) {
  std::mt19937_64 gen(9);
  const auto b = testing::random_box(gen, 0.0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  PointCloud cloud;
  for (int i = 0; i < 1000; ++i) {
    cloud.points.push_back({b.location.x + u(gen), b.location.y + u(gen),
                            b.location.z + u(gen), 0});
  }
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (testing::oracle_inside(b, p.x, p.y, p.z)) expected.push_back(i);
  }
  EXPECT_EQ(points_in_box(cloud, b), expected);
  EXPECT_GT(expected.size(), 0u);
}

TEST(BoxFrame, RoundTrip) {
  std::mt19937_64 gen(2);
  const auto b = testing::random_box(gen);
  const Vec3 p{1.2, -0.4, 19.0};
  const Vec3 q = from_box_frame(b, to_box_frame(b, p));
  EXPECT_NEAR(q.x, p.x, 1e-12);
  EXPECT_NEAR(q.y, p.y, 1e-12);
  EXPECT_NEAR(q.z, p.z, 1e-12);
}

TEST(Projection, PixelHeightAtPublishedDepth) {
  const auto proj = make_pinhole(707, 707, 621, 187.5, 1242, 375);
  const auto top = project_point(proj, {0, -1.53, 27.03});
  const auto bottom = project_point(proj, {0, 0, 27.03});
  ASSERT_TRUE(top.valid && bottom.valid);
  EXPECT_NEAR(bottom.py - top.py, 40.0, 0.05);
}

TEST(Projection, OpticalAxisAndBehind) {
  const auto proj = make_pinhole(707, 707, 621, 187.5, 1242, 375);
  for (double z : {0.5, 10.0, 100.0}) {
    const auto p = project_point(proj, {0, 0, z});
    EXPECT_TRUE(p.valid);
    EXPECT_DOUBLE_EQ(p.px, 621.0);
    EXPECT_DOUBLE_EQ(p.py, 187.5);
  }
  EXPECT_FALSE(project_point(proj, {0, 0, -5}).valid);
  EXPECT_FALSE(inside_image(proj, project_point(proj, {0, 0, -5})));
}

TEST(Box3DValidation, RejectsBadBoxes) {
  EXPECT_THROW(validate(Box3D{{0, 0, 0}, 0, 1, 1, 0}), InvalidArgument);
  EXPECT_THROW(validate(Box3D{{0, 0, 0}, 1, 1, 1, 4.0}), InvalidArgument);
  EXPECT_NO_THROW(validate(Box3D{{0, 0, 0}, 1, 1, 1, std::numbers::pi}));
  EXPECT_DOUBLE_EQ(normalize_angle(-std::numbers::pi), std::numbers::pi);
}

}  // namespace
}  // namespace domaingap
