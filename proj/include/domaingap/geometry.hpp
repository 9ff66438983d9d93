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

/// \file
/// Oriented box geometry in the KITTI rectified camera frame.
///
/// Frame: x right, y down, z forward (meters). A box is anchored at the
/// center of its bottom face and spans [location.y - h, location.y] along y.
/// Yaw follows KITTI `rotation_y`: a rotation about the camera y axis, zero
/// when the length axis points along +x. The box-local length axis maps to
/// (cos yaw, 0, -sin yaw) and the width axis to (sin yaw, 0, cos yaw).
///
/// Bird's-eye-view (BEV) polygons live in the (x, z) plane and are stored
/// counter-clockwise with respect to the (x, z) axes, i.e. positive shoelace
/// area when x is the first coordinate and z the second.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "domaingap/error.hpp"
#include "domaingap/point_cloud.hpp"

namespace domaingap {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// A point in the BEV plane: `x` is camera x, `y` is camera z.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(const Vec2& a, const Vec2& b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) {
    return {a.x - b.x, a.y - b.y};
  }
  friend Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x * b.y - a.y * b.x;
}

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

struct Box3D {
  Vec3 location;  // bottom-face center
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;
  double yaw = 0.0;

  double volume() const { return h * w * l; }
  double depth() const { return location.z; }

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

inline bool is_valid(const Box3D& box) {
  constexpr double kPi = std::numbers::pi;
  const bool finite = std::isfinite(box.location.x) &&
                      std::isfinite(box.location.y) &&
                      std::isfinite(box.location.z) && std::isfinite(box.yaw);
  return finite && box.h > 0.0 && box.w > 0.0 && box.l > 0.0 &&
         std::isfinite(box.h) && std::isfinite(box.w) &&
         std::isfinite(box.l) && box.yaw > -kPi && box.yaw <= kPi;
}

inline void validate(const Box3D& box) {
  if (!is_valid(box)) {
    throw InvalidArgument(
        "invalid Box3D: dimensions must be positive and yaw in (-pi, pi]");
  }
}

/// Returns the 8 corners of `box`.
///
/// Order: bottom face first, counter-clockwise seen from above (from -y),
/// starting at the (+l/2, -w/2) local corner; then the top face in the same
/// order. Corner i + 4 sits directly above corner i.
inline std::array<Vec3, 8> box_corners(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = box.l / 2.0;
  const double hw = box.w / 2.0;
  // (length, width) offsets in counter-clockwise order.
  constexpr std::array<std::array<double, 2>, 4> kSigns = {
      {{1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}}};

  std::array<Vec3, 8> corners;
  for (std::size_t i = 0; i < 4; ++i) {
    const double u = kSigns[i][0] * hl;
    const double v = kSigns[i][1] * hw;
    const double x = box.location.x + c * u + s * v;
    const double z = box.location.z - s * u + c * v;
    corners[i] = {x, box.location.y, z};
    corners[i + 4] = {x, box.location.y - box.h, z};
  }
  return corners;
}

struct ConvexPolygon2D {
  std::vector<Vec2> vertices;

  bool empty() const noexcept { return vertices.size() < 3; }
};

// Signed shoelace area; positive for counter-clockwise vertices.
inline double signed_area(std::span<const Vec2> vertices) {
  if (vertices.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return twice / 2.0;
}

inline double area(const ConvexPolygon2D& poly) {
  return std::abs(signed_area(poly.vertices));
}

/// BEV footprint of a box: its four bottom corners in the (x, z) plane.
inline ConvexPolygon2D bev_footprint(const Box3D& box) {
  const auto corners = box_corners(box);
  ConvexPolygon2D poly;
  poly.vertices.reserve(4);
  for (std::size_t i = 0; i < 4; ++i) {
    poly.vertices.push_back({corners[i].x, corners[i].z});
  }
  return poly;
}

/// Intersects two convex polygons with Sutherland–Hodgman clipping. Both
/// inputs must be counter-clockwise; the result is counter-clockwise or empty.
inline ConvexPolygon2D clip_convex(const ConvexPolygon2D& subject,
                                   const ConvexPolygon2D& clipper) {
  if (subject.empty() || clipper.empty()) return {};

  std::vector<Vec2> output = subject.vertices;
  std::vector<Vec2> input;
  const std::size_t n = clipper.vertices.size();
  for (std::size_t e = 0; e < n && !output.empty(); ++e) {
    const Vec2 a = clipper.vertices[e];
    const Vec2 edge = clipper.vertices[(e + 1) % n] - a;
    // >= 0: on or left of the edge, i.e. inside for CCW clippers.
    auto side = [&](const Vec2& p) { return cross(edge, p - a); };

    input.swap(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double d_cur = side(cur);
      const double d_prev = side(prev);
      if (d_cur >= 0.0) {
        if (d_prev < 0.0) {
          const double t = d_prev / (d_prev - d_cur);
          output.push_back(prev + t * (cur - prev));
        }
        output.push_back(cur);
      } else if (d_prev >= 0.0) {
        const double t = d_prev / (d_prev - d_cur);
        output.push_back(prev + t * (cur - prev));
      }
    }
  }
  if (output.size() < 3) return {};
  return ConvexPolygon2D{std::move(output)};
}

// Intersection areas below this are treated as empty.
inline constexpr double kMinIntersectionArea = 1e-9;

inline double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const double inter = area(clip_convex(bev_footprint(a), bev_footprint(b)));
  return inter < kMinIntersectionArea ? 0.0 : inter;
}

/// Length of the overlap of the two boxes' vertical extents.
inline double vertical_overlap(const Box3D& a, const Box3D& b) {
  const double top = std::max(a.location.y - a.h, b.location.y - b.h);
  const double bottom = std::min(a.location.y, b.location.y);
  return std::max(0.0, bottom - top);
}

/// Bird's-eye-view IoU of the two footprints.
inline double iou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.l * a.w + b.l * b.w - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Volumetric IoU: BEV intersection area times vertical overlap over the
/// volume union.
inline double iou_3d(const Box3D& a, const Box3D& b) {
  const double inter_area = bev_intersection_area(a, b);
  const double overlap = vertical_overlap(a, b);
  const double inter = inter_area * overlap;
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Coordinates of `p` in the box frame: `x` along the length axis, `y` along
/// the width axis, `z` upwards from the bottom face.
inline Vec3 to_box_frame(const Box3D& box, const Vec3& p) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Vec3 d = p - box.location;
  return {c * d.x - s * d.z, s * d.x + c * d.z, -d.y};
}

/// Inverse of to_box_frame.
inline Vec3 from_box_frame(const Box3D& box, const Vec3& local) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {box.location.x + c * local.x + s * local.y,
          box.location.y - local.z,
          box.location.z - s * local.x + c * local.y};
}

// Slack added to the closed box so points placed exactly on a face survive
// the round trip through the rotation.
inline constexpr double kContainmentTolerance = 1e-9;

inline bool contains(const Box3D& box, const Vec3& p,
                     double tolerance = kContainmentTolerance) {
  const Vec3 q = to_box_frame(box, p);
  return std::abs(q.x) <= box.l / 2.0 + tolerance &&
         std::abs(q.y) <= box.w / 2.0 + tolerance && q.z >= -tolerance &&
         q.z <= box.h + tolerance;
}

/// Indices of points inside the closed box. Cloud and box must share a frame.
inline std::vector<std::size_t> points_in_box(const PointCloud& cloud,
                                              const Box3D& box) {
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (contains(box, {p.x, p.y, p.z})) inside.push_back(i);
  }
  return inside;
}

/// A 3x4 pinhole projection plus the image it projects into.
struct CameraProjection {
  std::array<double, 12> matrix{};  // row-major
  int image_width = 0;
  int image_height = 0;

  double at(int row, int col) const { return matrix[row * 4 + col]; }
  double focal_u() const { return matrix[0]; }
  double focal_v() const { return matrix[5]; }
  double center_u() const { return matrix[2]; }
  double center_v() const { return matrix[6]; }

  friend bool operator==(const CameraProjection&,
                         const CameraProjection&) = default;
};

/// Projection with zero translation column, focal lengths (fu, fv) and
/// principal point (cu, cv).
inline CameraProjection make_pinhole(double fu, double fv, double cu,
                                     double cv, int width, int height) {
  CameraProjection p;
  p.matrix = {fu, 0.0, cu, 0.0, 0.0, fv, cv, 0.0, 0.0, 0.0, 1.0, 0.0};
  p.image_width = width;
  p.image_height = height;
  return p;
}

struct ProjectedPoint {
  double px = 0.0;
  double py = 0.0;
  double depth = 0.0;  // homogeneous w, the forward distance for KITTI P2
  bool valid = false;  // false when depth <= 0
};

inline ProjectedPoint project_point(const CameraProjection& proj,
                                    const Vec3& p) {
  const auto& m = proj.matrix;
  const double u = m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3];
  const double v = m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7];
  const double w = m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11];
  if (!(w > 0.0)) return {0.0, 0.0, w, false};
  return {u / w, v / w, w, true};
}

inline std::vector<ProjectedPoint> project_points(
    const CameraProjection& proj, std::span<const Vec3> pts) {
  std::vector<ProjectedPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(project_point(proj, p));
  return out;
}

inline bool inside_image(const CameraProjection& proj,
                         const ProjectedPoint& p) {
  return p.valid && p.px >= 0.0 && p.px <= proj.image_width && p.py >= 0.0 &&
         p.py <= proj.image_height;
}

}  // namespace domaingap
