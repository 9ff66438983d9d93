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
/// Conversion of camera-frame annotations from other datasets into KITTI
/// labels: frustum filtering, category remapping, 2D box synthesis,
/// truncation and occlusion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "domaingap/error.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/intermediate.hpp"
#include "domaingap/kitti_io.hpp"

namespace domaingap {

struct CategoryMap {
  std::set<std::string> car_sources;
  std::set<std::string> truck_sources;
  std::map<std::string, std::string> passthrough;

  void validate() const {
    for (const auto& c : car_sources) {
      if (truck_sources.contains(c)) {
        throw InvalidArgument("category '" + c +
                              "' is mapped to both Car and Truck");
      }
    }
  }
};

/// Source taxonomies for the supported datasets. Unknown names throw.
inline CategoryMap category_map_preset(const std::string& dataset) {
  if (dataset == "argoverse") {
    return {{"VEHICLE"},
            {"LARGE_VEHICLE", "BUS", "TRAILER", "SCHOOL_BUS"},
            {}};
  }
  if (dataset == "nuscenes") {
    return {{"car"}, {"bus", "trailer", "construction_vehicle", "truck"}, {}};
  }
  if (dataset == "lyft") {
    return {{"Car"}, {"other_vehicle", "truck", "bus", "emergency_vehicle"}, {}};
  }
  if (dataset == "waymo") {
    return {{"Car"}, {}, {}};
  }
  if (dataset == "kitti") {
    return {{"Car"},
            {"Truck"},
            {{"Van", "Van"},
             {"Pedestrian", "Pedestrian"},
             {"Person_sitting", "Person_sitting"},
             {"Cyclist", "Cyclist"},
             {"Tram", "Tram"},
             {"Misc", "Misc"},
             {"DontCare", "DontCare"}}};
  }
  throw InvalidArgument("unknown dataset preset '" + dataset + "'");
}

/// Returns the KITTI category for `source`, or nullopt when it is dropped.
inline std::optional<std::string> map_category(const CategoryMap& map,
                                               const std::string& source) {
  if (map.car_sources.contains(source)) return "Car";
  if (map.truck_sources.contains(source)) return "Truck";
  if (const auto it = map.passthrough.find(source);
      it != map.passthrough.end()) {
    return it->second;
  }
  return std::nullopt;
}

inline constexpr double kDefaultMaxDepth = 70.0;

enum class FrustumDecision { kKeep, kOutsideImage, kTooFar };

/// Keeps boxes with at least one corner projecting into the image (with
/// positive depth) and a bottom-center depth of at most `max_depth`. When both
/// rules fail, kOutsideImage is reported.
inline FrustumDecision filter_frustum(const Box3D& box,
                                      const CameraProjection& proj,
                                      double max_depth = kDefaultMaxDepth) {
  const auto corners = box_corners(box);
  const bool visible =
      std::any_of(corners.begin(), corners.end(), [&](const Vec3& c) {
        return inside_image(proj, project_point(proj, c));
      });
  if (!visible) return FrustumDecision::kOutsideImage;
  if (box.depth() > max_depth) return FrustumDecision::kTooFar;
  return FrustumDecision::kKeep;
}

struct ProjectedBox2D {
  BBox2D cropped;
  BBox2D uncropped;
};

/// Smallest image-aligned box around the projected corners. Corners behind
/// the camera are skipped; the cropped box is clamped to the image.
inline ProjectedBox2D compute_2d_bbox(const Box3D& box,
                                      const CameraProjection& proj) {
  const auto corners = box_corners(box);
  bool any = false;
  BBox2D raw{std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const auto& c : corners) {
    const auto p = project_point(proj, c);
    if (!p.valid) continue;
    any = true;
    raw.x1 = std::min(raw.x1, p.px);
    raw.y1 = std::min(raw.y1, p.py);
    raw.x2 = std::max(raw.x2, p.px);
    raw.y2 = std::max(raw.y2, p.py);
  }
  if (!any) {
    throw InvalidArgument("no box corner projects in front of the camera");
  }
  const double w = proj.image_width;
  const double h = proj.image_height;
  BBox2D cropped{std::max(raw.x1, 0.0), std::max(raw.y1, 0.0),
                 std::min(raw.x2, w), std::min(raw.y2, h)};
  // A box entirely off one side collapses onto the border.
  cropped.x1 = std::min(cropped.x1, w);
  cropped.y1 = std::min(cropped.y1, h);
  cropped.x2 = std::max(cropped.x2, 0.0);
  cropped.y2 = std::max(cropped.y2, 0.0);
  return {cropped, raw};
}

/// Fraction of the uncropped box outside the image. Degenerate uncropped
/// boxes count as fully truncated.
inline double compute_truncation(const BBox2D& cropped,
                                 const BBox2D& uncropped) {
  const double full = uncropped.area();
  if (!(full > 0.0)) return 1.0;
  const double kept = std::max(0.0, cropped.width()) *
                      std::max(0.0, cropped.height());
  return std::clamp(1.0 - kept / full, 0.0, 1.0);
}

struct OcclusionInput {
  BBox2D box;
  double depth = 0.0;
};

struct OcclusionResult {
  double fraction = 0.0;
  int level = 0;
  std::int64_t visible_pixels = 0;
  std::int64_t total_pixels = 0;
};

// Integer pixel rectangle [x1, x2) x [y1, y2).
struct PixelRect {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(std::max(0, x2 - x1)) *
           std::max(0, y2 - y1);
  }
};

/// Rounds box edges to the nearest pixel and clamps them to the canvas.
inline PixelRect rasterize(const BBox2D& box, int width, int height) {
  auto round_clamp = [](double v, int hi) {
    return static_cast<int>(std::clamp<long>(std::lround(v), 0, hi));
  };
  return {round_clamp(box.x1, width), round_clamp(box.y1, height),
          round_clamp(box.x2, width), round_clamp(box.y2, height)};
}

/// Occlusion level from a fraction: quarters of [0, 1], top bin closed.
inline int occlusion_level(double fraction) {
  return std::clamp(static_cast<int>(std::floor(fraction * 4.0)), 0, 3);
}

/// Paints object boxes far-to-near onto an id canvas and measures how much
/// of each box is still showing its own id.
///
/// Objects are painted in descending depth; equal depths paint in ascending
/// index so the higher index ends on top. Zero-pixel boxes get fraction 0.
inline std::vector<OcclusionResult> compute_occlusions(
    std::span<const OcclusionInput> objects, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("canvas dimensions must be positive");
  }
  std::vector<std::int32_t> canvas(static_cast<std::size_t>(width) * height,
                                   -1);
  std::vector<std::size_t> order(objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return objects[a].depth > objects[b].depth;
                   });

  std::vector<PixelRect> rects;
  rects.reserve(objects.size());
  for (const auto& o : objects) rects.push_back(rasterize(o.box, width, height));

  for (const std::size_t id : order) {
    const auto& r = rects[id];
    for (int y = r.y1; y < r.y2; ++y) {
      std::int32_t* row = canvas.data() + static_cast<std::size_t>(y) * width;
      std::fill(row + r.x1, row + r.x2, static_cast<std::int32_t>(id));
    }
  }

  std::vector<OcclusionResult> results(objects.size());
  for (std::size_t id = 0; id < objects.size(); ++id) {
    const auto& r = rects[id];
    OcclusionResult& out = results[id];
    out.total_pixels = r.pixel_count();
    for (int y = r.y1; y < r.y2; ++y) {
      const std::int32_t* row =
          canvas.data() + static_cast<std::size_t>(y) * width;
      out.visible_pixels += std::count(row + r.x1, row + r.x2,
                                       static_cast<std::int32_t>(id));
    }
    if (out.total_pixels > 0) {
      out.fraction = 1.0 - static_cast<double>(out.visible_pixels) /
                               static_cast<double>(out.total_pixels);
      out.level = occlusion_level(out.fraction);
    }
  }
  return results;
}

struct ConversionOptions {
  double max_depth = kDefaultMaxDepth;
};

struct ConversionCounts {
  std::size_t kept = 0;
  std::size_t dropped_frustum = 0;
  std::size_t dropped_depth = 0;
  std::size_t dropped_category = 0;

  ConversionCounts& operator+=(const ConversionCounts& o) {
    kept += o.kept;
    dropped_frustum += o.dropped_frustum;
    dropped_depth += o.dropped_depth;
    dropped_category += o.dropped_category;
    return *this;
  }
  friend bool operator==(const ConversionCounts&,
                         const ConversionCounts&) = default;
};

struct ConvertedFrame {
  FrameBundle bundle;
  ConversionCounts counts;
};

/// KITTI observation angle from the global yaw and the object position.
inline double observation_angle(const Box3D& box) {
  return normalize_angle(box.yaw -
                         std::atan2(box.location.x, box.location.z));
}

/// Runs the full pipeline on one frame. Occlusion is computed over every
/// object that survives filtering, in input order.
inline ConvertedFrame convert_frame(const RawFrame& raw, const CategoryMap& map,
                                    const ConversionOptions& options = {}) {
  map.validate();
  const CameraProjection& proj = raw.calib.p2();

  struct Survivor {
    std::string category;
    Box3D box;
    ProjectedBox2D box2d;
  };
  std::vector<Survivor> survivors;
  ConversionCounts counts;

  for (const auto& obj : raw.objects) {
    auto category = map_category(map, obj.source_category);
    if (!category) {
      ++counts.dropped_category;
      continue;
    }
    Box3D box = obj.box3d;
    box.yaw = normalize_angle(box.yaw);
    validate(box);
    switch (filter_frustum(box, proj, options.max_depth)) {
      case FrustumDecision::kOutsideImage:
        ++counts.dropped_frustum;
        continue;
      case FrustumDecision::kTooFar:
        ++counts.dropped_depth;
        continue;
      case FrustumDecision::kKeep:
        break;
    }
    survivors.push_back({std::move(*category), box, compute_2d_bbox(box, proj)});
  }

  std::vector<OcclusionInput> occ_in;
  occ_in.reserve(survivors.size());
  for (const auto& s : survivors) {
    occ_in.push_back({s.box2d.cropped, s.box.depth()});
  }
  const auto occ = compute_occlusions(occ_in, proj.image_width,
                                      proj.image_height);

  ConvertedFrame out;
  out.bundle.frame_id = raw.frame_id;
  out.bundle.calib = raw.calib;
  if (raw.cloud) out.bundle.cloud = *raw.cloud;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto& s = survivors[i];
    ObjectLabel label;
    label.category = s.category;
    label.truncation = compute_truncation(s.box2d.cropped, s.box2d.uncropped);
    label.occlusion = occ[i].level;
    label.alpha = observation_angle(s.box);
    label.bbox2d = s.box2d.cropped;
    label.box3d = s.box;
    out.bundle.labels.push_back(std::move(label));
  }
  counts.kept = survivors.size();
  out.counts = counts;
  return out;
}

}  // namespace domaingap
