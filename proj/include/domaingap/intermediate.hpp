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
/// The intermediate annotation format consumed by the converter: JSON Lines,
/// one frame per line. Dataset-specific exporters write this; the converter
/// never touches vendor SDK formats. Schema (docs/intermediate_format.md):
///
///   {"frame_id": "000042",
///    "image": {"width": 1920, "height": 1280},
///    "calib": {"P2": [12 numbers], "P0"/"P1"/"P3": optional, default P2,
///              "R0_rect": optional [9], default identity,
///              "Tr_velo_to_cam": [12 numbers]},
///    "objects": [{"category": "VEHICLE",
///                 "box": {"x", "y", "z", "h", "w", "l", "yaw"},
///                 "track_id": "optional"}],
///    "points": optional [[x, y, z, intensity], ...] in the lidar frame,
///    "velodyne": optional path to a .bin, relative to the .jsonl file}

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "domaingap/error.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/kitti_io.hpp"

namespace domaingap {

struct RawObject {
  std::string source_category;
  Box3D box3d;  // camera frame
  std::optional<std::string> track_id;
};

struct RawFrame {
  std::string frame_id;
  Calibration calib;
  std::vector<RawObject> objects;
  std::optional<PointCloud> cloud;
  std::optional<std::string> velodyne_path;
};

namespace detail {

template <std::size_t N>
std::array<double, N> json_numbers(const nlohmann::json& j,
                                   const std::string& key) {
  if (!j.is_array() || j.size() != N) {
    throw ParseError("'" + key + "' must be an array of " + std::to_string(N) +
                     " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) {
      throw ParseError("'" + key + "' must contain numbers");
    }
    out[i] = j[i].get<double>();
  }
  return out;
}

inline const nlohmann::json& json_field(const nlohmann::json& j,
                                        const std::string& key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError("missing field '" + key + "'");
  }
  return j.at(key);
}

inline double json_number(const nlohmann::json& j, const std::string& key) {
  const auto& v = json_field(j, key);
  if (!v.is_number()) throw ParseError("field '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

inline RawFrame parse_intermediate_frame(const nlohmann::json& j) {
  using detail::json_field;
  using detail::json_number;
  RawFrame frame;
  const auto& id = json_field(j, "frame_id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ParseError("'frame_id' must be a non-empty string");
  }
  frame.frame_id = id.get<std::string>();
  if (frame.frame_id.find_first_of("/\\") != std::string::npos) {
    throw ParseError("'frame_id' must not contain path separators");
  }

  const auto& image = json_field(j, "image");
  const double width = json_number(image, "width");
  const double height = json_number(image, "height");
  if (width < 1 || height < 1 || width != std::floor(width) ||
      height != std::floor(height)) {
    throw ParseError("image size must be positive integers");
  }

  const auto& calib = json_field(j, "calib");
  CameraProjection p2;
  p2.matrix = detail::json_numbers<12>(json_field(calib, "P2"), "P2");
  p2.image_width = static_cast<int>(width);
  p2.image_height = static_cast<int>(height);
  for (int i = 0; i < 4; ++i) {
    const std::string key = "P" + std::to_string(i);
    frame.calib.projections[i] = p2;
    if (i != 2 && calib.contains(key)) {
      frame.calib.projections[i].matrix =
          detail::json_numbers<12>(calib.at(key), key);
    }
  }
  if (calib.contains("R0_rect")) {
    frame.calib.r0_rect = detail::json_numbers<9>(calib.at("R0_rect"), "R0_rect");
  }
  frame.calib.tr_velo_to_cam = detail::json_numbers<12>(
      json_field(calib, "Tr_velo_to_cam"), "Tr_velo_to_cam");

  if (j.contains("objects")) {
    const auto& objects = j.at("objects");
    if (!objects.is_array()) throw ParseError("'objects' must be an array");
    for (const auto& o : objects) {
      RawObject obj;
      const auto& cat = json_field(o, "category");
      if (!cat.is_string()) throw ParseError("'category' must be a string");
      obj.source_category = cat.get<std::string>();
      const auto& b = json_field(o, "box");
      obj.box3d.location = {json_number(b, "x"), json_number(b, "y"),
                            json_number(b, "z")};
      obj.box3d.h = json_number(b, "h");
      obj.box3d.w = json_number(b, "w");
      obj.box3d.l = json_number(b, "l");
      obj.box3d.yaw = normalize_angle(json_number(b, "yaw"));
      if (!is_valid(obj.box3d)) {
        throw ParseError("object box must have positive finite dimensions");
      }
      if (o.contains("track_id") && o.at("track_id").is_string()) {
        obj.track_id = o.at("track_id").get<std::string>();
      }
      frame.objects.push_back(std::move(obj));
    }
  }

  if (j.contains("points")) {
    const auto& pts = j.at("points");
    if (!pts.is_array()) throw ParseError("'points' must be an array");
    PointCloud cloud;
    cloud.points.reserve(pts.size());
    for (const auto& p : pts) {
      const auto v = detail::json_numbers<4>(p, "points[]");
      cloud.points.push_back({v[0], v[1], v[2], v[3]});
    }
    frame.cloud = std::move(cloud);
  }
  if (j.contains("velodyne")) {
    if (!j.at("velodyne").is_string()) {
      throw ParseError("'velodyne' must be a path string");
    }
    frame.velodyne_path = j.at("velodyne").get<std::string>();
  }
  return frame;
}

/// Parses a whole .jsonl document. Errors carry the 1-based line number.
inline std::vector<RawFrame> parse_intermediate_file(std::string_view text) {
  std::vector<RawFrame> frames;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::split_ws(line).empty()) return;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      frames.push_back(parse_intermediate_frame(j));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  });
  return frames;
}

}  // namespace domaingap
