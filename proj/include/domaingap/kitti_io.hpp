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
/// KITTI object-detection file formats: label .txt, calib .txt and velodyne
/// .bin.
///
/// Label lines carry 15 whitespace-separated fields, 16 for detections:
///
///   type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y [score]
///
/// Canonical output formatting (what write_label_file emits):
///   - truncation and the 2D box: fixed, two decimals ("%.2f")
///   - occlusion: integer
///   - dimensions, location, alpha, rotation_y, score: six significant
///     digits ("%.6g")
/// Parsing accepts any decimal notation. A canonically formatted file is
/// reproduced byte for byte by write_label_file(parse_label_file(text)).
///
/// Truncation and occlusion of -1 (unknown) are accepted for "DontCare"
/// records and for detections (lines with a score), which is what KITTI
/// ground truth and most detector outputs contain.

#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domaingap/error.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/point_cloud.hpp"

namespace domaingap {

inline constexpr std::string_view kDontCare = "DontCare";

struct BBox2D {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

struct ObjectLabel {
  std::string category;
  double truncation = 0.0;  // [0, 1], or -1 when unknown
  int occlusion = 0;        // {0, 1, 2, 3}, or -1 when unknown
  double alpha = 0.0;
  BBox2D bbox2d;
  Box3D box3d;
  std::optional<double> score;

  bool is_dont_care() const { return category == kDontCare; }

  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    const std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline double parse_double(std::string_view token, std::size_t line,
                           std::size_t field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("expected a finite number, got '" + std::string(token) +
                         "'",
                     line, field);
  }
  return value;
}

inline int parse_int(std::string_view token, std::size_t line,
                     std::size_t field) {
  int value = 0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("expected an integer, got '" + std::string(token) + "'",
                     line, field);
  }
  return value;
}

inline void append_format(std::string& out, const char* fmt, double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), fmt, value);
  out.append(buf, static_cast<std::size_t>(n));
}

// Iterates over lines, yielding (1-based line number, content without the
// trailing '\r').
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    std::string_view line = text.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = next + 1;
  }
}

}  // namespace detail

/// Parses a label (or detection) file. Blank lines are skipped.
inline std::vector<ObjectLabel> parse_label_file(std::string_view text) {
  std::vector<ObjectLabel> labels;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) return;
    if (tok.size() != 15 && tok.size() != 16) {
      throw ParseError("expected 15 or 16 fields, got " +
                           std::to_string(tok.size()),
                       line_no, tok.size() < 15 ? tok.size() + 1 : 17);
    }
    auto num = [&](std::size_t i) {
      return detail::parse_double(tok[i], line_no, i + 1);
    };

    ObjectLabel label;
    label.category = std::string(tok[0]);
    label.truncation = num(1);
    label.occlusion = detail::parse_int(tok[2], line_no, 3);
    label.alpha = num(3);
    label.bbox2d = {num(4), num(5), num(6), num(7)};
    label.box3d.h = num(8);
    label.box3d.w = num(9);
    label.box3d.l = num(10);
    label.box3d.location = {num(11), num(12), num(13)};
    label.box3d.yaw = num(14);
    if (tok.size() == 16) label.score = num(15);

    const bool unknown_allowed = label.is_dont_care() || label.score;
    const bool unknown_occ = unknown_allowed && label.occlusion == -1;
    if (!unknown_occ && (label.occlusion < 0 || label.occlusion > 3)) {
      throw ParseError("occlusion must be in {0,1,2,3}, got " +
                           std::to_string(label.occlusion),
                       line_no, 3);
    }
    const bool unknown_trunc = unknown_allowed && label.truncation == -1.0;
    if (!unknown_trunc && (label.truncation < 0.0 || label.truncation > 1.0)) {
      throw ParseError("truncation must be in [0,1]", line_no, 2);
    }
    if (label.bbox2d.x1 > label.bbox2d.x2) {
      throw ParseError("bbox x1 > x2", line_no, 5);
    }
    if (label.bbox2d.y1 > label.bbox2d.y2) {
      throw ParseError("bbox y1 > y2", line_no, 6);
    }
    if (!label.is_dont_care()) {
      const std::array<double, 3> dims = {label.box3d.h, label.box3d.w,
                                          label.box3d.l};
      for (std::size_t d = 0; d < 3; ++d) {
        if (!(dims[d] > 0.0)) {
          throw ParseError("dimension must be positive", line_no, 9 + d);
        }
      }
    }
    labels.push_back(std::move(label));
  });
  return labels;
}

inline std::string format_label(const ObjectLabel& label) {
  std::string out = label.category;
  auto fixed2 = [&](double v) {
    out += ' ';
    detail::append_format(out, "%.2f", v);
  };
  auto sig6 = [&](double v) {
    out += ' ';
    detail::append_format(out, "%.6g", v);
  };
  fixed2(label.truncation);
  out += ' ';
  out += std::to_string(label.occlusion);
  sig6(label.alpha);
  fixed2(label.bbox2d.x1);
  fixed2(label.bbox2d.y1);
  fixed2(label.bbox2d.x2);
  fixed2(label.bbox2d.y2);
  sig6(label.box3d.h);
  sig6(label.box3d.w);
  sig6(label.box3d.l);
  sig6(label.box3d.location.x);
  sig6(label.box3d.location.y);
  sig6(label.box3d.location.z);
  sig6(label.box3d.yaw);
  if (label.score) sig6(*label.score);
  return out;
}

/// One line per label, each terminated by '\n'. Empty input gives "".
inline std::string write_label_file(std::span<const ObjectLabel> labels) {
  std::string out;
  for (const auto& label : labels) {
    out += format_label(label);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Velodyne point clouds: little-endian float32 (x, y, z, intensity) records.

namespace detail {

inline float load_f32_le(const std::byte* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) {
    bits = (bits << 8) | std::to_integer<std::uint32_t>(p[i]);
  }
  return std::bit_cast<float>(bits);
}

inline void store_f32_le(float value, std::vector<std::byte>& out) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xffu));
  }
}

}  // namespace detail

inline PointCloud read_point_cloud(std::span<const std::byte> bytes) {
  if (bytes.size() % 16 != 0) {
    throw ParseError("velodyne size " + std::to_string(bytes.size()) +
                     " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.frame = Frame::kLidar;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const std::byte* p = bytes.data() + off;
    cloud.points.push_back({detail::load_f32_le(p), detail::load_f32_le(p + 4),
                            detail::load_f32_le(p + 8),
                            detail::load_f32_le(p + 12)});
  }
  return cloud;
}

/// Serializes coordinates rounded to float32.
inline std::vector<std::byte> write_point_cloud(const PointCloud& cloud) {
  std::vector<std::byte> out;
  out.reserve(cloud.points.size() * 16);
  for (const auto& p : cloud.points) {
    detail::store_f32_le(static_cast<float>(p.x), out);
    detail::store_f32_le(static_cast<float>(p.y), out);
    detail::store_f32_le(static_cast<float>(p.z), out);
    detail::store_f32_le(static_cast<float>(p.intensity), out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration.

using Mat3 = std::array<double, 9>;  // row-major

inline Vec3 mul(const Mat3& m, const Vec3& v) {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r * 3 + c] += a[r * 3 + k] * b[k * 3 + c];
  return out;
}

inline Mat3 inverse(const Mat3& m) {
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                     m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (std::abs(det) < 1e-12) throw InvalidArgument("singular 3x3 matrix");
  const double k = 1.0 / det;
  return {k * (m[4] * m[8] - m[5] * m[7]), k * (m[2] * m[7] - m[1] * m[8]),
          k * (m[1] * m[5] - m[2] * m[4]), k * (m[5] * m[6] - m[3] * m[8]),
          k * (m[0] * m[8] - m[2] * m[6]), k * (m[2] * m[3] - m[0] * m[5]),
          k * (m[3] * m[7] - m[4] * m[6]), k * (m[1] * m[6] - m[0] * m[7]),
          k * (m[0] * m[4] - m[1] * m[3])};
}

inline constexpr Mat3 kIdentity3 = {1, 0, 0, 0, 1, 0, 0, 0, 1};

inline bool is_orthonormal(const Mat3& m, double tolerance = 1e-4) {
  Mat3 mt{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) mt[r * 3 + c] = m[c * 3 + r];
  const Mat3 p = mul(m, mt);
  for (int i = 0; i < 9; ++i) {
    if (std::abs(p[i] - kIdentity3[i]) > tolerance) return false;
  }
  return true;
}

// y = linear * x + offset
struct AffineTransform {
  Mat3 linear = kIdentity3;
  Vec3 offset;

  Vec3 apply(const Vec3& p) const { return mul(linear, p) + offset; }

  AffineTransform inverted() const {
    const Mat3 inv = inverse(linear);
    const Vec3 t = mul(inv, offset);
    return {inv, {-t.x, -t.y, -t.z}};
  }
};

inline constexpr int kKittiImageWidth = 1242;
inline constexpr int kKittiImageHeight = 375;

/// Contents of a KITTI calib file. The files carry no image size, so it is
/// read from the non-standard "image_size: W H" line when present and
/// defaults to KITTI's 1242x375 otherwise.
struct Calibration {
  std::array<CameraProjection, 4> projections{};  // P0..P3
  Mat3 r0_rect = kIdentity3;
  std::array<double, 12> tr_velo_to_cam{};  // row-major 3x4

  const CameraProjection& p2() const { return projections[2]; }

  /// R0_rect * Tr_velo_to_cam as an affine map.
  AffineTransform velo_to_rect() const {
    const auto& t = tr_velo_to_cam;
    const Mat3 rot = {t[0], t[1], t[2], t[4], t[5], t[6], t[8], t[9], t[10]};
    return {mul(r0_rect, rot), mul(r0_rect, Vec3{t[3], t[7], t[11]})};
  }

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// Calibration with identical projections on all four cameras, identity
/// rectification and the given velodyne-to-camera transform.
inline Calibration make_calibration(const CameraProjection& proj,
                                    const std::array<double, 12>& tr) {
  Calibration calib;
  calib.projections.fill(proj);
  calib.tr_velo_to_cam = tr;
  return calib;
}

inline Calibration parse_calibration(std::string_view text) {
  std::map<std::string, std::pair<std::size_t, std::vector<double>>, std::less<>>
      entries;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      if (!detail::split_ws(line).empty()) {
        throw ParseError("expected 'key: values'", line_no);
      }
      return;
    }
    const auto key_tokens = detail::split_ws(line.substr(0, colon));
    if (key_tokens.size() != 1) throw ParseError("bad key", line_no);
    const auto values = detail::split_ws(line.substr(colon + 1));
    std::vector<double> parsed;
    parsed.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      parsed.push_back(detail::parse_double(values[i], line_no, i + 1));
    }
    entries[std::string(key_tokens[0])] = {line_no, std::move(parsed)};
  });

  auto require = [&](const std::string& key,
                     std::size_t count) -> const std::vector<double>& {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      throw ParseError("missing calibration key '" + key + "'");
    }
    if (it->second.second.size() != count) {
      throw ParseError("key '" + key + "' expects " + std::to_string(count) +
                           " values, got " +
                           std::to_string(it->second.second.size()),
                       it->second.first);
    }
    return it->second.second;
  };

  int width = kKittiImageWidth;
  int height = kKittiImageHeight;
  if (entries.contains("image_size")) {
    const auto& size = require("image_size", 2);
    width = static_cast<int>(size[0]);
    height = static_cast<int>(size[1]);
    if (width <= 0 || height <= 0 || width != size[0] || height != size[1]) {
      throw ParseError("image_size must be two positive integers",
                       entries.find("image_size")->second.first);
    }
  }

  Calibration calib;
  for (int i = 0; i < 4; ++i) {
    const auto& p = require("P" + std::to_string(i), 12);
    std::copy(p.begin(), p.end(), calib.projections[i].matrix.begin());
    calib.projections[i].image_width = width;
    calib.projections[i].image_height = height;
  }
  const auto& r0 = require("R0_rect", 9);
  std::copy(r0.begin(), r0.end(), calib.r0_rect.begin());
  const auto& tr = require("Tr_velo_to_cam", 12);
  std::copy(tr.begin(), tr.end(), calib.tr_velo_to_cam.begin());

  if (!is_orthonormal(calib.r0_rect)) {
    throw ParseError("R0_rect is not orthonormal",
                     entries.find("R0_rect")->second.first);
  }
  const Mat3 rot = {tr[0], tr[1], tr[2], tr[4], tr[5], tr[6],
                    tr[8], tr[9], tr[10]};
  if (!is_orthonormal(rot)) {
    throw ParseError("Tr_velo_to_cam rotation is not orthonormal",
                     entries.find("Tr_velo_to_cam")->second.first);
  }
  return calib;
}

inline std::string write_calibration(const Calibration& calib) {
  std::string out;
  auto row = [&](const std::string& key, std::span<const double> values) {
    out += key;
    out += ':';
    for (double v : values) {
      out += ' ';
      detail::append_format(out, "%.12e", v);
    }
    out += '\n';
  };
  for (int i = 0; i < 4; ++i) {
    row("P" + std::to_string(i), calib.projections[i].matrix);
  }
  row("R0_rect", calib.r0_rect);
  row("Tr_velo_to_cam", calib.tr_velo_to_cam);
  out += "image_size: " + std::to_string(calib.p2().image_width) + ' ' +
         std::to_string(calib.p2().image_height) + '\n';
  return out;
}

/// Maps a velodyne-frame cloud into the rectified camera frame.
inline PointCloud lidar_to_camera(const PointCloud& cloud,
                                  const Calibration& calib) {
  if (cloud.frame != Frame::kLidar) {
    throw InvalidArgument("lidar_to_camera expects a lidar-frame cloud");
  }
  const AffineTransform t = calib.velo_to_rect();
  PointCloud out;
  out.frame = Frame::kCamera;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const Vec3 q = t.apply({p.x, p.y, p.z});
    out.points.push_back({q.x, q.y, q.z, p.intensity});
  }
  return out;
}

inline PointCloud camera_to_lidar(const PointCloud& cloud,
                                  const Calibration& calib) {
  if (cloud.frame != Frame::kCamera) {
    throw InvalidArgument("camera_to_lidar expects a camera-frame cloud");
  }
  const AffineTransform t = calib.velo_to_rect().inverted();
  PointCloud out;
  out.frame = Frame::kLidar;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const Vec3 q = t.apply({p.x, p.y, p.z});
    out.points.push_back({q.x, q.y, q.z, p.intensity});
  }
  return out;
}

struct FrameBundle {
  std::string frame_id;
  PointCloud cloud;
  Calibration calib;
  std::vector<ObjectLabel> labels;

  friend bool operator==(const FrameBundle&, const FrameBundle&) = default;
};

}  // namespace domaingap
