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
/// Cross-domain size correction.
///
/// Given mean object sizes of a source and a target domain, the size delta
/// is target minus source. It can be used two ways:
///   - statistical normalization resizes every source box by the delta and
///     rescales the LiDAR points inside it, producing source data that looks
///     like the target domain;
///   - output transformation adds the delta to a detector's predicted sizes.
/// assign_gt_sizes is the diagnostic that swaps predicted sizes for the
/// overlapping ground-truth sizes.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "domaingap/error.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/kitti_io.hpp"

namespace domaingap {

struct Dims {
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

inline Dims dims_of(const Box3D& b) { return {b.h, b.w, b.l}; }

struct SizeStats {
  std::string category;
  Dims mean;
  Dims std;  // population standard deviation
  std::size_t count = 0;
};

struct SizeDelta {
  double dh = 0.0;
  double dw = 0.0;
  double dl = 0.0;

  SizeDelta operator-() const { return {-dh, -dw, -dl}; }
  SizeDelta scaled(double s) const { return {s * dh, s * dw, s * dl}; }
  bool is_zero() const { return dh == 0.0 && dw == 0.0 && dl == 0.0; }

  friend bool operator==(const SizeDelta&, const SizeDelta&) = default;
};

// Compensated summation; keeps means independent of summation drift.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Mean and population standard deviation of (h, w, l) over labels of
/// `category`.
inline SizeStats compute_size_stats(std::span<const ObjectLabel> labels,
                                    const std::string& category) {
  std::array<KahanSum, 3> sums;
  std::size_t n = 0;
  for (const auto& lab : labels) {
    if (lab.category != category) continue;
    sums[0].add(lab.box3d.h);
    sums[1].add(lab.box3d.w);
    sums[2].add(lab.box3d.l);
    ++n;
  }
  if (n == 0) {
    throw InvalidArgument("no labels of category '" + category + "'");
  }
  const double dn = static_cast<double>(n);
  const Dims mean{sums[0].value() / dn, sums[1].value() / dn,
                  sums[2].value() / dn};
  std::array<KahanSum, 3> sq;
  for (const auto& lab : labels) {
    if (lab.category != category) continue;
    sq[0].add((lab.box3d.h - mean.h) * (lab.box3d.h - mean.h));
    sq[1].add((lab.box3d.w - mean.w) * (lab.box3d.w - mean.w));
    sq[2].add((lab.box3d.l - mean.l) * (lab.box3d.l - mean.l));
  }
  const Dims sd{std::sqrt(sq[0].value() / dn), std::sqrt(sq[1].value() / dn),
                std::sqrt(sq[2].value() / dn)};
  return {category, mean, sd, n};
}

/// Component-wise target mean minus source mean.
inline SizeDelta size_delta(const SizeStats& target, const SizeStats& source) {
  if (target.category != source.category) {
    throw InvalidArgument("size_delta: category mismatch ('" +
                          target.category + "' vs '" + source.category + "')");
  }
  return {target.mean.h - source.mean.h, target.mean.w - source.mean.w,
          target.mean.l - source.mean.l};
}

// ---------------------------------------------------------------------------
// Presets. Dataset means are ground-truth car box averages of the public
// datasets converted to KITTI format; the *-sales entries are the average
// sizes of cars sold in each country. Standard deviations are not published
// for cars and are left at zero; `count` is a placeholder of 1.

inline const std::vector<std::string>& size_preset_names() {
  static const std::vector<std::string> names = {
      "kitti", "argoverse",     "nuscenes", "lyft",
      "waymo", "germany-sales", "usa-sales"};
  return names;
}

inline SizeStats size_preset(const std::string& name) {
  static const std::map<std::string, Dims> kCar = {
      {"kitti", {1.53, 1.62, 3.89}},    {"argoverse", {1.69, 1.96, 4.51}},
      {"nuscenes", {1.73, 1.96, 4.64}}, {"lyft", {1.71, 1.91, 4.73}},
      {"waymo", {1.79, 2.11, 4.80}},    {"germany-sales", {1.49, 1.79, 4.40}},
      {"usa-sales", {1.75, 1.93, 5.15}},
  };
  const auto it = kCar.find(name);
  if (it == kCar.end()) {
    throw InvalidArgument("unknown size preset '" + name + "'");
  }
  return {"Car", it->second, {}, 1};
}

/// Pedestrian mean +- std per dataset.
inline SizeStats pedestrian_size_preset(const std::string& name) {
  struct Entry {
    Dims mean;
    Dims std;
  };
  static const std::map<std::string, Entry> kPed = {
      {"kitti", {{1.76, 0.66, 0.84}, {0.11, 0.14, 0.23}}},
      {"argoverse", {{1.84, 0.78, 0.78}, {0.15, 0.14, 0.14}}},
      {"nuscenes", {{1.78, 0.67, 0.73}, {0.18, 0.14, 0.19}}},
      {"lyft", {{1.76, 0.76, 0.78}, {0.18, 0.14, 0.17}}},
      {"waymo", {{1.75, 0.85, 0.90}, {0.20, 0.15, 0.19}}},
  };
  const auto it = kPed.find(name);
  if (it == kPed.end()) {
    throw InvalidArgument("unknown pedestrian preset '" + name + "'");
  }
  return {"Pedestrian", it->second.mean, it->second.std, 1};
}

// ---------------------------------------------------------------------------
// Statistical normalization.

namespace detail {

inline Dims resized(const Box3D& box, const SizeDelta& delta) {
  return {box.h + delta.dh, box.w + delta.dw, box.l + delta.dl};
}

}  // namespace detail

/// Resizes every `category` box by `delta` and rescales the points inside.
///
/// For each box, in ascending depth (ties by label index), the points inside
/// the original closed box that no earlier box has claimed are scaled per
/// axis about the bottom-face center so that they fill the resized box. The
/// bottom center and yaw stay fixed. Points are moved in place, so point
/// order and count are preserved and untouched points stay bit-identical.
/// A lidar-frame cloud is resized in the rectified camera frame through the
/// frame's calibration and stays in the lidar frame.
inline FrameBundle statistical_normalize_frame(const FrameBundle& frame,
                                               const SizeDelta& delta,
                                               const std::string& category) {
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < frame.labels.size(); ++i) {
    const auto& lab = frame.labels[i];
    if (lab.category != category) continue;
    const Dims d = detail::resized(lab.box3d, delta);
    if (!(d.h > 0.0 && d.w > 0.0 && d.l > 0.0)) {
      throw InvalidArgument("frame '" + frame.frame_id + "' label " +
                            std::to_string(i) + " (" + lab.category +
                            "): resized dimensions must stay positive");
    }
    targets.push_back(i);
  }
  std::stable_sort(targets.begin(), targets.end(),
                   [&](std::size_t a, std::size_t b) {
                     return frame.labels[a].box3d.depth() <
                            frame.labels[b].box3d.depth();
                   });

  FrameBundle out = frame;
  const bool lidar = frame.cloud.frame == Frame::kLidar;
  const AffineTransform to_cam =
      lidar ? frame.calib.velo_to_rect() : AffineTransform{};
  const Mat3 cam_to_cloud = lidar ? inverse(to_cam.linear) : kIdentity3;

  std::vector<Vec3> cam;
  cam.reserve(frame.cloud.size());
  for (const auto& p : frame.cloud.points) cam.push_back(to_cam.apply({p.x, p.y, p.z}));

  std::vector<bool> claimed(cam.size(), false);
  for (const std::size_t li : targets) {
    const Box3D& box = frame.labels[li].box3d;
    const Dims d = detail::resized(box, delta);
    const double sl = d.l / box.l;
    const double sw = d.w / box.w;
    const double sh = d.h / box.h;
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    for (std::size_t pi = 0; pi < cam.size(); ++pi) {
      if (claimed[pi] || !contains(box, cam[pi])) continue;
      claimed[pi] = true;
      const Vec3 local = to_box_frame(box, cam[pi]);
      // Displacement in the box frame, then rotated into the camera frame.
      const double du = (sl - 1.0) * local.x;
      const double dv = (sw - 1.0) * local.y;
      const double ds = (sh - 1.0) * local.z;
      const Vec3 move_cam{c * du + s * dv, -ds, -s * du + c * dv};
      const Vec3 move = mul(cam_to_cloud, move_cam);
      auto& p = out.cloud.points[pi];
      p.x += move.x;
      p.y += move.y;
      p.z += move.z;
    }
    auto& b = out.labels[li].box3d;
    b.h = d.h;
    b.w = d.w;
    b.l = d.l;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output transformation and ground-truth size assignment.

/// Adds `scale * delta` to the size of every `category` detection. Bottom
/// center, yaw, 2D box and score are untouched.
inline std::vector<ObjectLabel> output_transform(
    std::span<const ObjectLabel> dets, const SizeDelta& delta,
    const std::string& category = "Car", double scale = 1.0) {
  const SizeDelta applied = delta.scaled(scale);
  std::vector<ObjectLabel> out(dets.begin(), dets.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& b = out[i].box3d;
    if (out[i].category != category) continue;
    const Dims d = detail::resized(b, applied);
    if (!(d.h > 0.0 && d.w > 0.0 && d.l > 0.0)) {
      throw InvalidArgument("detection " + std::to_string(i) +
                            ": transformed dimensions must stay positive");
    }
    b.h = d.h;
    b.w = d.w;
    b.l = d.l;
  }
  return out;
}

inline constexpr double kGtSizeMinIou = 0.2;

/// Gives each `category` detection whose best 3D IoU with a `category`
/// ground truth exceeds `min_iou` that ground truth's (h, w, l). Ties go to
/// the lowest ground-truth index.
inline std::vector<ObjectLabel> assign_gt_sizes(
    std::span<const ObjectLabel> gts, std::span<const ObjectLabel> dets,
    double min_iou = kGtSizeMinIou, const std::string& category = "Car") {
  std::vector<ObjectLabel> out(dets.begin(), dets.end());
  for (auto& det : out) {
    if (det.category != category) continue;
    int best = -1;
    double best_iou = min_iou;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].category != category) continue;
      const double iou = iou_3d(det.box3d, gts[g].box3d);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      det.box3d.h = gts[best].box3d.h;
      det.box3d.w = gts[best].box3d.w;
      det.box3d.l = gts[best].box3d.l;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset statistics.

struct PointCountStats {
  double per_car = 0.0;    // mean points inside each qualifying car box
  double per_scene = 0.0;  // mean points projecting into the image
  std::size_t cars = 0;
  std::size_t scenes = 0;
};

/// Points inside the camera image (positive depth, projected pixel in the
/// image) for one frame.
inline std::size_t points_in_view(const PointCloud& camera_cloud,
                                  const CameraProjection& proj) {
  std::size_t n = 0;
  for (const auto& p : camera_cloud.points) {
    if (inside_image(proj, project_point(proj, {p.x, p.y, p.z}))) ++n;
  }
  return n;
}

inline PointCountStats point_count_stats(std::span<const FrameBundle> frames,
                                         const std::string& category = "Car",
                                         double max_depth = 70.0) {
  PointCountStats stats;
  KahanSum car_points;
  KahanSum scene_points;
  for (const auto& f : frames) {
    const PointCloud cam = f.cloud.frame == Frame::kLidar
                               ? lidar_to_camera(f.cloud, f.calib)
                               : f.cloud;
    scene_points.add(static_cast<double>(points_in_view(cam, f.calib.p2())));
    ++stats.scenes;
    for (const auto& lab : f.labels) {
      if (lab.category != category || lab.box3d.depth() > max_depth) continue;
      car_points.add(static_cast<double>(points_in_box(cam, lab.box3d).size()));
      ++stats.cars;
    }
  }
  if (stats.scenes > 0) {
    stats.per_scene = scene_points.value() / static_cast<double>(stats.scenes);
  }
  if (stats.cars > 0) {
    stats.per_car = car_points.value() / static_cast<double>(stats.cars);
  }
  return stats;
}

/// Counts per half-open bin [k * width, (k + 1) * width), keyed by k.
struct SizeHistograms {
  double bin_width = 0.0;
  std::map<long, std::size_t> h;
  std::map<long, std::size_t> w;
  std::map<long, std::size_t> l;
};

inline SizeHistograms size_histograms(std::span<const ObjectLabel> labels,
                                      const std::string& category,
                                      double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  SizeHistograms hist;
  hist.bin_width = bin_width;
  auto bin = [&](double v) {
    return static_cast<long>(std::floor(v / bin_width));
  };
  for (const auto& lab : labels) {
    if (lab.category != category) continue;
    ++hist.h[bin(lab.box3d.h)];
    ++hist.w[bin(lab.box3d.w)];
    ++hist.l[bin(lab.box3d.l)];
  }
  return hist;
}

}  // namespace domaingap
