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
/// KITTI-style 3D detection evaluation with two difficulty definitions:
/// the original 2D-box-height rule and a camera-independent depth rule.
///
/// Matching is greedy: detections in descending score (ties keep input
/// order) take the unmatched in-scope ground truth with the largest IoU
/// (ties go to the lowest index) when that IoU reaches the threshold and is
/// positive. Detections that instead overlap an ignorable ground truth
/// (DontCare, or an object of the evaluated class outside the current
/// difficulty/range) are dropped from precision entirely. Ground truth of
/// other classes, trucks included, never rescues a detection.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "domaingap/conversion.hpp"
#include "domaingap/error.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/kitti_io.hpp"
#include "domaingap/parallel.hpp"

namespace domaingap {

enum class Difficulty { kEasy = 0, kModerate = 1, kHard = 2 };

inline constexpr std::array<Difficulty, 3> kAllDifficulties = {
    Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard};

inline const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return "easy";
    case Difficulty::kModerate:
      return "moderate";
    case Difficulty::kHard:
      return "hard";
  }
  return "?";
}

enum class DifficultyMode { kOldPixel, kNewDepth };

// How truncation is gated: KITTI's continuous thresholds, or quartile levels
// compared against the occlusion level limit.
enum class TruncationGate { kContinuous, kDiscretized };

struct DifficultySpec {
  DifficultyMode mode = DifficultyMode::kNewDepth;
  TruncationGate truncation_gate = TruncationGate::kContinuous;
  std::array<double, 3> min_height_px = {40.0, 25.0, 25.0};
  std::array<double, 3> max_depth_m = {30.0, 70.0, 70.0};
  std::array<int, 3> max_occlusion = {0, 1, 2};
  std::array<double, 3> max_truncation = {0.15, 0.30, 0.50};

  static DifficultySpec old_pixel() {
    DifficultySpec s;
    s.mode = DifficultyMode::kOldPixel;
    return s;
  }
  static DifficultySpec new_depth() { return {}; }

  void validate() const {
    for (int i = 0; i + 1 < 3; ++i) {
      if (min_height_px[i] < min_height_px[i + 1] ||
          max_depth_m[i] > max_depth_m[i + 1] ||
          max_occlusion[i] > max_occlusion[i + 1] ||
          max_truncation[i] > max_truncation[i + 1]) {
        throw InvalidArgument(
            "difficulty thresholds must loosen from easy to hard");
      }
    }
  }
};

/// Difficulty membership; nested so that easy implies moderate implies hard.
struct DifficultySet {
  std::array<bool, 3> member{};

  bool contains(Difficulty d) const {
    return member[static_cast<std::size_t>(d)];
  }
  bool empty() const { return !member[0] && !member[1] && !member[2]; }

  friend bool operator==(const DifficultySet&, const DifficultySet&) = default;
};

inline DifficultySet assign_difficulty(const ObjectLabel& label,
                                       const DifficultySpec& spec) {
  DifficultySet set;
  for (std::size_t i = 0; i < 3; ++i) {
    bool ok = label.occlusion <= spec.max_occlusion[i];
    if (spec.truncation_gate == TruncationGate::kContinuous) {
      ok = ok && label.truncation <= spec.max_truncation[i];
    } else {
      ok = ok && occlusion_level(label.truncation) <= spec.max_occlusion[i];
    }
    if (spec.mode == DifficultyMode::kOldPixel) {
      ok = ok && label.bbox2d.height() >= spec.min_height_px[i];
    } else {
      ok = ok && label.box3d.depth() <= spec.max_depth_m[i];
    }
    set.member[i] = ok;
  }
  // Nesting.
  set.member[1] = set.member[1] || set.member[0];
  set.member[2] = set.member[2] || set.member[1];
  return set;
}

/// Depth at which an object `object_height_m` tall spans `pixel_height`
/// pixels under a vertical focal length `focal_v`: D = f_v * H / h.
inline double depth_for_pixel_height(double focal_v, double object_height_m,
                                     double pixel_height) {
  if (!(focal_v > 0.0 && object_height_m > 0.0 && pixel_height > 0.0)) {
    throw InvalidArgument("focal length, height and pixel height must be > 0");
  }
  return focal_v * object_height_m / pixel_height;
}

struct DepthRange {
  double lo = 0.0;
  double hi = 0.0;

  void validate() const {
    if (!(lo >= 0.0 && lo < hi)) {
      throw InvalidArgument("depth range requires 0 <= lo < hi");
    }
  }
};

inline constexpr std::array<DepthRange, 3> kDepthRanges = {
    DepthRange{0.0, 30.0}, DepthRange{30.0, 50.0}, DepthRange{50.0, 70.0}};

struct HardGates {
  int max_occlusion = 2;
  double max_truncation = 0.50;
};

/// Half-open depth membership plus the hard-case occlusion/truncation gates.
inline bool in_depth_range(const ObjectLabel& label, const DepthRange& range,
                           const HardGates& gates = {}) {
  const double depth = label.box3d.depth();
  return depth >= range.lo && depth < range.hi &&
         label.occlusion <= gates.max_occlusion &&
         label.truncation <= gates.max_truncation;
}

/// A slice of ground truth that AP is computed over.
struct EvalSetting {
  std::string name;
  std::optional<Difficulty> difficulty;
  std::optional<DepthRange> range;

  static EvalSetting of(Difficulty d) { return {to_string(d), d, {}}; }
  static EvalSetting of(const DepthRange& r) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g-%gm", r.lo, r.hi);
    return {buf, {}, r};
  }

  bool includes(const ObjectLabel& label, const DifficultySpec& spec) const {
    if (difficulty) return assign_difficulty(label, spec).contains(*difficulty);
    if (range) return in_depth_range(label, *range);
    return true;
  }
};

inline std::vector<EvalSetting> default_settings() {
  std::vector<EvalSetting> out;
  for (auto d : kAllDifficulties) out.push_back(EvalSetting::of(d));
  for (const auto& r : kDepthRanges) out.push_back(EvalSetting::of(r));
  return out;
}

enum class Task { kBev, k3d };

inline const char* to_string(Task t) { return t == Task::kBev ? "bev" : "3d"; }

inline double task_iou(Task task, const Box3D& a, const Box3D& b) {
  return task == Task::kBev ? iou_bev(a, b) : iou_3d(a, b);
}

// ---------------------------------------------------------------------------
// Matching.

enum class GtRole { kInScope, kIgnorable, kOther };

enum class DetectionStatus { kTruePositive, kFalsePositive, kIgnored };

enum class GtStatus { kMatched, kMissed, kIgnored };

struct DetectionMatch {
  DetectionStatus status = DetectionStatus::kFalsePositive;
  int gt_index = -1;  // set for true positives
};

struct MatchResult {
  std::vector<DetectionMatch> detections;
  std::vector<GtStatus> gts;
};

struct MatchOptions {
  std::string category = "Car";
  std::set<std::string> ignore_categories = {std::string(kDontCare)};
  // Out-of-setting ground truth of the evaluated class stops rescuing
  // detections; they become false positives.
  bool strict = false;
};

inline std::vector<GtRole> classify_gts(std::span<const ObjectLabel> gts,
                                        const EvalSetting& setting,
                                        const DifficultySpec& spec,
                                        const MatchOptions& options) {
  std::vector<GtRole> roles;
  roles.reserve(gts.size());
  for (const auto& gt : gts) {
    if (gt.category == options.category) {
      if (setting.includes(gt, spec)) {
        roles.push_back(GtRole::kInScope);
      } else {
        roles.push_back(options.strict ? GtRole::kOther : GtRole::kIgnorable);
      }
    } else if (options.ignore_categories.contains(gt.category) &&
               is_valid(gt.box3d)) {
      roles.push_back(GtRole::kIgnorable);
    } else {
      roles.push_back(GtRole::kOther);
    }
  }
  return roles;
}

/// Greedy matching over a precomputed IoU matrix (`iou[d * num_gt + g]`).
inline MatchResult match_with_ious(std::span<const GtRole> roles,
                                   std::span<const double> scores,
                                   std::span<const double> iou,
                                   double threshold) {
  const std::size_t num_gt = roles.size();
  const std::size_t num_det = scores.size();
  MatchResult result;
  result.detections.resize(num_det);
  result.gts.resize(num_gt, GtStatus::kIgnored);
  for (std::size_t g = 0; g < num_gt; ++g) {
    if (roles[g] == GtRole::kInScope) result.gts[g] = GtStatus::kMissed;
  }

  std::vector<std::size_t> order(num_det);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<bool> taken(num_gt, false);
  for (const std::size_t d : order) {
    const double* row = iou.data() + d * num_gt;
    int best = -1;
    double best_iou = 0.0;
    double best_ignorable = 0.0;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (roles[g] == GtRole::kInScope && !taken[g] && row[g] > best_iou) {
        best = static_cast<int>(g);
        best_iou = row[g];
      } else if (roles[g] == GtRole::kIgnorable) {
        best_ignorable = std::max(best_ignorable, row[g]);
      }
    }
    auto& m = result.detections[d];
    if (best >= 0 && best_iou >= threshold) {
      m = {DetectionStatus::kTruePositive, best};
      taken[best] = true;
      result.gts[best] = GtStatus::kMatched;
    } else if (best_ignorable > 0.0 && best_ignorable >= threshold) {
      m = {DetectionStatus::kIgnored, -1};
    } else {
      m = {DetectionStatus::kFalsePositive, -1};
    }
  }
  return result;
}

/// Matches `dets` (all assumed to be of the evaluated class and to carry
/// scores) against `gts` with the given IoU function.
template <typename IouFn>
MatchResult match_detections(std::span<const ObjectLabel> gts,
                             std::span<const GtRole> roles,
                             std::span<const ObjectLabel> dets, IouFn&& iou_fn,
                             double threshold) {
  if (roles.size() != gts.size()) {
    throw InvalidArgument("one role per ground-truth label is required");
  }
  std::vector<double> scores;
  scores.reserve(dets.size());
  for (const auto& d : dets) scores.push_back(d.score.value_or(0.0));
  std::vector<double> iou(dets.size() * gts.size(), 0.0);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (roles[g] != GtRole::kOther) {
        iou[d * gts.size() + g] = iou_fn(dets[d].box3d, gts[g].box3d);
      }
    }
  }
  return match_with_ious(roles, scores, iou, threshold);
}

// ---------------------------------------------------------------------------
// Average precision.

struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
};

struct PrecisionRecall {
  double recall = 0.0;
  double precision = 0.0;
};

struct ApResult {
  double ap = 0.0;
  std::vector<PrecisionRecall> samples;  // interpolated, one per recall point
};

/// Interpolated AP. With 40 points the recall samples are k/40, k = 1..40;
/// with 11 points they are k/10, k = 0..10. The interpolated precision at r
/// is the best precision at any recall >= r. Detections with equal scores
/// enter the curve together.
///
/// With no ground truth, AP is 1 when there are no detections and 0
/// otherwise.
inline ApResult average_precision(std::span<const ScoredOutcome> outcomes,
                                  std::size_t num_gt,
                                  int interpolation_points = 40) {
  if (interpolation_points != 40 && interpolation_points != 11) {
    throw InvalidArgument("interpolation must use 40 or 11 recall points");
  }
  if (num_gt == 0) return {outcomes.empty() ? 1.0 : 0.0, {}};

  std::vector<ScoredOutcome> sorted(outcomes.begin(), outcomes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });

  std::vector<PrecisionRecall> curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].true_positive ? tp : fp) += 1;
    if (i + 1 < sorted.size() && sorted[i + 1].score == sorted[i].score) {
      continue;
    }
    curve.push_back({static_cast<double>(tp) / static_cast<double>(num_gt),
                     static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  // Running max from the right gives the interpolated envelope.
  for (std::size_t i = curve.size(); i-- > 1;) {
    curve[i - 1].precision = std::max(curve[i - 1].precision, curve[i].precision);
  }

  ApResult result;
  const bool forty = interpolation_points == 40;
  const int first = forty ? 1 : 0;
  const int last = forty ? 40 : 10;
  const double denom = forty ? 40.0 : 10.0;
  double sum = 0.0;
  std::size_t cursor = 0;
  for (int k = first; k <= last; ++k) {
    const double r = static_cast<double>(k) / denom;
    while (cursor < curve.size() && curve[cursor].recall < r) ++cursor;
    const double p = cursor < curve.size() ? curve[cursor].precision : 0.0;
    result.samples.push_back({r, p});
    sum += p;
  }
  result.ap = sum / static_cast<double>(interpolation_points);
  return result;
}

// ---------------------------------------------------------------------------
// Dataset-level evaluation.

struct EvalFrame {
  std::string frame_id;
  std::vector<ObjectLabel> gts;
  std::vector<ObjectLabel> dets;
};

/// Ground-truth and detection frame ids disagree.
class AlignmentError : public Error {
 public:
  AlignmentError(std::vector<std::string> gt_only,
                 std::vector<std::string> det_only)
      : Error(describe(gt_only, det_only)),
        gt_only_(std::move(gt_only)),
        det_only_(std::move(det_only)) {}

  const std::vector<std::string>& gt_only() const { return gt_only_; }
  const std::vector<std::string>& det_only() const { return det_only_; }

 private:
  static std::string describe(const std::vector<std::string>& g,
                              const std::vector<std::string>& d) {
    std::string out = "frame ids do not align;";
    if (!g.empty()) {
      out += " without detections:";
      for (const auto& id : g) out += " " + id;
      out += ";";
    }
    if (!d.empty()) {
      out += " without ground truth:";
      for (const auto& id : d) out += " " + id;
    }
    return out;
  }

  std::vector<std::string> gt_only_;
  std::vector<std::string> det_only_;
};

/// Pairs frames by id, sorted by id. Throws AlignmentError listing orphans.
inline std::vector<EvalFrame> align_frames(
    std::map<std::string, std::vector<ObjectLabel>> gts,
    std::map<std::string, std::vector<ObjectLabel>> dets) {
  std::vector<std::string> gt_only;
  std::vector<std::string> det_only;
  for (const auto& [id, _] : gts) {
    if (!dets.contains(id)) gt_only.push_back(id);
  }
  for (const auto& [id, _] : dets) {
    if (!gts.contains(id)) det_only.push_back(id);
  }
  if (!gt_only.empty() || !det_only.empty()) {
    throw AlignmentError(std::move(gt_only), std::move(det_only));
  }
  std::vector<EvalFrame> frames;
  frames.reserve(gts.size());
  for (auto& [id, labels] : gts) {
    frames.push_back({id, std::move(labels), std::move(dets.at(id))});
  }
  return frames;
}

struct EvalConfig {
  DifficultySpec spec;
  MatchOptions match;
  std::vector<EvalSetting> settings = default_settings();
  std::vector<Task> tasks = {Task::kBev, Task::k3d};
  double iou_threshold = 0.7;
  int interpolation_points = 40;
  int workers = 1;
};

struct EvalEntry {
  std::string setting;
  Task task = Task::k3d;
  double iou_threshold = 0.0;
  double ap = 0.0;
  std::size_t num_gt = 0;
  std::vector<PrecisionRecall> pr;
};

struct EvalReport {
  std::string category;
  int interpolation_points = 40;
  std::vector<EvalEntry> entries;

  const EvalEntry* find(const std::string& setting, Task task) const {
    for (const auto& e : entries) {
      if (e.setting == setting && e.task == task) return &e;
    }
    return nullptr;
  }
};

namespace detail {

// Per-frame, per-task IoU matrices between class detections and all GT.
struct FrameIous {
  std::vector<double> scores;
  std::vector<std::vector<double>> per_task;  // indexed like config.tasks
};

inline std::vector<std::size_t> class_detections(const EvalFrame& frame,
                                                 const std::string& category) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < frame.dets.size(); ++i) {
    if (frame.dets[i].category == category) idx.push_back(i);
  }
  return idx;
}

inline FrameIous frame_ious(const EvalFrame& frame, const EvalConfig& config) {
  FrameIous out;
  const auto det_idx = class_detections(frame, config.match.category);
  const std::size_t ng = frame.gts.size();
  for (const auto d : det_idx) {
    out.scores.push_back(frame.dets[d].score.value_or(0.0));
  }
  for (const Task task : config.tasks) {
    std::vector<double> m(det_idx.size() * ng, 0.0);
    for (std::size_t i = 0; i < det_idx.size(); ++i) {
      for (std::size_t g = 0; g < ng; ++g) {
        const auto& gt = frame.gts[g];
        const bool relevant =
            gt.category == config.match.category ||
            (config.match.ignore_categories.contains(gt.category) &&
             is_valid(gt.box3d));
        if (relevant) {
          m[i * ng + g] = task_iou(task, frame.dets[det_idx[i]].box3d, gt.box3d);
        }
      }
    }
    out.per_task.push_back(std::move(m));
  }
  return out;
}

// Per-frame roles for every setting.
inline std::vector<std::vector<GtRole>> frame_roles(const EvalFrame& frame,
                                                    const EvalConfig& config) {
  std::vector<std::vector<GtRole>> out;
  for (const auto& s : config.settings) {
    out.push_back(classify_gts(frame.gts, s, config.spec, config.match));
  }
  return out;
}

struct Prepared {
  std::vector<FrameIous> ious;
  std::vector<std::vector<std::vector<GtRole>>> roles;
};

inline Prepared prepare(std::span<const EvalFrame> frames,
                        const EvalConfig& config) {
  Prepared p;
  p.ious = parallel_map(frames.size(), config.workers, [&](std::size_t i) {
    return frame_ious(frames[i], config);
  });
  p.roles = parallel_map(frames.size(), config.workers, [&](std::size_t i) {
    return frame_roles(frames[i], config);
  });
  return p;
}

inline EvalReport evaluate_prepared(std::span<const EvalFrame> frames,
                                    const Prepared& prep,
                                    const EvalConfig& config,
                                    double threshold) {
  EvalReport report;
  report.category = config.match.category;
  report.interpolation_points = config.interpolation_points;
  for (std::size_t s = 0; s < config.settings.size(); ++s) {
    for (std::size_t t = 0; t < config.tasks.size(); ++t) {
      // Frame results are reduced in frame order, so the outcome does not
      // depend on how frames were scheduled.
      const auto per_frame =
          parallel_map(frames.size(), config.workers, [&](std::size_t f) {
            return match_with_ious(prep.roles[f][s], prep.ious[f].scores,
                                   prep.ious[f].per_task[t], threshold);
          });
      std::vector<ScoredOutcome> outcomes;
      std::size_t num_gt = 0;
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& m = per_frame[f];
        for (std::size_t d = 0; d < m.detections.size(); ++d) {
          const auto status = m.detections[d].status;
          if (status == DetectionStatus::kIgnored) continue;
          outcomes.push_back({prep.ious[f].scores[d],
                              status == DetectionStatus::kTruePositive});
        }
        for (const auto role : prep.roles[f][s]) {
          if (role == GtRole::kInScope) ++num_gt;
        }
      }
      const auto ap =
          average_precision(outcomes, num_gt, config.interpolation_points);
      report.entries.push_back({config.settings[s].name, config.tasks[t],
                                threshold, ap.ap, num_gt, ap.samples});
    }
  }
  return report;
}

}  // namespace detail

/// AP for every (setting, task) pair at config.iou_threshold.
inline EvalReport evaluate(std::span<const EvalFrame> frames,
                           const EvalConfig& config) {
  config.spec.validate();
  const auto prep = detail::prepare(frames, config);
  return detail::evaluate_prepared(frames, prep, config, config.iou_threshold);
}

struct SweepPoint {
  double iou_threshold = 0.0;
  std::string setting;
  Task task = Task::k3d;
  double ap = 0.0;
};

/// Evaluates at each threshold; IoUs are computed once and reused.
inline std::vector<SweepPoint> iou_threshold_sweep(
    std::span<const EvalFrame> frames, const EvalConfig& config,
    std::span<const double> thresholds) {
  if (thresholds.empty()) {
    throw InvalidArgument("threshold sweep needs at least one threshold");
  }
  config.spec.validate();
  const auto prep = detail::prepare(frames, config);
  std::vector<SweepPoint> out;
  for (const double t : thresholds) {
    const auto report = detail::evaluate_prepared(frames, prep, config, t);
    for (const auto& e : report.entries) {
      out.push_back({t, e.setting, e.task, e.ap});
    }
  }
  return out;
}

/// 0.0, step, 2 * step, ... up to and including 1.0.
inline std::vector<double> threshold_grid(double step = 0.05) {
  if (!(step > 0.0)) throw InvalidArgument("step must be positive");
  std::vector<double> out;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i) {
    out.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  return out;
}

}  // namespace domaingap
