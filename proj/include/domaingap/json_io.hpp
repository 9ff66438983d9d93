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
/// JSON forms of reports, statistics and profiles.

#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "domaingap/adaptation.hpp"
#include "domaingap/conversion.hpp"
#include "domaingap/error.hpp"
#include "domaingap/eval.hpp"
#include "domaingap/synth.hpp"

namespace domaingap {

using nlohmann::json;

inline json dims_json(const Dims& d) { return json::array({d.h, d.w, d.l}); }

inline Dims dims_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() ||
      !j[1].is_number() || !j[2].is_number()) {
    throw ParseError("'" + key + "' must be [h, w, l]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

/// One object per (setting, task):
/// {setting, task, iou_threshold, ap, num_gt, pr: [[recall, precision], ...]}
inline json to_json(const EvalReport& report) {
  json results = json::array();
  for (const auto& e : report.entries) {
    json pr = json::array();
    for (const auto& s : e.pr) pr.push_back({s.recall, s.precision});
    results.push_back({{"setting", e.setting},
                       {"task", to_string(e.task)},
                       {"iou_threshold", e.iou_threshold},
                       {"ap", e.ap},
                       {"num_gt", e.num_gt},
                       {"pr", std::move(pr)}});
  }
  return {{"category", report.category},
          {"interpolation_points", report.interpolation_points},
          {"results", std::move(results)}};
}

inline json to_json(const std::vector<SweepPoint>& sweep) {
  json out = json::array();
  for (const auto& p : sweep) {
    out.push_back({{"iou_threshold", p.iou_threshold},
                   {"setting", p.setting},
                   {"task", to_string(p.task)},
                   {"ap", p.ap}});
  }
  return out;
}

/// {category, mean: [h, w, l], std: [h, w, l], count}
inline json to_json(const SizeStats& s) {
  return {{"category", s.category},
          {"mean", dims_json(s.mean)},
          {"std", dims_json(s.std)},
          {"count", s.count}};
}

inline SizeStats size_stats_from_json(const json& j) {
  if (!j.is_object() || !j.contains("category") || !j.contains("mean") ||
      !j.at("category").is_string()) {
    throw ParseError("size stats need 'category' and 'mean'");
  }
  SizeStats s;
  s.category = j.at("category").get<std::string>();
  s.mean = dims_from_json(j.at("mean"), "mean");
  if (j.contains("std")) s.std = dims_from_json(j.at("std"), "std");
  s.count = j.value("count", std::size_t{1});
  return s;
}

inline json to_json(const SizeDelta& d) {
  return json::array({d.dh, d.dw, d.dl});
}

inline json to_json(const SizeHistograms& h) {
  auto bins = [&](const std::map<long, std::size_t>& m) {
    json out = json::array();
    for (const auto& [k, n] : m) {
      out.push_back({{"lo", static_cast<double>(k) * h.bin_width},
                     {"hi", static_cast<double>(k + 1) * h.bin_width},
                     {"count", n}});
    }
    return out;
  };
  return {{"bin_width", h.bin_width},
          {"h", bins(h.h)},
          {"w", bins(h.w)},
          {"l", bins(h.l)}};
}

inline json to_json(const PointCountStats& p) {
  return {{"per_car", p.per_car},
          {"per_scene", p.per_scene},
          {"cars", p.cars},
          {"scenes", p.scenes}};
}

inline json to_json(const ConversionCounts& c) {
  return {{"kept", c.kept},
          {"dropped_frustum", c.dropped_frustum},
          {"dropped_depth", c.dropped_depth},
          {"dropped_category", c.dropped_category}};
}

/// {name, size_mean, size_std, points_per_car_at_10m,
///  density_falloff_exponent, scene_car_count_range: [min, max]}
inline json to_json(const DomainProfile& p) {
  return {{"name", p.name},
          {"size_mean", dims_json(p.size_mean)},
          {"size_std", dims_json(p.size_std)},
          {"points_per_car_at_10m", p.points_per_car_at_10m},
          {"density_falloff_exponent", p.density_falloff_exponent},
          {"scene_car_count_range", json::array({p.min_cars, p.max_cars})}};
}

inline DomainProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("profile must be a JSON object");
  DomainProfile p;
  try {
    p.name = j.value("name", std::string("custom"));
    p.size_mean = dims_from_json(j.at("size_mean"), "size_mean");
    p.size_std = j.contains("size_std")
                     ? dims_from_json(j.at("size_std"), "size_std")
                     : kPresetSizeStd;
    p.points_per_car_at_10m =
        j.value("points_per_car_at_10m", p.points_per_car_at_10m);
    p.density_falloff_exponent =
        j.value("density_falloff_exponent", p.density_falloff_exponent);
    if (j.contains("scene_car_count_range")) {
      const auto& r = j.at("scene_car_count_range");
      if (!r.is_array() || r.size() != 2) {
        throw ParseError("'scene_car_count_range' must be [min, max]");
      }
      p.min_cars = r[0].get<int>();
      p.max_cars = r[1].get<int>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad profile: ") + e.what());
  }
  p.validate();
  return p;
}

inline json to_json(const ExperimentReport& r) {
  json sweep = json::array();
  for (const auto& row : r.sweep) {
    sweep.push_back({{"iou_threshold", row.iou_threshold},
                     {"direct", row.direct},
                     {"matched", row.matched}});
  }
  return {{"source", r.source},
          {"target", r.target},
          {"n_scenes", r.n_scenes},
          {"seed", r.seed},
          {"delta", to_json(r.delta)},
          {"ap_direct", r.ap_direct},
          {"ap_ot", r.ap_ot},
          {"ap_gt_size", r.ap_gt_size},
          {"ap_matched", r.ap_matched},
          {"sweep", std::move(sweep)}};
}

inline std::string sweep_csv(const ExperimentReport& r) {
  std::string out = "iou_threshold,direct,matched\n";
  char buf[128];
  for (const auto& row : r.sweep) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.10g,%.10g\n", row.iou_threshold,
                  row.direct, row.matched);
    out += buf;
  }
  return out;
}

}  // namespace domaingap
