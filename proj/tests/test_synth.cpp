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

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "domaingap/json_io.hpp"
#include "domaingap/parallel.hpp"
#include "domaingap/rng.hpp"
#include "domaingap/synth.hpp"

namespace domaingap {
namespace {

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, "scene"), derive_seed(1, "detector"));
  EXPECT_NE(derive_seed(1, "scene", {0}), derive_seed(1, "scene", {1}));
  EXPECT_NE(derive_seed(1, "scene", {0}), derive_seed(2, "scene", {0}));
  EXPECT_EQ(derive_seed(5, "x", {3, 4}), derive_seed(5, "x", {3, 4}));
}

TEST(Rng, Moments) {
  Rng rng(99);
  const int n = 200000;
  double s = 0, s2 = 0, su = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(su / n, 0.5, 0.005);
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.uniform_int(4, 12);
    ASSERT_GE(k, 4);
    ASSERT_LE(k, 12);
  }
}

TEST(ParallelMap, OrderAndErrors) {
  const auto out = parallel_map(100, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  try {
    parallel_map(50, 4, [](std::size_t i) -> int {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
      return 0;
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
  EXPECT_TRUE(parallel_map(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST(Scene, DeterministicAndInFrustum) {
  const auto p = profile_preset("waymo");
  const auto a = generate_scene(p, 123);
  const auto b = generate_scene(p, 123);
  EXPECT_EQ(a, b);
  EXPECT_EQ(write_point_cloud(a.cloud), write_point_cloud(b.cloud));
  EXPECT_NE(generate_scene(p, 124), a);
  EXPECT_EQ(a.cloud.frame, Frame::kLidar);
  for (const auto& l : a.labels) {
    EXPECT_EQ(filter_frustum(l.box3d, a.calib.p2()), FrustumDecision::kKeep);
  }
  EXPECT_GE(a.labels.size(), static_cast<std::size_t>(p.min_cars));
  EXPECT_LE(a.labels.size(), static_cast<std::size_t>(p.max_cars));
}

TEST(Scene, PointsLandOnTheirCars) {
  const auto f = generate_scene(profile_preset("kitti"), 5);
  const auto cam = lidar_to_camera(f.cloud, f.calib);
  std::size_t expected = 0;
  std::size_t inside = 0;
  for (const auto& l : f.labels) {
    expected += expected_point_count(profile_preset("kitti"), l.box3d.depth());
    inside += points_in_box(cam, l.box3d).size();
  }
  EXPECT_EQ(cam.size(), expected);
  // Float storage can push surface points a hair outside their box.
  EXPECT_GE(static_cast<double>(inside), 0.95 * static_cast<double>(expected));
}

TEST(Scene, SizeMeanLawOfLargeNumbers) {
  const auto p = profile_preset("nuscenes");
  std::vector<double> h, w, l;
  for (std::uint64_t s = 0; h.size() < 10000; ++s) {
    for (const auto& lab : generate_scene(p, derive_seed(77, "lln", {s})).labels) {
      h.push_back(lab.box3d.h);
      w.push_back(lab.box3d.w);
      l.push_back(lab.box3d.l);
    }
  }
  auto check = [](const std::vector<double>& v, double mean, double sd) {
    double s = 0;
    for (double x : v) s += x;
    const double n = static_cast<double>(v.size());
    EXPECT_NEAR(s / n, mean, 3 * sd / std::sqrt(n));
  };
  check(h, p.size_mean.h, p.size_std.h);
  check(w, p.size_mean.w, p.size_std.w);
  check(l, p.size_mean.l, p.size_std.l);
}

TEST(Detector, NoiselessMatchesGroundTruth) {
  auto p = profile_preset("lyft");
  p.size_std = {0, 0, 0};
  const auto f = generate_scene(p, 9);
  BiasedDetectorConfig cfg;
  cfg.trained_on = p;
  cfg.center_noise_std = 0;
  cfg.yaw_noise_std = 0;
  cfg.miss_rate = 0;
  const auto dets = simulate_detector(f, cfg, 1);
  ASSERT_EQ(dets.size(), f.labels.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    EXPECT_EQ(dets[i].box3d, f.labels[i].box3d);
    ASSERT_TRUE(dets[i].score.has_value());
    EXPECT_GT(*dets[i].score, 0.0);
    EXPECT_LT(*dets[i].score, 1.0);
  }
  EXPECT_EQ(simulate_detector(f, cfg, 1), dets);
}

TEST(Detector, PredictsTrainingDomainSizes) {
  BiasedDetectorConfig cfg;
  cfg.trained_on = profile_preset("kitti");
  double det_l = 0, gt_l = 0;
  std::size_t nd = 0, ng = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto f = generate_scene(profile_preset("waymo"), s);
    for (const auto& d : simulate_detector(f, cfg, s)) {
      det_l += d.box3d.l;
      ++nd;
    }
    for (const auto& g : f.labels) {
      gt_l += g.box3d.l;
      ++ng;
    }
  }
  EXPECT_NEAR(det_l / nd, 3.89, 0.03);
  EXPECT_NEAR(gt_l / ng, 4.80, 0.03);
}

TEST(Experiment, SameDomainArmsAgree) {
  ExperimentConfig cfg;
  cfg.n_scenes = 30;
  cfg.seed = 3;
  cfg.sweep_thresholds = {};
  const auto r = run_adaptation_experiment(profile_preset("kitti"),
                                           profile_preset("kitti"), cfg);
  EXPECT_EQ(r.ap_direct, r.ap_matched);
  EXPECT_TRUE(r.delta.is_zero());
  EXPECT_EQ(r.ap_direct, r.ap_ot);
}

TEST(Experiment, SizeCorrectionOrdering) {
  ExperimentConfig cfg;
  cfg.n_scenes = 60;
  cfg.seed = 11;
  const auto r = run_adaptation_experiment(profile_preset("kitti"),
                                           profile_preset("waymo"), cfg);
  EXPECT_LT(r.ap_direct, r.ap_ot);
  EXPECT_LE(r.ap_ot, r.ap_gt_size);
  ASSERT_EQ(r.sweep.size(), 21u);
  EXPECT_NEAR(r.sweep[2].iou_threshold, 0.1, 1e-12);
  EXPECT_NEAR(r.sweep[2].direct, r.sweep[2].matched, 0.05);
}

TEST(Experiment, WorkerIndependent) {
  ExperimentConfig a;
  a.n_scenes = 25;
  a.seed = 7;
  a.workers = 1;
  ExperimentConfig b = a;
  b.workers = 4;
  const auto ra = run_adaptation_experiment(profile_preset("kitti"),
                                            profile_preset("waymo"), a);
  const auto rb = run_adaptation_experiment(profile_preset("kitti"),
                                            profile_preset("waymo"), b);
  EXPECT_EQ(to_json(ra).dump(), to_json(rb).dump());
}

TEST(Profiles, JsonRoundTripAndValidation) {
  const auto p = profile_preset("argoverse");
  const auto q = profile_from_json(to_json(p));
  EXPECT_EQ(q.name, p.name);
  EXPECT_EQ(q.size_mean, p.size_mean);
  EXPECT_EQ(q.size_std, p.size_std);
  EXPECT_EQ(q.min_cars, p.min_cars);
  EXPECT_THROW(profile_from_json(json{{"size_mean", {1, 2}}}), ParseError);
  EXPECT_THROW(profile_from_json(json{{"size_mean", {1, -2, 3}}}),
               InvalidArgument);
  EXPECT_THROW(profile_preset("mars"), InvalidArgument);
}

}  // namespace
}  // namespace domaingap
