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

#include <json.hpp>

#include "cli_runner.hpp"
#include <fstream>

namespace domaingap {
namespace {

using nlohmann::json;
using testing::CliResult;
using testing::fixture;
using testing::run_cli;
using testing::ScratchDir;
using testing::slurp;
using testing::tree_bytes;

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

TEST(CliConvert, EmptyInput) {
  ScratchDir dir("convert_empty");
  std::filesystem::create_directories(dir / "in");
  const auto r = run_cli("convert --dataset argoverse --input " + q(dir / "in") +
                             " --output " + q(dir / "out"),
                         dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["kept"], 0);
  EXPECT_EQ(j["dropped_frustum"], 0);
  EXPECT_EQ(j["dropped_depth"], 0);
  EXPECT_EQ(j["dropped_category"], 0);
  EXPECT_EQ(j["frames"], 0);
}

TEST(CliConvert, MatchesGoldenAndIsIdempotent) {
  ScratchDir dir("convert_golden");
  const std::string args = "convert --dataset argoverse --input " +
                           q(fixture("raw")) + " --output " + q(dir / "out");
  const auto r = run_cli(args, dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["kept"], 7);
  EXPECT_EQ(j["dropped_frustum"], 2);
  EXPECT_EQ(j["dropped_depth"], 1);
  EXPECT_EQ(j["dropped_category"], 1);
  EXPECT_EQ(tree_bytes(dir / "out/label_2"),
            tree_bytes(fixture("golden/label_2")));
  EXPECT_TRUE(std::filesystem::exists(dir / "out/velodyne/000001.bin"));
  EXPECT_EQ(slurp(dir / "out/velodyne/000002.bin"),
            slurp(fixture("raw/000002.bin")));
  EXPECT_FALSE(std::filesystem::exists(dir / "out/velodyne/000003.bin"));

  const auto first = tree_bytes(dir / "out");
  ASSERT_EQ(run_cli(args, dir.path()).exit_code, 0);
  EXPECT_EQ(tree_bytes(dir / "out"), first);
}

TEST(CliConvert, BadFrameIsReported) {
  ScratchDir dir("convert_bad");
  std::filesystem::create_directories(dir / "in");
  {
    std::ofstream f(dir / "in/a.jsonl");
    f << slurp(fixture("raw/frames.jsonl")) << "{\"frame_id\": \"zz\"}\n";
  }
  std::filesystem::copy_file(fixture("raw/000002.bin"), dir / "in/000002.bin");
  const auto r = run_cli("convert --dataset argoverse --input " + q(dir / "in") +
                             " --output " + q(dir / "out"),
                         dir.path());
  EXPECT_EQ(r.exit_code, 1);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["frames"], 3);
  ASSERT_EQ(j["errors"].size(), 1u);
  EXPECT_EQ(j["errors"][0]["where"], "a.jsonl:4");
}

TEST(CliConvert, NeedsCategorySource) {
  ScratchDir dir("convert_nomap");
  const auto r = run_cli("convert --input " + q(fixture("raw")) + " --output " +
                             q(dir / "out"),
                         dir.path());
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliEval, PerfectDetections) {
  ScratchDir dir("eval_perfect");
  const auto r = run_cli("eval --gt " + q(fixture("eval/gt")) + " --det " +
                             q(fixture("eval/det_perfect")),
                         dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["results"].size(), 12u);
  for (const auto& e : j["results"]) EXPECT_EQ(e["ap"], 1.0) << e.dump();
}

TEST(CliEval, HandComputedFixture) {
  ScratchDir dir("eval_mixed");
  const auto r = run_cli("eval --gt " + q(fixture("eval/gt")) + " --det " +
                             q(fixture("eval/det_mixed")) + " --sweep",
                         dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  std::map<std::string, double> ap3d;
  for (const auto& e : j["results"]) {
    if (e["task"] == "3d") ap3d[e["setting"]] = e["ap"];
  }
  // FP at 0.9 then TP at 0.8: precision 1/2 up to recall 1/num_gt.
  EXPECT_DOUBLE_EQ(ap3d["moderate"], 13 * 0.5 / 40);
  EXPECT_DOUBLE_EQ(ap3d["easy"], 20 * 0.5 / 40);
  EXPECT_EQ(j["sweep"].size(), 21u * 12u);
}

TEST(CliEval, ExitCodes) {
  ScratchDir dir("eval_codes");
  auto r = run_cli("eval --gt " + q(fixture("eval/gt")) + " --det " +
                       q(fixture("eval/det_orphan")),
                   dir.path());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("000002"), std::string::npos);
  EXPECT_NE(r.err.find("000009"), std::string::npos);
  r = run_cli("eval --gt " + q(dir / "missing") + " --det " +
                  q(fixture("eval/det_mixed")),
              dir.path());
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliStats, HandComputedMean) {
  ScratchDir dir("stats");
  const auto r = run_cli("stats --input " + q(fixture("stats")), dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["size"]["mean"][0].get<double>(), 1.5, 1e-12);
  EXPECT_NEAR(j["size"]["mean"][1].get<double>(), 1.6, 1e-12);
  EXPECT_NEAR(j["size"]["mean"][2].get<double>(), 3.9, 1e-12);
  EXPECT_EQ(j["size"]["count"], 2);
}

TEST(CliOt, ZeroDeltaIsByteIdentical) {
  ScratchDir dir("ot_zero");
  const auto r = run_cli("ot --delta 0,0,0 --input " +
                             q(fixture("eval/det_perfect")) + " --output " +
                             q(dir / "out"),
                         dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(tree_bytes(dir / "out"), tree_bytes(fixture("eval/det_perfect")));
}

TEST(CliOt, PresetDeltaAndGuards) {
  ScratchDir dir("ot_guards");
  auto r = run_cli("ot --source kitti --target waymo --input " +
                       q(fixture("eval/det_mixed")) + " --output " +
                       q(dir / "out"),
                   dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["delta"][2].get<double>(), 0.91, 1e-12);
  EXPECT_NE(slurp(dir / "out/000001.txt").find(" 4.91 "), std::string::npos);

  r = run_cli("ot --delta 0,0,0 --source kitti --target waymo --input " +
                  q(fixture("eval/det_mixed")) + " --output " + q(dir / "o2"),
              dir.path());
  EXPECT_NE(r.exit_code, 0);
  r = run_cli("ot --delta 0,0,0 --input " + q(dir / "out") + " --output " +
                  q(dir / "out"),
              dir.path());
  EXPECT_EQ(r.exit_code, 1);
  r = run_cli("ot --delta 0,0 --input " + q(dir / "out") + " --output " +
                  q(dir / "o3"),
              dir.path());
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliGenerateSn, ZeroDeltaKeepsDataset) {
  ScratchDir dir("sn_zero");
  auto r = run_cli("generate --profile kitti --scenes 4 --seed 3 --output " +
                       q(dir / "ds"),
                   dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run_cli("sn --delta 0,0,0 --input " + q(dir / "ds") + " --output " +
                  q(dir / "sn"),
              dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(tree_bytes(dir / "sn"), tree_bytes(dir / "ds"));

  r = run_cli("sn --source kitti --target waymo --input " + q(dir / "ds") +
                  " --output " + q(dir / "sn2"),
              dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run_cli("stats --input " + q(dir / "sn2"), dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).contains("points"));

  r = run_cli("sn --delta 0,0,0 --input " + q(dir / "ds") + " --output " +
                  q(dir / "ds/nested"),
              dir.path());
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliGtSize, ResizesMatchedDetections) {
  ScratchDir dir("gt_size");
  auto r = run_cli("generate --profile waymo --scenes 3 --seed 5 --output " +
                       q(dir / "ds") + " --detector kitti --det-output " +
                       q(dir / "det"),
                   dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run_cli("gt-size --gt " + q(dir / "ds") + " --det " + q(dir / "det") +
                  " --output " + q(dir / "fixed"),
              dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_GT(json::parse(r.out)["resized"].get<int>(), 0);
}

TEST(CliSynth, ReproducesCommittedReport) {
  ScratchDir dir("synth");
  const auto r = run_cli(
      "synth --source kitti --target waymo --seed 7 --scenes 20", dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fixture("synth_kitti_waymo_seed7.json")));
  EXPECT_NE(run_cli("synth --source kitti --target waymo", dir.path()).exit_code,
            0);
}

}  // namespace
}  // namespace domaingap
