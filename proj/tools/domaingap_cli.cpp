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

// domaingap command-line tool. Machine-readable output is JSON on stdout;
// tables and progress go to stderr. Exit codes: 0 success, 1 I/O or input
// error, 2 frame alignment error.

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "domaingap/domaingap.hpp"

namespace fs = std::filesystem;
using namespace domaingap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitAlignment = 2;

class IoError : public Error {
 public:
  using Error::Error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

std::vector<std::byte> read_bytes(const fs::path& path) {
  const std::string s = read_text(path);
  std::vector<std::byte> out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

void write_text(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("error writing " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<std::byte>& data) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(data.data()),
                                    data.size()));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Regular files with `ext` in `dir`, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path());
    }
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

// Refuses outputs that coincide with or live inside an input directory.
void check_distinct(const fs::path& input, const fs::path& output) {
  const auto in = fs::weakly_canonical(input);
  const auto out = fs::weakly_canonical(output);
  auto it_in = in.begin();
  auto it_out = out.begin();
  for (; it_in != in.end() && it_out != out.end(); ++it_in, ++it_out) {
    if (*it_in != *it_out) return;
  }
  if (it_in == in.end()) {
    throw InvalidArgument("output " + output.string() +
                          " must not be inside input " + input.string());
  }
}

// A KITTI root (with label_2/) or a bare directory of label files.
fs::path label_dir(const fs::path& root) {
  return fs::is_directory(root / "label_2") ? root / "label_2" : root;
}

std::map<std::string, std::vector<ObjectLabel>> load_labels(
    const fs::path& dir) {
  std::map<std::string, std::vector<ObjectLabel>> out;
  for (const auto& path : list_files(label_dir(dir), ".txt")) {
    try {
      out[path.stem().string()] = parse_label_file(read_text(path));
    } catch (const ParseError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_labels(const fs::path& dir,
                  const std::map<std::string, std::vector<ObjectLabel>>& all) {
  ensure_dir(dir);
  for (const auto& [id, labels] : all) {
    write_text(dir / (id + ".txt"), write_label_file(labels));
  }
}

Calibration load_calibration(const fs::path& path) {
  try {
    return parse_calibration(read_text(path));
  } catch (const ParseError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Full frames (labels, calibration, point cloud) from a KITTI root.
std::vector<FrameBundle> load_dataset(const fs::path& root, int workers) {
  const auto labels = load_labels(root);
  std::vector<std::string> ids;
  for (const auto& [id, _] : labels) ids.push_back(id);
  return parallel_map(ids.size(), workers, [&](std::size_t i) {
    FrameBundle f;
    f.frame_id = ids[i];
    f.labels = labels.at(ids[i]);
    f.calib = load_calibration(root / "calib" / (ids[i] + ".txt"));
    const auto bin = root / "velodyne" / (ids[i] + ".bin");
    try {
      f.cloud = read_point_cloud(read_bytes(bin));
    } catch (const ParseError& e) {
      throw IoError(bin.string() + ": " + e.what());
    }
    return f;
  });
}

void write_dataset_frame(const fs::path& root, const FrameBundle& f,
                         bool with_cloud) {
  write_text(root / "label_2" / (f.frame_id + ".txt"),
             write_label_file(f.labels));
  write_text(root / "calib" / (f.frame_id + ".txt"),
             write_calibration(f.calib));
  if (with_cloud) {
    write_bytes(root / "velodyne" / (f.frame_id + ".bin"),
                write_point_cloud(f.cloud));
  }
}

void emit_json(const json& j, const std::string& output) {
  const std::string text = j.dump(2) + "\n";
  if (!output.empty()) write_text(output, text);
  std::cout << text;
}

SizeDelta parse_delta(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("--delta must be three comma-separated numbers");
    }
  }
  if (v.size() != 3) {
    throw InvalidArgument("--delta must be three comma-separated numbers");
  }
  return {v[0], v[1], v[2]};
}

SizeStats load_stats(const std::string& spec, const std::string& category) {
  if (fs::is_regular_file(spec)) {
    try {
      json j = json::parse(read_text(spec));
      if (j.contains("size")) j = j.at("size");
      return size_stats_from_json(j);
    } catch (const json::exception& e) {
      throw IoError(spec + ": " + e.what());
    }
  }
  return category == "Pedestrian" ? pedestrian_size_preset(spec)
                                  : size_preset(spec);
}

// Delta from exactly one of: an explicit triple, or a source/target pair of
// preset names or stats files.
struct DeltaSource {
  std::string explicit_delta;
  std::string source;
  std::string target;

  void add_options(CLI::App* cmd) {
    auto* d = cmd->add_option("--delta", explicit_delta,
                              "explicit size delta dh,dw,dl (meters)");
    auto* s = cmd->add_option("--source", source,
                              "source preset name or stats JSON file");
    auto* t = cmd->add_option("--target", target,
                              "target preset name or stats JSON file");
    d->excludes(s)->excludes(t);
    s->needs(t);
    t->needs(s);
  }

  SizeDelta resolve(const std::string& category) const {
    if (!explicit_delta.empty()) return parse_delta(explicit_delta);
    if (source.empty()) {
      throw InvalidArgument("give --delta or --source and --target");
    }
    return size_delta(load_stats(target, category),
                      load_stats(source, category));
  }
};

void print_delta(const SizeDelta& d) {
  std::fprintf(stderr, "delta (h, w, l) = (%.4f, %.4f, %.4f)\n", d.dh, d.dw,
               d.dl);
}

// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::string input;
  std::string output;
  std::string dataset;
  std::string category_map;
  double max_depth = kDefaultMaxDepth;
  std::string summary;
};

CategoryMap load_category_map(const std::string& path) {
  try {
    const json j = json::parse(read_text(path));
    CategoryMap map;
    for (const auto& c : j.value("car", json::array())) {
      map.car_sources.insert(c.get<std::string>());
    }
    for (const auto& c : j.value("truck", json::array())) {
      map.truck_sources.insert(c.get<std::string>());
    }
    for (const auto& [k, v] : j.value("passthrough", json::object()).items()) {
      map.passthrough[k] = v.get<std::string>();
    }
    map.validate();
    return map;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

int cmd_convert(const ConvertArgs& a, int workers) {
  check_distinct(a.input, a.output);
  const CategoryMap map = a.category_map.empty()
                              ? category_map_preset(a.dataset)
                              : load_category_map(a.category_map);
  ConversionOptions options;
  options.max_depth = a.max_depth;

  struct Item {
    fs::path file;
    std::size_t line = 0;
    std::string text;
  };
  std::vector<Item> items;
  for (const auto& file : list_files(a.input, ".jsonl")) {
    const std::string text = read_text(file);
    detail::for_each_line(text, [&](std::size_t line, std::string_view s) {
      if (!detail::split_ws(s).empty()) items.push_back({file, line, std::string(s)});
    });
  }

  struct Outcome {
    std::optional<ConvertedFrame> frame;
    bool has_cloud = false;
    std::string error;
  };
  auto outcomes = parallel_map(items.size(), workers, [&](std::size_t i) {
    const auto& it = items[i];
    Outcome out;
    try {
      RawFrame raw = parse_intermediate_frame(json::parse(it.text));
      if (!raw.cloud && raw.velodyne_path) {
        const auto bin = it.file.parent_path() / *raw.velodyne_path;
        raw.cloud = read_point_cloud(read_bytes(bin));
      }
      out.has_cloud = raw.cloud.has_value();
      out.frame = convert_frame(raw, map, options);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  });

  const fs::path root = a.output;
  ensure_dir(root / "label_2");
  ensure_dir(root / "calib");
  ensure_dir(root / "velodyne");
  ConversionCounts total;
  json errors = json::array();
  std::map<std::string, std::size_t> seen;
  std::size_t frames = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& it = items[i];
    const std::string where =
        it.file.filename().string() + ":" + std::to_string(it.line);
    if (!outcomes[i].frame) {
      errors.push_back({{"where", where}, {"error", outcomes[i].error}});
      continue;
    }
    const auto& f = *outcomes[i].frame;
    if (seen.contains(f.bundle.frame_id)) {
      errors.push_back({{"where", where},
                        {"error", "duplicate frame id '" + f.bundle.frame_id +
                                      "'"}});
      continue;
    }
    seen[f.bundle.frame_id] = i;
    write_dataset_frame(root, f.bundle, outcomes[i].has_cloud);
    total += f.counts;
    ++frames;
  }

  json summary = to_json(total);
  summary["frames"] = frames;
  summary["errors"] = errors;
  const std::string text = summary.dump(2) + "\n";
  write_text(a.summary.empty() ? root / "summary.json" : fs::path(a.summary),
             text);
  std::cout << text;
  std::fprintf(stderr, "frames %zu  kept %zu  dropped: frustum %zu  depth %zu  "
               "category %zu  errors %zu\n",
               frames, total.kept, total.dropped_frustum, total.dropped_depth,
               total.dropped_category, errors.size());
  for (const auto& e : errors) {
    std::fprintf(stderr, "  %s: %s\n", e["where"].get<std::string>().c_str(),
                 e["error"].get<std::string>().c_str());
  }
  return errors.empty() ? kExitOk : kExitIo;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string det;
  std::string category = "Car";
  double iou = 0.7;
  std::string mode = "new";
  int interp = 40;
  std::string truncation = "continuous";
  bool strict = false;
  bool sweep = false;
  double sweep_step = 0.05;
  std::string output;
};

int cmd_eval(const EvalArgs& a, int workers) {
  EvalConfig config;
  config.spec = a.mode == "old" ? DifficultySpec::old_pixel()
                                : DifficultySpec::new_depth();
  config.spec.truncation_gate = a.truncation == "discretized"
                                    ? TruncationGate::kDiscretized
                                    : TruncationGate::kContinuous;
  config.match.category = a.category;
  config.match.strict = a.strict;
  config.iou_threshold = a.iou;
  config.interpolation_points = a.interp;
  config.workers = workers;

  const auto frames = align_frames(load_labels(a.gt), load_labels(a.det));
  const auto report = evaluate(frames, config);
  json out = to_json(report);
  if (a.sweep) {
    const auto grid = threshold_grid(a.sweep_step);
    out["sweep"] = to_json(iou_threshold_sweep(frames, config, grid));
  }

  std::fprintf(stderr, "%-10s %-4s %8s %8s\n", "setting", "task", "AP", "num_gt");
  for (const auto& e : report.entries) {
    std::fprintf(stderr, "%-10s %-4s %8.4f %8zu\n", e.setting.c_str(),
                 to_string(e.task), e.ap, e.num_gt);
  }
  emit_json(out, a.output);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string input;
  std::string category = "Car";
  double bin_width = 0.1;
  double max_depth = kDefaultMaxDepth;
  std::string output;
};

int cmd_stats(const StatsArgs& a, int workers) {
  const fs::path root = a.input;
  std::map<std::string, std::vector<ObjectLabel>> by_frame = load_labels(root);
  std::vector<ObjectLabel> all;
  for (const auto& [_, labels] : by_frame) {
    all.insert(all.end(), labels.begin(), labels.end());
  }
  const auto stats = compute_size_stats(all, a.category);
  json out;
  out["size"] = to_json(stats);
  out["histogram"] = to_json(size_histograms(all, a.category, a.bin_width));
  if (fs::is_directory(root / "velodyne") && fs::is_directory(root / "calib")) {
    const auto frames = load_dataset(root, workers);
    out["points"] = to_json(point_count_stats(frames, a.category, a.max_depth));
  }
  std::fprintf(stderr, "%s: n=%zu  mean h %.4f w %.4f l %.4f  std h %.4f w %.4f "
               "l %.4f\n",
               stats.category.c_str(), stats.count, stats.mean.h, stats.mean.w,
               stats.mean.l, stats.std.h, stats.std.w, stats.std.l);
  emit_json(out, a.output);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SnArgs {
  std::string input;
  std::string output;
  std::string category = "Car";
  DeltaSource delta;
};

int cmd_sn(const SnArgs& a, int workers) {
  check_distinct(a.input, a.output);
  const SizeDelta delta = a.delta.resolve(a.category);
  print_delta(delta);
  const auto frames = load_dataset(a.input, workers);
  const auto out = parallel_map(frames.size(), workers, [&](std::size_t i) {
    return statistical_normalize_frame(frames[i], delta, a.category);
  });
  const fs::path root = a.output;
  ensure_dir(root / "label_2");
  ensure_dir(root / "calib");
  ensure_dir(root / "velodyne");
  for (std::size_t i = 0; i < out.size(); ++i) {
    write_text(root / "label_2" / (out[i].frame_id + ".txt"),
               write_label_file(out[i].labels));
    fs::copy_file(fs::path(a.input) / "calib" / (out[i].frame_id + ".txt"),
                  root / "calib" / (out[i].frame_id + ".txt"),
                  fs::copy_options::overwrite_existing);
    write_bytes(root / "velodyne" / (out[i].frame_id + ".bin"),
                write_point_cloud(out[i].cloud));
  }
  json summary = {{"frames", out.size()},
                  {"category", a.category},
                  {"delta", to_json(delta)}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OtArgs {
  std::string input;
  std::string output;
  std::string category = "Car";
  double scale = 1.0;
  DeltaSource delta;
};

int cmd_ot(const OtArgs& a, int workers) {
  check_distinct(a.input, a.output);
  const SizeDelta delta = a.delta.resolve(a.category);
  print_delta(delta);
  const auto dets = load_labels(a.input);
  std::vector<std::string> ids;
  for (const auto& [id, _] : dets) ids.push_back(id);
  const auto moved = parallel_map(ids.size(), workers, [&](std::size_t i) {
    return output_transform(dets.at(ids[i]), delta, a.category, a.scale);
  });
  std::map<std::string, std::vector<ObjectLabel>> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = moved[i];
  write_labels(a.output, out);
  json summary = {{"frames", ids.size()},
                  {"category", a.category},
                  {"scale", a.scale},
                  {"delta", to_json(delta)}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GtSizeArgs {
  std::string gt;
  std::string det;
  std::string output;
  std::string category = "Car";
  double min_iou = kGtSizeMinIou;
};

int cmd_gt_size(const GtSizeArgs& a, int workers) {
  check_distinct(a.det, a.output);
  check_distinct(a.gt, a.output);
  const auto frames = align_frames(load_labels(a.gt), load_labels(a.det));
  const auto resized = parallel_map(frames.size(), workers, [&](std::size_t i) {
    return assign_gt_sizes(frames[i].gts, frames[i].dets, a.min_iou, a.category);
  });
  std::map<std::string, std::vector<ObjectLabel>> out;
  std::size_t changed = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t d = 0; d < resized[i].size(); ++d) {
      if (!(resized[i][d] == frames[i].dets[d])) ++changed;
    }
    out[frames[i].frame_id] = resized[i];
  }
  write_labels(a.output, out);
  json summary = {{"frames", frames.size()},
                  {"category", a.category},
                  {"min_iou", a.min_iou},
                  {"resized", changed}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

DomainProfile load_profile(const std::string& spec) {
  if (fs::is_regular_file(spec)) {
    try {
      return profile_from_json(json::parse(read_text(spec)));
    } catch (const json::exception& e) {
      throw IoError(spec + ": " + e.what());
    }
  }
  return profile_preset(spec);
}

struct SynthArgs {
  std::string source;
  std::string target;
  std::size_t scenes = 200;
  std::uint64_t seed = 0;
  double sweep_step = 0.05;
  std::string output;
  std::string csv;
};

int cmd_synth(const SynthArgs& a, int workers) {
  ExperimentConfig config;
  config.n_scenes = a.scenes;
  config.seed = a.seed;
  config.workers = workers;
  config.sweep_thresholds = threshold_grid(a.sweep_step);
  const auto report = run_adaptation_experiment(load_profile(a.source),
                                                load_profile(a.target), config);
  std::fprintf(stderr, "%s -> %s, %zu scenes, seed %llu\n",
               report.source.c_str(), report.target.c_str(), report.n_scenes,
               static_cast<unsigned long long>(report.seed));
  std::fprintf(stderr, "AP3D@0.7 moderate: direct %.4f  ot %.4f  gt-size %.4f  "
               "matched %.4f\n",
               report.ap_direct, report.ap_ot, report.ap_gt_size,
               report.ap_matched);
  if (!a.csv.empty()) write_text(a.csv, sweep_csv(report));
  emit_json(to_json(report), a.output);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string profile;
  std::size_t scenes = 10;
  std::uint64_t seed = 0;
  std::string output;
  std::string detector;
  std::string det_output;
};

int cmd_generate(const GenerateArgs& a, int workers) {
  const DomainProfile profile = load_profile(a.profile);
  const fs::path root = a.output;
  const auto frames = parallel_map(a.scenes, workers, [&](std::size_t i) {
    char id[16];
    std::snprintf(id, sizeof(id), "%06zu", i);
    return generate_scene(profile, derive_seed(a.seed, "scene", {i}), id);
  });
  ensure_dir(root / "label_2");
  ensure_dir(root / "calib");
  ensure_dir(root / "velodyne");
  for (const auto& f : frames) write_dataset_frame(root, f, true);

  std::size_t det_count = 0;
  if (!a.detector.empty()) {
    if (a.det_output.empty()) {
      throw InvalidArgument("--detector needs --det-output");
    }
    BiasedDetectorConfig det;
    det.trained_on = load_profile(a.detector);
    const auto dets = parallel_map(frames.size(), workers, [&](std::size_t i) {
      return simulate_detector(frames[i], det,
                               derive_seed(a.seed, "detector", {i}));
    });
    std::map<std::string, std::vector<ObjectLabel>> out;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      out[frames[i].frame_id] = dets[i];
      det_count += dets[i].size();
    }
    write_labels(a.det_output, out);
  }
  std::size_t labels = 0;
  for (const auto& f : frames) labels += f.labels.size();
  json summary = {{"frames", frames.size()},
                  {"labels", labels},
                  {"detections", det_count},
                  {"profile", to_json(profile)},
                  {"seed", a.seed}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-dataset 3D car detection toolkit: KITTI conversion, "
               "evaluation and size adaptation."};
  app.require_subcommand(1);
  int workers = default_worker_count();
  auto add_workers = [&](CLI::App* cmd) {
    cmd->add_option("--workers", workers,
                    std::string("worker threads (default from ") +
                        kWorkersEnvVar + " or the CPU count)")
        ->check(CLI::PositiveNumber);
  };

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert",
                               "convert intermediate .jsonl frames to KITTI");
  c->add_option("--input", convert.input, "directory of .jsonl files")
      ->required();
  c->add_option("--output", convert.output, "output KITTI root")->required();
  auto* ds = c->add_option("--dataset", convert.dataset,
                           "category preset: argoverse, nuscenes, lyft, "
                           "waymo, kitti");
  auto* cm = c->add_option("--category-map", convert.category_map,
                           "category map JSON {car, truck, passthrough}");
  ds->excludes(cm);
  c->add_option("--max-depth", convert.max_depth, "drop boxes beyond (m)");
  c->add_option("--summary", convert.summary,
                "summary path (default OUTPUT/summary.json)");
  add_workers(c);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "KITTI-style AP evaluation");
  e->add_option("--gt", eval.gt, "ground-truth label dir or KITTI root")
      ->required();
  e->add_option("--det", eval.det, "detection label dir")->required();
  e->add_option("--category", eval.category);
  e->add_option("--iou", eval.iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  e->add_option("--mode", eval.mode, "difficulty: new (depth) or old (pixel)")
      ->check(CLI::IsMember({"new", "old"}));
  e->add_option("--interp", eval.interp, "recall points")
      ->check(CLI::IsMember({11, 40}));
  e->add_option("--truncation", eval.truncation)
      ->check(CLI::IsMember({"continuous", "discretized"}));
  e->add_flag("--strict", eval.strict,
              "out-of-setting ground truth does not rescue detections");
  e->add_flag("--sweep", eval.sweep, "add an IoU threshold sweep");
  e->add_option("--sweep-step", eval.sweep_step)
      ->check(CLI::Range(0.001, 1.0));
  e->add_option("--output", eval.output, "also write the report here");
  add_workers(e);

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "size and point statistics");
  s->add_option("--input", stats.input, "KITTI root or label dir")->required();
  s->add_option("--category", stats.category);
  s->add_option("--bin-width", stats.bin_width)->check(CLI::PositiveNumber);
  s->add_option("--max-depth", stats.max_depth);
  s->add_option("--output", stats.output);
  add_workers(s);

  SnArgs sn;
  auto* n = app.add_subcommand("sn", "statistical normalization of a dataset");
  n->add_option("--input", sn.input, "KITTI root")->required();
  n->add_option("--output", sn.output, "output KITTI root")->required();
  n->add_option("--category", sn.category);
  sn.delta.add_options(n);
  add_workers(n);

  OtArgs ot;
  auto* o = app.add_subcommand("ot", "output transformation of detections");
  o->add_option("--input", ot.input, "detection label dir")->required();
  o->add_option("--output", ot.output)->required();
  o->add_option("--category", ot.category);
  o->add_option("--scale", ot.scale, "multiplier on delta");
  ot.delta.add_options(o);
  add_workers(o);

  GtSizeArgs gs;
  auto* g = app.add_subcommand("gt-size",
                               "replace detection sizes with matched GT sizes");
  g->add_option("--gt", gs.gt)->required();
  g->add_option("--det", gs.det)->required();
  g->add_option("--output", gs.output)->required();
  g->add_option("--category", gs.category);
  g->add_option("--min-iou", gs.min_iou);
  add_workers(g);

  SynthArgs synth;
  auto* y = app.add_subcommand("synth", "synthetic size-adaptation experiment");
  y->alias("synth-experiment");
  y->add_option("--source", synth.source, "preset name or profile JSON")
      ->required();
  y->add_option("--target", synth.target, "preset name or profile JSON")
      ->required();
  y->add_option("--scenes", synth.scenes)->check(CLI::PositiveNumber);
  y->add_option("--seed", synth.seed)->required();
  y->add_option("--sweep-step", synth.sweep_step)
      ->check(CLI::Range(0.001, 1.0));
  y->add_option("--output", synth.output, "also write the report here");
  y->add_option("--csv", synth.csv, "write the sweep as CSV");
  add_workers(y);

  GenerateArgs gen;
  auto* gn = app.add_subcommand("generate", "write a synthetic KITTI dataset");
  gn->add_option("--profile", gen.profile, "preset name or profile JSON")
      ->required();
  gn->add_option("--scenes", gen.scenes)->check(CLI::PositiveNumber);
  gn->add_option("--seed", gen.seed)->required();
  gn->add_option("--output", gen.output, "output KITTI root")->required();
  gn->add_option("--detector", gen.detector,
                 "also simulate a detector trained on this profile");
  gn->add_option("--det-output", gen.det_output, "detection label dir");
  add_workers(gn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitIo;
  }

  try {
    if (*c) {
      if (convert.dataset.empty() && convert.category_map.empty()) {
        throw InvalidArgument("convert needs --dataset or --category-map");
      }
      return cmd_convert(convert, workers);
    }
    if (*e) return cmd_eval(eval, workers);
    if (*s) return cmd_stats(stats, workers);
    if (*n) return cmd_sn(sn, workers);
    if (*o) return cmd_ot(ot, workers);
    if (*g) return cmd_gt_size(gs, workers);
    if (*y) return cmd_synth(synth, workers);
    if (*gn) return cmd_generate(gen, workers);
  } catch (const AlignmentError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitAlignment;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
