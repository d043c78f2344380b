// Copyright 2026 The cellbox Authors
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

#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellbox/cellbox.hpp"

namespace {

using cellbox::ContractError;
using nlohmann::json;

/// Command-line misuse distinct from bad input data; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// config file support: flags override config values override defaults

struct ConfigEntry {
  std::string section;  // subcommand name; empty for global options
  std::string name;     // long option name without dashes
  CLI::Option* option;
  std::function<void(const json&)> apply;
};

struct ConfigBinder {
  std::vector<ConfigEntry> entries;

  template <typename T>
  void bind(const std::string& section, const std::string& name, CLI::Option* option,
            T& target) {
    entries.push_back({section, name, option, [&target, name](const json& v) {
                         try {
                           if constexpr (std::is_same_v<T, std::optional<double>>) {
                             target = v.get<double>();
                           } else {
                             target = v.get<T>();
                           }
                         } catch (const json::exception&) {
                           throw ContractError("config: field '" + name +
                                               "' has the wrong type");
                         }
                       }});
  }

  // top-level keys configure global options; per-subcommand objects
  // configure that subcommand's options
  void apply(const json& doc) const {
    for (const ConfigEntry& e : entries) {
      if (e.option != nullptr && e.option->count() > 0) continue;  // flag wins
      const json* value = nullptr;
      if (e.section.empty()) {
        if (doc.contains(e.name) && !doc[e.name].is_object()) value = &doc[e.name];
      } else if (doc.contains(e.section) && doc[e.section].is_object() &&
                 doc[e.section].contains(e.name)) {
        value = &doc[e.section][e.name];
      }
      if (value != nullptr) e.apply(*value);
    }
  }
};

// ---------------------------------------------------------------------------
// shared option groups

struct JitterFlags {
  std::vector<double> deterministic;  // 2 values
  std::optional<double> gaussian;
  std::vector<double> uniform;  // 2 values
  std::string samples_path;

  void add_options(CLI::App* sub, ConfigBinder& binder, bool with_samples_file) {
    const std::string section = sub->get_name();
    binder.bind(section, "deterministic",
                sub->add_option("--deterministic", deterministic,
                                "Fixed offset magnitudes DX DY")
                    ->expected(2),
                deterministic);
    binder.bind(section, "gaussian",
                sub->add_option("--gaussian", gaussian,
                                "Isotropic gaussian jitter with this sigma"),
                gaussian);
    binder.bind(section, "uniform",
                sub->add_option("--uniform", uniform,
                                "Offset magnitude uniform in [LO, HI], random direction")
                    ->expected(2),
                uniform);
    if (with_samples_file) {
      binder.bind(section, "jitter",
                  sub->add_option("--jitter", samples_path,
                                  "Empirical jitter samples file (NDJSON from 'match')"),
                  samples_path);
    }
  }

  int specified() const {
    return static_cast<int>(deterministic.size() == 2) +
           static_cast<int>(gaussian.has_value()) +
           static_cast<int>(uniform.size() == 2) +
           static_cast<int>(!samples_path.empty());
  }

  cellbox::JitterModel resolve() const {
    if (specified() > 1) {
      throw UsageError("specify at most one of --deterministic/--gaussian/--uniform/--jitter");
    }
    if (deterministic.size() == 2) {
      return cellbox::DeterministicJitter{deterministic[0], deterministic[1]};
    }
    if (gaussian.has_value()) return cellbox::GaussianJitter{*gaussian};
    if (uniform.size() == 2) return cellbox::UniformRadialJitter{uniform[0], uniform[1]};
    if (!samples_path.empty()) {
      const auto records = cellbox::load_jitter_samples(samples_path);
      cellbox::detail::require(!records.empty(),
                               samples_path + ": no jitter samples in file");
      return cellbox::to_empirical(records);
    }
    return cellbox::DeterministicJitter{0.0, 0.0};
  }
};

// ---------------------------------------------------------------------------
// small shared helpers

void check_image_ids(const cellbox::GtDataset& gt, std::span<const cellbox::Detection> dets,
                     const std::string& dets_name) {
  std::set<std::int64_t> ids;
  for (const cellbox::ImageInfo& img : gt.images) ids.insert(img.id);
  for (const cellbox::GroundTruth& g : gt.annotations) {
    cellbox::detail::require(ids.count(g.image_id) > 0,
                             "gt file: annotation " + std::to_string(g.id) +
                                 " references unknown image_id " +
                                 std::to_string(g.image_id));
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    cellbox::detail::require(ids.count(dets[i].image_id) > 0,
                             dets_name + ": detections[" + std::to_string(i) +
                                 "] references unknown image_id " +
                                 std::to_string(dets[i].image_id));
  }
}

std::vector<int> category_universe(const cellbox::GtDataset& gt) {
  std::vector<int> ids;
  for (const cellbox::Category& c : gt.categories) ids.push_back(c.id);
  return ids;
}

void require_path(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError("missing required option " + flag);
}

void print_report(const cellbox::EvalReport& report, bool class_agnostic) {
  std::printf("ground truth: %lld    detections: %lld    TP@0.50: %lld\n",
              static_cast<long long>(report.n_gt), static_cast<long long>(report.n_det),
              static_cast<long long>(report.n_tp_at_50));
  std::printf("mAP = %.6f\n", report.map);
  if (!std::isnan(report.ap50)) std::printf("AP@0.50 = %.6f\n", report.ap50);
  if (!std::isnan(report.ap75)) std::printf("AP@0.75 = %.6f\n", report.ap75);
  std::printf("per-threshold AP:\n");
  for (const auto& [t, ap] : report.per_threshold_ap) {
    std::printf("  %.2f  %.6f\n", t, ap);
  }
  if (!class_agnostic && !report.per_class_ap.empty()) {
    std::printf("per-class AP (mean over IoU thresholds):\n");
    for (const auto& [cls, ap] : report.per_class_ap) {
      std::printf("  %d  %.6f\n", cls, ap);
    }
  }
}

json report_to_json(const cellbox::EvalReport& report) {
  json doc{{"map", report.map},
           {"ap50", report.ap50},
           {"ap75", report.ap75},
           {"counts",
            {{"n_gt", report.n_gt},
             {"n_det", report.n_det},
             {"n_tp_at_50", report.n_tp_at_50}}}};
  doc["per_threshold_ap"] = json::array();
  for (const auto& [t, ap] : report.per_threshold_ap) {
    doc["per_threshold_ap"].push_back({t, ap});
  }
  doc["per_class_ap"] = json::object();
  for (const auto& [cls, ap] : report.per_class_ap) {
    doc["per_class_ap"][std::to_string(cls)] = ap;
  }
  return doc;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out = cellbox::detail::open_output(path);
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// subcommand state

struct SimulateCmd {
  std::string out_gt, out_dets, confusion_path;
  int images = 1;
  std::vector<double> extent{1024.0, 1024.0};
  int objects = 50;
  double min_separation = 0.0;
  std::vector<double> class_probs;
  std::uint64_t seed = 1;
  std::uint64_t noise_seed = 2;
  JitterFlags jitter;
  double miss_rate = 0.0;
  double fp_rate = 0.0;
  double tp_score_mean = 0.9, tp_score_std = 0.05;
  double fp_score_mean = 0.3, fp_score_std = 0.1;
  CLI::App* app = nullptr;
};

struct MatchCmd {
  std::string gt_path, dets_path, out_jitter, out_pairs;
  std::optional<double> radius;
  std::string strategy = "greedy";
  CLI::App* app = nullptr;
};

struct OptimizeCmd {
  std::string out_path, curve_path;
  JitterFlags jitter;
  std::vector<double> range;
  double step = cellbox::kDefaultGridStep;
  double tol = cellbox::kDefaultRefineTol;
  CLI::App* app = nullptr;
};

struct ApplyCmd {
  std::string dets_path, result_path, out_path;
  std::optional<double> size;
  std::vector<double> clip;
  CLI::App* app = nullptr;
};

struct EvaluateCmd {
  std::string gt_path, dets_path, out_path;
  bool class_agnostic = false;
  std::vector<double> iou_thresholds;
  int max_dets = 100;
  int recall_points = 101;
  CLI::App* app = nullptr;
};

struct SweepCmd {
  std::string gt_path, dets_path, out_path, out_json;
  std::vector<double> sizes;
  bool class_agnostic = false;
  CLI::App* app = nullptr;
};

struct CropCmd {
  std::string gt_path, out_path;
  std::vector<double> window;  // x_min y_min x_max y_max
  std::vector<double> tile;    // width height
  std::optional<double> overlap;  // default: the gt side, so no center loses
                                  // its full box in every tile
  bool no_clip_boxes = false;
  CLI::App* app = nullptr;
};

struct Cli {
  double gt_side = 100.0;
  std::string config_path;
  ConfigBinder binder;
  SimulateCmd simulate;
  MatchCmd match;
  OptimizeCmd optimize;
  ApplyCmd apply;
  EvaluateCmd evaluate;
  SweepCmd sweep;
  CropCmd crop;
};

// ---------------------------------------------------------------------------
// handlers

int run_simulate(Cli& cli) {
  SimulateCmd& cmd = cli.simulate;
  require_path(cmd.out_gt, "--out-gt");
  require_path(cmd.out_dets, "--out-dets");
  if (cmd.images < 1) throw UsageError("--images must be >= 1");
  if (cmd.extent.size() != 2) throw UsageError("--extent expects two values");

  cellbox::SceneConfig scene;
  scene.width = cmd.extent[0];
  scene.height = cmd.extent[1];
  scene.n_objects = cmd.objects;
  scene.min_center_separation = cmd.min_separation;
  scene.gt_side = cli.gt_side;
  if (!cmd.class_probs.empty()) {
    cellbox::detail::require(cmd.class_probs.size() == cellbox::kNumForegroundClasses,
                             "--class-probs expects 8 values");
    std::copy(cmd.class_probs.begin(), cmd.class_probs.end(),
              scene.class_distribution.begin());
  }

  cellbox::DetectorNoise noise;
  noise.jitter = cmd.jitter.resolve();
  noise.miss_rate = cmd.miss_rate;
  noise.false_positives_per_image = cmd.fp_rate;
  noise.score_model = {cmd.tp_score_mean, cmd.tp_score_std, cmd.fp_score_mean,
                       cmd.fp_score_std};
  if (!cmd.confusion_path.empty()) {
    std::ifstream in = cellbox::detail::open_input(cmd.confusion_path);
    const json doc = cellbox::detail::parse_json(in, cmd.confusion_path);
    cellbox::detail::require(doc.is_array() && doc.size() == cellbox::kNumForegroundClasses,
                             cmd.confusion_path + ": expected an 8x8 array");
    for (int r = 0; r < cellbox::kNumForegroundClasses; ++r) {
      cellbox::detail::require(doc[r].is_array() &&
                                   doc[r].size() == cellbox::kNumForegroundClasses,
                               cmd.confusion_path + ": row " + std::to_string(r + 1) +
                                   " must have 8 numbers");
      for (int c = 0; c < cellbox::kNumForegroundClasses; ++c) {
        noise.confusion[r][c] = doc[r][c].get<double>();
      }
    }
  }

  cellbox::GtDataset ds;
  std::vector<cellbox::Detection> dets;
  std::int64_t next_annotation_id = 1;
  for (int img = 1; img <= cmd.images; ++img) {
    ds.images.push_back({img, scene.width, scene.height});
    cellbox::SceneConfig img_scene = scene;
    img_scene.seed = cellbox::derive_seed(cmd.seed, static_cast<std::uint64_t>(img));
    auto gts = cellbox::generate_scene(img_scene, img);
    cellbox::DetectorNoise img_noise = noise;
    img_noise.seed = cellbox::derive_seed(cmd.noise_seed, static_cast<std::uint64_t>(img));
    auto img_dets = cellbox::simulate_detector(gts, img_noise,
                                               {scene.width, scene.height},
                                               cli.gt_side, img);
    for (cellbox::GroundTruth& g : gts) {
      g.id = next_annotation_id++;
      ds.annotations.push_back(g);
    }
    dets.insert(dets.end(), img_dets.begin(), img_dets.end());
  }
  for (int c = 1; c <= cellbox::kNumForegroundClasses; ++c) {
    ds.categories.push_back({c, "category_" + std::to_string(c)});
  }
  cellbox::save_ground_truth(cmd.out_gt, ds);
  cellbox::save_detections(cmd.out_dets, dets);
  std::printf("simulated %d image(s): %zu ground truths, %zu detections\n", cmd.images,
              ds.annotations.size(), dets.size());
  return 0;
}

int run_match(Cli& cli) {
  MatchCmd& cmd = cli.match;
  require_path(cmd.gt_path, "--gt");
  require_path(cmd.dets_path, "--dets");
  require_path(cmd.out_jitter, "--out-jitter");
  const cellbox::GtDataset gt = cellbox::load_ground_truth(cmd.gt_path);
  const auto dets = cellbox::load_detections(cmd.dets_path);
  check_image_ids(gt, dets, cmd.dets_path);

  cellbox::MatchConfig cfg;
  cfg.max_center_distance = cmd.radius.value_or(cli.gt_side / 2.0);
  cfg.strategy = cmd.strategy == "optimal"
                     ? cellbox::MatchConfig::Strategy::kOptimalAssignment
                     : cellbox::MatchConfig::Strategy::kGreedyByScore;
  const auto pairs = cellbox::match_dataset(gt.annotations, dets, cfg);

  std::vector<cellbox::JitterRecord> records;
  records.reserve(pairs.size());
  for (const cellbox::MatchPair& p : pairs) {
    records.push_back({p.image_id, p.offset.dx, p.offset.dy, p.score});
  }
  cellbox::save_jitter_samples(cmd.out_jitter, records);

  if (!cmd.out_pairs.empty()) {
    json doc = json::array();
    for (const cellbox::MatchPair& p : pairs) {
      doc.push_back({{"image_id", p.image_id},
                     {"gt_index", p.gt_index},
                     {"det_index", p.det_index},
                     {"dx", p.offset.dx},
                     {"dy", p.offset.dy},
                     {"score", p.score}});
    }
    write_json_file(cmd.out_pairs, doc);
  }

  const cellbox::JitterSummary s = cellbox::summarize(cellbox::collect_jitter(pairs));
  std::printf("matched pairs: %zu (of %zu ground truths, %zu detections)\n", pairs.size(),
              gt.annotations.size(), dets.size());
  if (s.count > 0) {
    std::printf("mean |dx| = %.4f  mean |dy| = %.4f  mean radial = %.4f\n", s.mean_abs_dx,
                s.mean_abs_dy, s.mean_radial);
    std::printf("stddev dx = %.4f  stddev dy = %.4f\n", s.stddev_dx, s.stddev_dy);
    std::printf("median |dx| = %.4f  p90 |dx| = %.4f  median |dy| = %.4f  p90 |dy| = %.4f\n",
                s.median_abs_dx, s.p90_abs_dx, s.median_abs_dy, s.p90_abs_dy);
  }
  return 0;
}

int run_optimize(Cli& cli) {
  OptimizeCmd& cmd = cli.optimize;
  require_path(cmd.out_path, "--out");
  if (cmd.jitter.specified() == 0) {
    throw UsageError("specify a jitter model: --jitter/--deterministic/--gaussian/--uniform");
  }
  const cellbox::JitterModel model = cmd.jitter.resolve();
  cellbox::SearchRange range = cellbox::default_search_range(cli.gt_side);
  if (!cmd.range.empty()) {
    if (cmd.range.size() != 2) throw UsageError("--range expects two values");
    range = {cmd.range[0], cmd.range[1]};
  }
  const cellbox::SizeOptimizationResult result =
      cellbox::optimize_size(cli.gt_side, model, range, cmd.step, cmd.tol);

  json record = cellbox::to_json(result);
  record["gt_side"] = cli.gt_side;
  record["model"] = cellbox::to_json(model);
  record["config"] = {{"gt_side", cli.gt_side},
                      {"range", {range.lo, range.hi}},
                      {"step", cmd.step},
                      {"tol", cmd.tol}};
  write_json_file(cmd.out_path, record);
  if (!cmd.curve_path.empty()) cellbox::save_curve(cmd.curve_path, result.curve);
  std::printf("s_star = %.6f  expected IoU = %.9f\n", result.s_star,
              result.expected_iou_at_star);
  return 0;
}

int run_apply(Cli& cli) {
  ApplyCmd& cmd = cli.apply;
  require_path(cmd.dets_path, "--dets");
  require_path(cmd.out_path, "--out");
  double size = 0.0;
  if (cmd.size.has_value() == !cmd.result_path.empty()) {
    throw UsageError("specify exactly one of --size or --result");
  }
  if (cmd.size.has_value()) {
    size = *cmd.size;
  } else {
    std::ifstream in = cellbox::detail::open_input(cmd.result_path);
    const json doc = cellbox::detail::parse_json(in, cmd.result_path);
    cellbox::detail::require(doc.contains("s_star") && doc["s_star"].is_number(),
                             cmd.result_path + ": missing numeric field 's_star'");
    size = doc["s_star"].get<double>();
  }
  std::optional<cellbox::ImageExtent> clip;
  if (!cmd.clip.empty()) {
    if (cmd.clip.size() != 2) throw UsageError("--clip expects two values");
    clip = cellbox::ImageExtent{cmd.clip[0], cmd.clip[1]};
  }
  const auto dets = cellbox::load_detections(cmd.dets_path);
  const auto out = cellbox::apply_fixed_size(dets, size, clip);
  cellbox::save_detections(cmd.out_path, out);
  std::printf("rewrote %zu detection(s) to %.6g x %.6g\n", out.size(), size, size);
  return 0;
}

int run_evaluate(Cli& cli) {
  EvaluateCmd& cmd = cli.evaluate;
  require_path(cmd.gt_path, "--gt");
  require_path(cmd.dets_path, "--dets");
  const cellbox::GtDataset gt = cellbox::load_ground_truth(cmd.gt_path);
  const auto dets = cellbox::load_detections(cmd.dets_path);
  check_image_ids(gt, dets, cmd.dets_path);

  cellbox::EvalConfig cfg;
  if (!cmd.iou_thresholds.empty()) cfg.iou_thresholds = cmd.iou_thresholds;
  cfg.class_agnostic = cmd.class_agnostic;
  cfg.max_dets_per_image = cmd.max_dets;
  cfg.recall_points = cmd.recall_points;
  const auto universe = category_universe(gt);
  const cellbox::EvalReport report = cellbox::evaluate(gt.annotations, dets, cfg, universe);

  print_report(report, cfg.class_agnostic);
  if (!cmd.out_path.empty()) {
    json doc = report_to_json(report);
    doc["config"] = {{"gt", cmd.gt_path},
                     {"dets", cmd.dets_path},
                     {"class_agnostic", cfg.class_agnostic},
                     {"iou_thresholds", cfg.iou_thresholds},
                     {"max_dets_per_image", cfg.max_dets_per_image},
                     {"recall_points", cfg.recall_points},
                     {"gt_side", cli.gt_side}};
    write_json_file(cmd.out_path, doc);
  }
  return 0;
}

int run_sweep(Cli& cli) {
  SweepCmd& cmd = cli.sweep;
  require_path(cmd.gt_path, "--gt");
  require_path(cmd.dets_path, "--dets");
  require_path(cmd.out_path, "--out");
  if (cmd.sizes.empty()) throw UsageError("--sizes expects at least one value");
  const cellbox::GtDataset gt = cellbox::load_ground_truth(cmd.gt_path);
  const auto dets = cellbox::load_detections(cmd.dets_path);
  check_image_ids(gt, dets, cmd.dets_path);

  cellbox::EvalConfig cfg;
  cfg.class_agnostic = cmd.class_agnostic;
  const auto universe = category_universe(gt);
  const auto curve =
      cellbox::sweep_size_vs_map(gt.annotations, dets, cmd.sizes, cfg, universe);
  cellbox::save_curve(cmd.out_path, curve);
  for (const auto& [s, map] : curve) std::printf("%10.4f  %.6f\n", s, map);
  if (!cmd.out_json.empty()) {
    json doc;
    doc["curve"] = json::array();
    for (const auto& [s, map] : curve) doc["curve"].push_back({s, map});
    doc["config"] = {{"gt", cmd.gt_path},
                     {"dets", cmd.dets_path},
                     {"class_agnostic", cmd.class_agnostic},
                     {"sizes", cmd.sizes},
                     {"gt_side", cli.gt_side}};
    write_json_file(cmd.out_json, doc);
  }
  return 0;
}

int run_crop(Cli& cli) {
  CropCmd& cmd = cli.crop;
  require_path(cmd.gt_path, "--gt");
  require_path(cmd.out_path, "--out");
  const bool window_mode = !cmd.window.empty();
  const bool tile_mode = !cmd.tile.empty();
  if (window_mode == tile_mode) {
    throw UsageError("specify exactly one of --window or --tile");
  }
  const cellbox::GtDataset gt = cellbox::load_ground_truth(cmd.gt_path);
  check_image_ids(gt, {}, "");
  cellbox::detail::require(!gt.images.empty(), cmd.gt_path + ": 'images' is empty");

  const cellbox::CropOptions opts{!cmd.no_clip_boxes};
  json tiles = json::array();
  for (const cellbox::ImageInfo& img : gt.images) {
    std::vector<cellbox::GroundTruth> img_gts;
    for (const cellbox::GroundTruth& g : gt.annotations) {
      if (g.image_id == img.id) img_gts.push_back(g);
    }
    std::vector<cellbox::CropWindow> windows;
    if (window_mode) {
      if (cmd.window.size() != 4) {
        throw UsageError("--window expects XMIN YMIN XMAX YMAX");
      }
      windows.push_back({cmd.window[0], cmd.window[1], cmd.window[2], cmd.window[3]});
    } else {
      if (cmd.tile.size() != 2) throw UsageError("--tile expects WIDTH HEIGHT");
      windows = cellbox::plan_tiles(img.width, img.height, cmd.tile[0], cmd.tile[1],
                                    cmd.overlap.value_or(cli.gt_side));
    }
    for (const cellbox::CropWindow& w : windows) {
      const auto cropped = cellbox::crop_annotations(img_gts, w, opts);
      json annotations = json::array();
      for (const cellbox::GroundTruth& g : cropped) {
        annotations.push_back(
            {{"id", g.id},
             {"image_id", g.image_id},
             {"category_id", g.category_id},
             {"bbox", {g.box.x_min, g.box.y_min, g.box.width, g.box.height}},
             {"center", {g.center.x, g.center.y}}});
      }
      tiles.push_back({{"image_id", img.id},
                       {"window", {w.x_min, w.y_min, w.x_max, w.y_max}},
                       {"size", {w.width(), w.height()}},
                       {"annotations", annotations}});
    }
  }
  json manifest{{"gt_side", cli.gt_side},
                {"clip_boxes", opts.clip_boxes},
                {"tiles", tiles},
                {"config",
                 {{"gt", cmd.gt_path},
                  {"window", cmd.window},
                  {"tile", cmd.tile},
                  {"overlap", cmd.overlap.value_or(cli.gt_side)}}}};
  write_json_file(cmd.out_path, manifest);
  std::printf("wrote %zu tile record(s)\n", tiles.size());
  return 0;
}

// ---------------------------------------------------------------------------

void build_cli(CLI::App& app, Cli& cli) {
  app.fallthrough();
  cli.binder.bind("", "gt-side",
                  app.add_option("--gt-side", cli.gt_side,
                                 "Ground-truth box side length (the fixed size)"),
                  cli.gt_side);
  app.add_option("--config", cli.config_path,
                 "JSON config file; flags override config values");

  {
    SimulateCmd& c = cli.simulate;
    CLI::App* sub = app.add_subcommand(
        "simulate", "Generate a synthetic dataset and noisy detections");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("simulate", "out-gt", sub->add_option("--out-gt", c.out_gt, "Output ground-truth JSON"), c.out_gt);
    b.bind("simulate", "out-dets", sub->add_option("--out-dets", c.out_dets, "Output detections JSON"), c.out_dets);
    b.bind("simulate", "images", sub->add_option("--images", c.images, "Number of images"), c.images);
    b.bind("simulate", "extent", sub->add_option("--extent", c.extent, "Image extent W H")->expected(2), c.extent);
    b.bind("simulate", "objects", sub->add_option("--objects", c.objects, "Objects per image"), c.objects);
    b.bind("simulate", "min-separation", sub->add_option("--min-separation", c.min_separation, "Minimum center separation"), c.min_separation);
    b.bind("simulate", "class-probs", sub->add_option("--class-probs", c.class_probs, "8 class probabilities")->expected(8), c.class_probs);
    b.bind("simulate", "seed", sub->add_option("--seed", c.seed, "Scene seed"), c.seed);
    b.bind("simulate", "noise-seed", sub->add_option("--noise-seed", c.noise_seed, "Detector noise seed"), c.noise_seed);
    c.jitter.add_options(sub, b, false);
    b.bind("simulate", "miss-rate", sub->add_option("--miss-rate", c.miss_rate, "Probability of missing a truth"), c.miss_rate);
    b.bind("simulate", "fp-rate", sub->add_option("--fp-rate", c.fp_rate, "Expected false positives per image"), c.fp_rate);
    b.bind("simulate", "tp-score-mean", sub->add_option("--tp-score-mean", c.tp_score_mean, ""), c.tp_score_mean);
    b.bind("simulate", "tp-score-std", sub->add_option("--tp-score-std", c.tp_score_std, ""), c.tp_score_std);
    b.bind("simulate", "fp-score-mean", sub->add_option("--fp-score-mean", c.fp_score_mean, ""), c.fp_score_mean);
    b.bind("simulate", "fp-score-std", sub->add_option("--fp-score-std", c.fp_score_std, ""), c.fp_score_std);
    b.bind("simulate", "confusion", sub->add_option("--confusion", c.confusion_path, "8x8 row-stochastic confusion matrix JSON"), c.confusion_path);
  }
  {
    MatchCmd& c = cli.match;
    CLI::App* sub = app.add_subcommand(
        "match", "Match detections to ground truth and extract jitter samples");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("match", "gt", sub->add_option("--gt", c.gt_path, "Ground-truth JSON"), c.gt_path);
    b.bind("match", "dets", sub->add_option("--dets", c.dets_path, "Detections JSON"), c.dets_path);
    b.bind("match", "out-jitter", sub->add_option("--out-jitter", c.out_jitter, "Output jitter samples NDJSON"), c.out_jitter);
    b.bind("match", "out-pairs", sub->add_option("--out-pairs", c.out_pairs, "Optional matched-pairs JSON"), c.out_pairs);
    b.bind("match", "radius", sub->add_option("--radius", c.radius, "Match radius in pixels (default: gt-side/2)"), c.radius);
    b.bind("match", "strategy", sub->add_option("--strategy", c.strategy, "greedy | optimal")->check(CLI::IsMember({"greedy", "optimal"})), c.strategy);
  }
  {
    OptimizeCmd& c = cli.optimize;
    CLI::App* sub = app.add_subcommand(
        "optimize-size", "Find the box side maximizing expected IoU under a jitter model");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("optimize-size", "out", sub->add_option("--out", c.out_path, "Output result record JSON"), c.out_path);
    b.bind("optimize-size", "curve", sub->add_option("--curve", c.curve_path, "Optional two-column curve file"), c.curve_path);
    c.jitter.add_options(sub, b, true);
    b.bind("optimize-size", "range", sub->add_option("--range", c.range, "Search range LO HI")->expected(2), c.range);
    b.bind("optimize-size", "step", sub->add_option("--step", c.step, "Coarse grid step"), c.step);
    b.bind("optimize-size", "tol", sub->add_option("--tol", c.tol, "Refinement tolerance"), c.tol);
  }
  {
    ApplyCmd& c = cli.apply;
    CLI::App* sub = app.add_subcommand(
        "apply-size", "Rewrite detections to fixed-size boxes around their centers");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("apply-size", "dets", sub->add_option("--dets", c.dets_path, "Detections JSON"), c.dets_path);
    b.bind("apply-size", "size", sub->add_option("--size", c.size, "Box side length"), c.size);
    b.bind("apply-size", "result", sub->add_option("--result", c.result_path, "Result record from optimize-size"), c.result_path);
    b.bind("apply-size", "out", sub->add_option("--out", c.out_path, "Output detections JSON"), c.out_path);
    b.bind("apply-size", "clip", sub->add_option("--clip", c.clip, "Clip boxes to image extent W H")->expected(2), c.clip);
  }
  {
    EvaluateCmd& c = cli.evaluate;
    CLI::App* sub = app.add_subcommand("evaluate", "COCO-style mAP of detections");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("evaluate", "gt", sub->add_option("--gt", c.gt_path, "Ground-truth JSON"), c.gt_path);
    b.bind("evaluate", "dets", sub->add_option("--dets", c.dets_path, "Detections JSON"), c.dets_path);
    b.bind("evaluate", "out", sub->add_option("--out", c.out_path, "Optional report JSON"), c.out_path);
    b.bind("evaluate", "class-agnostic", sub->add_flag("--class-agnostic", c.class_agnostic, "Pool all classes (detection-only evaluation)"), c.class_agnostic);
    b.bind("evaluate", "iou-thresholds", sub->add_option("--iou-thresholds", c.iou_thresholds, "Override the 0.50:0.05:0.95 thresholds"), c.iou_thresholds);
    b.bind("evaluate", "max-dets", sub->add_option("--max-dets", c.max_dets, "Per-image detection cap (0 = unlimited)"), c.max_dets);
    b.bind("evaluate", "recall-points", sub->add_option("--recall-points", c.recall_points, "Interpolation points (0 = all-point)"), c.recall_points);
  }
  {
    SweepCmd& c = cli.sweep;
    CLI::App* sub = app.add_subcommand("sweep", "mAP as a function of the applied box side");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("sweep", "gt", sub->add_option("--gt", c.gt_path, "Ground-truth JSON"), c.gt_path);
    b.bind("sweep", "dets", sub->add_option("--dets", c.dets_path, "Detections JSON"), c.dets_path);
    b.bind("sweep", "sizes", sub->add_option("--sizes", c.sizes, "Box sides to evaluate"), c.sizes);
    b.bind("sweep", "out", sub->add_option("--out", c.out_path, "Output two-column table"), c.out_path);
    b.bind("sweep", "out-json", sub->add_option("--out-json", c.out_json, "Optional JSON record"), c.out_json);
    b.bind("sweep", "class-agnostic", sub->add_flag("--class-agnostic", c.class_agnostic, "Pool all classes"), c.class_agnostic);
  }
  {
    CropCmd& c = cli.crop;
    CLI::App* sub = app.add_subcommand(
        "crop", "Center-preserving crop of annotations into windows or tiles");
    sub->fallthrough();
    c.app = sub;
    ConfigBinder& b = cli.binder;
    b.bind("crop", "gt", sub->add_option("--gt", c.gt_path, "Ground-truth JSON"), c.gt_path);
    b.bind("crop", "out", sub->add_option("--out", c.out_path, "Output crop manifest JSON"), c.out_path);
    b.bind("crop", "window", sub->add_option("--window", c.window, "Single window XMIN YMIN XMAX YMAX")->expected(4), c.window);
    b.bind("crop", "tile", sub->add_option("--tile", c.tile, "Tile size W H")->expected(2), c.tile);
    b.bind("crop", "overlap", sub->add_option("--overlap", c.overlap, "Tile overlap in pixels (default: gt-side)"), c.overlap);
    b.bind("crop", "no-clip-boxes", sub->add_flag("--no-clip-boxes", c.no_clip_boxes, "Keep boxes protruding past the window"), c.no_clip_boxes);
  }
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"Fixed-size box toolkit for center-point detection"};
  app.require_subcommand(1);
  build_cli(app, cli);
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 1;
    }
    if (!cli.config_path.empty()) {
      std::ifstream in = cellbox::detail::open_input(cli.config_path);
      const json doc = cellbox::detail::parse_json(in, cli.config_path);
      cellbox::detail::require(doc.is_object(),
                               cli.config_path + ": top level must be an object");
      cli.binder.apply(doc);
    }
    if (cli.simulate.app->parsed()) return run_simulate(cli);
    if (cli.match.app->parsed()) return run_match(cli);
    if (cli.optimize.app->parsed()) return run_optimize(cli);
    if (cli.apply.app->parsed()) return run_apply(cli);
    if (cli.evaluate.app->parsed()) return run_evaluate(cli);
    if (cli.sweep.app->parsed()) return run_sweep(cli);
    if (cli.crop.app->parsed()) return run_crop(cli);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
