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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. The CLI binary is taken
// from the CELLBOX_CLI environment variable (criteria 1 and 8 drive it).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellbox/cellbox.hpp"
#include "reference_eval.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string cli_binary() {
  const char* env = std::getenv("CELLBOX_CLI");
  if (env != nullptr) return env;
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path guess = self.parent_path().parent_path() / "tools" / "cellbox";
    if (fs::exists(guess)) return guess.string();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_file(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("cellbox_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

// ---------------------------------------------------------------------------
// criterion 1: deterministic equal-axis jitter d has optimum 100 + 2d; the
// family includes the reported 101.5 at d = 0.75. Driven through the CLI.

Outcome criterion_analytic_family() {
  if (cli_binary().empty()) return {false, "CELLBOX_CLI not set"};
  TempDir tmp;
  double worst = 0.0;
  double slowest = 0.0;
  for (const double delta : {0.25, 0.5, 0.75, 1.0, 1.5}) {
    const std::string out = tmp.path("result.json");
    char args[256];
    std::snprintf(args, sizeof(args), "optimize-size --deterministic %g %g --out %s",
                  delta, delta, out.c_str());
    const auto start = std::chrono::steady_clock::now();
    if (run_cli(args) != 0) return {false, "CLI failed for delta " + std::to_string(delta)};
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    slowest = std::max(slowest, seconds);
    if (seconds >= 1.0) {
      return {false, "runtime " + std::to_string(seconds) + " s exceeds 1 s per case"};
    }
    const double s_star = parse_file(out)["s_star"].get<double>();
    const double error = std::abs(s_star - (100.0 + 2.0 * delta));
    worst = std::max(worst, error);
    if (error > 0.02) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "delta %.2f gave s_star %.5f (error %.4f px > 0.02)",
                    delta, s_star, error);
      return {false, buf};
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max |S* - (100+2d)| = %.4f px over d in {0.25..1.5}; "
                "d=0.75 -> 101.5; slowest case %.2f s",
                worst, slowest);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// criterion 2: quadrature and seeded Monte Carlo (n = 1e6) agree to 1e-3
// over the parametric model/size matrix.

Outcome criterion_oracle_agreement() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, cellbox::JitterModel>> models;
  for (const double sigma : {0.5, 1.0, 1.5}) {
    models.emplace_back("gaussian(" + std::to_string(sigma) + ")",
                        cellbox::GaussianJitter{sigma});
  }
  models.emplace_back("uniform(1,1.5)", cellbox::UniformRadialJitter{1.0, 1.5});
  double worst = 0.0;
  std::uint64_t seed = 1000;
  for (const auto& [name, model] : models) {
    for (const double s : {100.0, 101.5, 103.0}) {
      const double quad = cellbox::expected_iou(100.0, s, model);
      const double mc = cellbox::monte_carlo_expected_iou(100.0, s, model, 1000000, seed++);
      const double diff = std::abs(quad - mc);
      worst = std::max(worst, diff);
      if (diff > 1e-3) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s at S=%.1f: |quad-mc| = %.2e > 1e-3",
                      name.c_str(), s, diff);
        return {false, buf};
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= 30.0) {
    return {false, "runtime " + std::to_string(seconds) + " s exceeds 30 s"};
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max |quad - mc| = %.2e over 12 model/size pairs (%.1f s)",
                worst, seconds);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// criterion 3: the closed form equals IoU of concretely placed boxes to
// 1e-12 on 1e5 randomized (G, S, dx, dy) tuples.

Outcome criterion_closed_form_vs_concrete() {
  cellbox::Rng rng(26081100);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double g = rng.uniform(5.0, 300.0);
    const double s = rng.uniform(0.3 * g, 3.0 * g);
    const double dx = rng.uniform(0.0, 1.2 * g);
    const double dy = rng.uniform(0.0, 1.2 * g);
    const double closed = cellbox::jittered_iou({g, s}, dx, dy);
    const double concrete = cellbox::iou(cellbox::box_from_center({0.0, 0.0}, g, g),
                                         cellbox::box_from_center({dx, dy}, s, s));
    const double diff = std::abs(closed - concrete);
    worst = std::max(worst, diff);
    if (diff > 1e-12) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "G=%.3f S=%.3f dx=%.3f dy=%.3f: |diff| = %.2e",
                    g, s, dx, dy, diff);
      return {false, buf};
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max |closed - concrete| = %.2e over 1e5 tuples", worst);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// shared simulation helper for criteria 4 and 5

struct Pipeline {
  std::vector<cellbox::GroundTruth> gts;
  std::vector<cellbox::Detection> dets;
};

Pipeline simulate_dataset(int n_images, int n_objects, const cellbox::JitterModel& jitter,
                          double miss_rate, double fp_rate, std::uint64_t scene_seed,
                          std::uint64_t noise_seed) {
  Pipeline p;
  std::int64_t next_id = 1;
  for (int img = 1; img <= n_images; ++img) {
    cellbox::SceneConfig scene;
    scene.width = 1024;
    scene.height = 1024;
    scene.n_objects = n_objects;
    scene.min_center_separation = 30;
    scene.seed = cellbox::derive_seed(scene_seed, static_cast<std::uint64_t>(img));
    auto gts = cellbox::generate_scene(scene, img);
    cellbox::DetectorNoise noise;
    noise.jitter = jitter;
    noise.miss_rate = miss_rate;
    noise.false_positives_per_image = fp_rate;
    noise.seed = cellbox::derive_seed(noise_seed, static_cast<std::uint64_t>(img));
    auto dets = cellbox::simulate_detector(gts, noise, {1024, 1024}, 100.0, img);
    for (cellbox::GroundTruth& g : gts) {
      g.id = next_id++;
      p.gts.push_back(g);
    }
    for (cellbox::Detection& d : dets) p.dets.push_back(std::move(d));
  }
  return p;
}

// criterion 4: on simulated noisy data the full pipeline (match -> estimate
// -> optimize -> apply -> evaluate) improves mAP at S* over S=100 and the
// (S, mAP) sweep peaks within 0.5 px of S*. This reproduces the direction of
// the reported gains, which are not recoverable without the original models
// and data.

Outcome criterion_pipeline_direction() {
  const auto start = std::chrono::steady_clock::now();
  const Pipeline p = simulate_dataset(100, 50, cellbox::GaussianJitter{1.0}, 0.1, 2.0,
                                      20260036, 20260037);

  const auto pairs = cellbox::match_dataset(p.gts, p.dets);
  const cellbox::EmpiricalJitter jitter = cellbox::collect_jitter(pairs);
  const auto result = cellbox::optimize_size(100.0, jitter);
  const double s_star = result.s_star;

  std::vector<double> sizes;
  for (double s = 99.0; s <= 103.0 + 1e-9; s += 0.25) sizes.push_back(s);
  sizes.push_back(s_star);
  std::sort(sizes.begin(), sizes.end());

  cellbox::EvalConfig cfg;
  cfg.class_agnostic = true;
  const auto curve = cellbox::sweep_size_vs_map(p.gts, p.dets, sizes, cfg);

  double map_100 = -1.0, map_star = -1.0, best_map = -1.0;
  for (const auto& [s, map] : curve) {
    if (std::abs(s - 100.0) < 1e-9) map_100 = map;
    if (std::abs(s - s_star) < 1e-9) map_star = map;
    best_map = std::max(best_map, map);
  }
  double best_distance = 1e9;
  for (const auto& [s, map] : curve) {
    if (map == best_map) best_distance = std::min(best_distance, std::abs(s - s_star));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  char buf[240];
  if (map_star <= map_100) {
    std::snprintf(buf, sizeof(buf), "mAP(S*=%.3f) = %.6f does not beat mAP(100) = %.6f",
                  s_star, map_star, map_100);
    return {false, buf};
  }
  if (best_distance > 0.5) {
    std::snprintf(buf, sizeof(buf),
                  "sweep max %.6f sits %.2f px from S* = %.3f (limit 0.5)", best_map,
                  best_distance, s_star);
    return {false, buf};
  }
  if (seconds >= 120.0) {
    std::snprintf(buf, sizeof(buf), "runtime %.1f s exceeds 2 min", seconds);
    return {false, buf};
  }
  std::snprintf(buf, sizeof(buf),
                "%zu pairs; S* = %.3f; mAP(100) = %.6f -> mAP(S*) = %.6f; "
                "sweep max within %.2f px of S* (%.1f s)",
                pairs.size(), s_star, map_100, map_star, best_distance, seconds);
  return {true, buf};
}

// criterion 5: a noiseless detector scores mAP exactly 1.0 at S = 100 and
// the optimizer returns S* = 100 on the recovered (all-zero) jitter.

Outcome criterion_zero_jitter() {
  const Pipeline p = simulate_dataset(20, 30, cellbox::DeterministicJitter{0.0, 0.0},
                                      0.0, 0.0, 301, 302);
  const double map = cellbox::evaluate(p.gts, p.dets).map;
  if (map != 1.0) {
    return {false, "noiseless mAP = " + std::to_string(map) + " (expected exactly 1.0)"};
  }
  const auto pairs = cellbox::match_dataset(p.gts, p.dets);
  const auto result = cellbox::optimize_size(100.0, cellbox::collect_jitter(pairs));
  if (std::abs(result.s_star - 100.0) > 0.01) {
    return {false, "S* = " + std::to_string(result.s_star) + " (expected 100 +- 0.01)"};
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "mAP = 1.0 exactly; S* = %.4f", result.s_star);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// criterion 6: the evaluator matches an exhaustive reference on 500 random
// small instances to 1e-9, and reproduces the hand-traced 101-point value.

Outcome criterion_evaluator_equivalence() {
  // hand-traced 2x2 case: TP then FP at one threshold -> AP = 51/101
  {
    std::vector<cellbox::GroundTruth> gts;
    gts.push_back({1, 1, 1, {50, 50}, {0, 0, 100, 100}});
    gts.push_back({1, 2, 1, {350, 50}, {300, 0, 100, 100}});
    std::vector<cellbox::Detection> dets(2);
    dets[0].image_id = 1;
    dets[0].category_id = 1;
    dets[0].score = 0.9;
    dets[0].box = cellbox::BBox{25, 0, 100, 100};  // IoU 0.6
    dets[1].image_id = 1;
    dets[1].category_id = 1;
    dets[1].score = 0.8;
    dets[1].box = cellbox::BBox{345, 0, 100, 100};  // IoU < 0.5
    cellbox::EvalConfig cfg;
    cfg.iou_thresholds = {0.5};
    const double ap = cellbox::evaluate(gts, dets, cfg).map;
    if (std::abs(ap - 51.0 / 101.0) > 1e-12) {
      return {false, "hand-traced AP = " + std::to_string(ap) + " != 51/101"};
    }
  }

  cellbox::Rng rng(606060);
  const std::vector<double> thresholds = cellbox::default_iou_thresholds();
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<cellbox::GroundTruth> gts;
    std::vector<cellbox::Detection> dets;
    const int n_images = 1 + static_cast<int>(rng.below(2));
    std::int64_t next_id = 1;
    for (int img = 1; img <= n_images; ++img) {
      const int n_gt = static_cast<int>(rng.below(9));
      const int n_det = static_cast<int>(rng.below(9));
      for (int i = 0; i < n_gt; ++i) {
        const cellbox::CenterPoint c{rng.uniform(0, 300), rng.uniform(0, 300)};
        gts.push_back(cellbox::make_fixed_gt(img, next_id++,
                                             1 + static_cast<int>(rng.below(3)), c, 100.0));
      }
      for (int i = 0; i < n_det; ++i) {
        cellbox::Detection d;
        d.image_id = img;
        d.category_id = 1 + static_cast<int>(rng.below(3));
        d.score = std::floor(rng.uniform() * 20.0) / 20.0;  // provoke ties
        d.box = cellbox::box_from_center({rng.uniform(0, 300), rng.uniform(0, 300)},
                                         100.0, 100.0);
        dets.push_back(d);
      }
    }
    const bool agnostic = trial % 2 == 0;
    cellbox::EvalConfig cfg;
    cfg.class_agnostic = agnostic;
    const double fast = cellbox::evaluate(gts, dets, cfg).map;
    const double slow = cellbox::reference::evaluate(gts, dets, thresholds, agnostic,
                                                     cfg.recall_points,
                                                     cfg.max_dets_per_image)
                            .map;
    const double diff = std::abs(fast - slow);
    worst = std::max(worst, diff);
    if (diff > 1e-9) {
      return {false, "trial " + std::to_string(trial) + ": |fast - reference| = " +
                         std::to_string(diff)};
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "hand-traced AP = 51/101 exact; max |evaluate - reference| = %.2e "
                "over 500 instances",
                worst);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// criterion 7: crop retention is exactly closed-window membership, the
// translation is exact, and tiling covers every point (plus every interior
// fixed-size box when overlap >= the side).

Outcome criterion_crop_predicate() {
  cellbox::Rng rng(70707);
  for (int i = 0; i < 10000; ++i) {
    const double x0 = rng.uniform(-500, 500);
    const double y0 = rng.uniform(-500, 500);
    const cellbox::CropWindow w{x0, y0, x0 + rng.uniform(1, 600), y0 + rng.uniform(1, 600)};
    const cellbox::GroundTruth gt = cellbox::make_fixed_gt(
        1, 1, 1, {rng.uniform(-700, 1200), rng.uniform(-700, 1200)}, 100.0);
    const auto out = cellbox::crop_annotations(std::vector<cellbox::GroundTruth>{gt}, w);
    const bool member = w.x_min <= gt.center.x && gt.center.x <= w.x_max &&
                        w.y_min <= gt.center.y && gt.center.y <= w.y_max;
    if (out.empty() == member) {
      return {false, "retention disagrees with closed membership"};
    }
    if (member) {
      if (std::abs(out[0].center.x + w.x_min - gt.center.x) > 1e-12 ||
          std::abs(out[0].center.y + w.y_min - gt.center.y) > 1e-12) {
        return {false, "translated center deviates by more than 1e-12"};
      }
    }
  }
  int buffered_configs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double img_w = rng.uniform(300, 3000);
    const double img_h = rng.uniform(300, 3000);
    const double tile_w = rng.uniform(150, img_w);
    const double tile_h = rng.uniform(150, img_h);
    const double side = 100.0;
    const bool buffered = std::min(tile_w, tile_h) > side + 1 && trial % 2 == 0;
    const double overlap = buffered
                               ? rng.uniform(side, std::min(tile_w, tile_h) - 1)
                               : rng.uniform(0, std::min(tile_w, tile_h) - 1);
    const auto tiles = cellbox::plan_tiles(img_w, img_h, tile_w, tile_h, overlap);
    for (int i = 0; i < 100; ++i) {
      const cellbox::CenterPoint pt{rng.uniform(0, img_w), rng.uniform(0, img_h)};
      bool covered = false;
      for (const cellbox::CropWindow& t : tiles) covered = covered || t.contains(pt);
      if (!covered) return {false, "tiling left a point uncovered"};
    }
    if (!buffered || overlap < side) continue;
    ++buffered_configs;
    for (int i = 0; i < 100; ++i) {
      const cellbox::CenterPoint c{rng.uniform(side / 2, img_w - side / 2),
                                   rng.uniform(side / 2, img_h - side / 2)};
      bool contained = false;
      for (const cellbox::CropWindow& t : tiles) {
        contained = contained || (t.x_min <= c.x - side / 2 && c.x + side / 2 <= t.x_max &&
                                  t.y_min <= c.y - side / 2 && c.y + side / 2 <= t.y_max);
      }
      if (!contained) return {false, "a fully-interior box fits no tile"};
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "1e4 membership/translation checks; 100 tiling configs "
                "(%d with overlap >= side)",
                buffered_configs);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// criterion 8: every CLI invocation is a pure function of inputs and seeds;
// re-running the whole chain yields byte-identical files.

Outcome criterion_cli_determinism() {
  if (cli_binary().empty()) return {false, "CELLBOX_CLI not set"};
  TempDir tmp;
  const std::vector<std::string> outputs = {
      "gt.json",     "dets.json",  "jitter.ndjson", "pairs.json", "result.json",
      "curve.txt",   "dets2.json", "report.json",   "sweep.txt",  "manifest.json"};
  const auto p = [&](const std::string& name) { return tmp.path(name); };
  const auto run_chain = [&]() -> std::string {
    if (run_cli("simulate --out-gt " + p("gt.json") + " --out-dets " + p("dets.json") +
                " --images 10 --objects 20 --min-separation 30 --gaussian 1 "
                "--miss-rate 0.1 --fp-rate 2 --seed 99 --noise-seed 98") != 0) {
      return "simulate failed";
    }
    if (run_cli("match --gt " + p("gt.json") + " --dets " + p("dets.json") +
                " --out-jitter " + p("jitter.ndjson") + " --out-pairs " + p("pairs.json")) !=
        0) {
      return "match failed";
    }
    if (run_cli("optimize-size --jitter " + p("jitter.ndjson") + " --out " +
                p("result.json") + " --curve " + p("curve.txt")) != 0) {
      return "optimize-size failed";
    }
    if (run_cli("apply-size --dets " + p("dets.json") + " --result " + p("result.json") +
                " --out " + p("dets2.json")) != 0) {
      return "apply-size failed";
    }
    if (run_cli("evaluate --gt " + p("gt.json") + " --dets " + p("dets2.json") +
                " --class-agnostic --out " + p("report.json")) != 0) {
      return "evaluate failed";
    }
    if (run_cli("sweep --gt " + p("gt.json") + " --dets " + p("dets.json") +
                " --sizes 100 100.5 101 --class-agnostic --out " + p("sweep.txt")) != 0) {
      return "sweep failed";
    }
    if (run_cli("crop --gt " + p("gt.json") + " --tile 512 512 --overlap 100 --out " +
                p("manifest.json")) != 0) {
      return "crop failed";
    }
    return "";
  };
  // identical invocations twice: first-run bytes are captured before the
  // second run overwrites every file in place
  std::string error = run_chain();
  if (!error.empty()) return {false, error + " (first run)"};
  std::vector<std::string> first_bytes;
  for (const std::string& name : outputs) first_bytes.push_back(slurp(p(name)));
  error = run_chain();
  if (!error.empty()) return {false, error + " (second run)"};
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string second = slurp(p(outputs[i]));
    if (first_bytes[i].empty() || first_bytes[i] != second) {
      return {false, outputs[i] + " differs between identical runs"};
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%zu output files byte-identical across reruns",
                outputs.size());
  return {true, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"analytic optimum family (S* = 100 + 2d, includes 101.5)", criterion_analytic_family},
      {"oracle agreement (quadrature vs Monte Carlo, 1e-3)", criterion_oracle_agreement},
      {"closed form vs concrete geometry (1e-12)", criterion_closed_form_vs_concrete},
      {"pipeline improves mAP at S* on noisy simulation", criterion_pipeline_direction},
      {"zero-jitter degeneracy (mAP 1.0, S* = 100)", criterion_zero_jitter},
      {"evaluator equivalence with exhaustive reference", criterion_evaluator_equivalence},
      {"crop predicate, translation, tiling coverage", criterion_crop_predicate},
      {"CLI determinism (byte-identical reruns)", criterion_cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%zu] %-55s %s  (%s)\n", i + 1, criteria[i].first.c_str(),
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
