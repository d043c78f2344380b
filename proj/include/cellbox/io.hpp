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

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellbox/error.hpp"
#include "cellbox/jitter.hpp"
#include "cellbox/size_opt.hpp"
#include "cellbox/types.hpp"

namespace cellbox {

struct ImageInfo {
  std::int64_t id = 0;
  double width = 0.0;
  double height = 0.0;
};

struct Category {
  int id = 0;
  std::string name;
};

/// Ground-truth file contents: COCO-style images / annotations / categories.
/// Annotation boxes are [x_min, y_min, width, height]; an optional "center"
/// field keeps sub-pixel centers exact across crop round trips (the box
/// midpoint is used when absent).
struct GtDataset {
  std::vector<ImageInfo> images;
  std::vector<GroundTruth> annotations;
  std::vector<Category> categories;
};

/// One line of the jitter samples file (newline-delimited JSON records).
struct JitterRecord {
  std::int64_t image_id = 0;
  double dx = 0.0;
  double dy = 0.0;
  double score = 0.0;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  const auto it = obj.find(key);
  require(it != obj.end(), where + ": missing required field '" + key + "'");
  return *it;
}

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::string& where) {
  const nlohmann::json& v = require_field(obj, key, where);
  require(v.is_number(), where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::int64_t require_integer(const nlohmann::json& obj, const char* key,
                                    const std::string& where) {
  const nlohmann::json& v = require_field(obj, key, where);
  require(v.is_number_integer(), where + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::vector<double> require_number_array(const nlohmann::json& obj,
                                                const char* key, std::size_t n,
                                                const std::string& where) {
  const nlohmann::json& v = require_field(obj, key, where);
  require(v.is_array() && v.size() == n,
          where + ": field '" + key + "' must be an array of " + std::to_string(n) +
              " numbers");
  std::vector<double> out;
  out.reserve(n);
  for (const auto& e : v) {
    require(e.is_number(), where + ": field '" + key + "' must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

inline nlohmann::json parse_json(std::istream& in, const std::string& where) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError(where + ": " + e.what());
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open input file '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file '" + path + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ground truth

inline GtDataset load_ground_truth(std::istream& in, const std::string& where) {
  const nlohmann::json doc = detail::parse_json(in, where);
  detail::require(doc.is_object(), where + ": top level must be an object");
  GtDataset ds;

  const nlohmann::json& images = detail::require_field(doc, "images", where);
  detail::require(images.is_array(), where + ": 'images' must be an array");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string ctx = where + ": images[" + std::to_string(i) + "]";
    const auto& img = images[i];
    detail::require(img.is_object(), ctx + " must be an object");
    ds.images.push_back({detail::require_integer(img, "id", ctx),
                         detail::require_number(img, "width", ctx),
                         detail::require_number(img, "height", ctx)});
  }

  if (doc.contains("categories")) {
    const nlohmann::json& cats = doc["categories"];
    detail::require(cats.is_array(), where + ": 'categories' must be an array");
    for (std::size_t i = 0; i < cats.size(); ++i) {
      const std::string ctx = where + ": categories[" + std::to_string(i) + "]";
      const auto& cat = cats[i];
      detail::require(cat.is_object(), ctx + " must be an object");
      Category c;
      c.id = static_cast<int>(detail::require_integer(cat, "id", ctx));
      c.name = cat.value("name", "category_" + std::to_string(c.id));
      ds.categories.push_back(std::move(c));
    }
  }

  const nlohmann::json& anns = detail::require_field(doc, "annotations", where);
  detail::require(anns.is_array(), where + ": 'annotations' must be an array");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string ctx = where + ": annotations[" + std::to_string(i) + "]";
    const auto& ann = anns[i];
    detail::require(ann.is_object(), ctx + " must be an object");
    GroundTruth gt;
    gt.id = detail::require_integer(ann, "id", ctx);
    gt.image_id = detail::require_integer(ann, "image_id", ctx);
    gt.category_id = static_cast<int>(detail::require_integer(ann, "category_id", ctx));
    const std::vector<double> bbox = detail::require_number_array(ann, "bbox", 4, ctx);
    gt.box = {bbox[0], bbox[1], bbox[2], bbox[3]};
    detail::require(is_valid(gt.box), ctx + ": bbox must have positive width and height");
    if (ann.contains("center")) {
      const std::vector<double> c = detail::require_number_array(ann, "center", 2, ctx);
      gt.center = {c[0], c[1]};
    } else {
      gt.center = gt.box.center();
    }
    ds.annotations.push_back(gt);
  }
  return ds;
}

inline GtDataset load_ground_truth(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  return load_ground_truth(in, path);
}

inline nlohmann::json to_json(const GtDataset& ds) {
  nlohmann::json doc;
  doc["images"] = nlohmann::json::array();
  for (const ImageInfo& img : ds.images) {
    doc["images"].push_back({{"id", img.id}, {"width", img.width}, {"height", img.height}});
  }
  doc["annotations"] = nlohmann::json::array();
  for (const GroundTruth& gt : ds.annotations) {
    doc["annotations"].push_back(
        {{"id", gt.id},
         {"image_id", gt.image_id},
         {"category_id", gt.category_id},
         {"bbox", {gt.box.x_min, gt.box.y_min, gt.box.width, gt.box.height}},
         {"center", {gt.center.x, gt.center.y}}});
  }
  doc["categories"] = nlohmann::json::array();
  for (const Category& cat : ds.categories) {
    doc["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
  }
  return doc;
}

inline void save_ground_truth(std::ostream& out, const GtDataset& ds) {
  out << to_json(ds).dump(2) << "\n";
}

inline void save_ground_truth(const std::string& path, const GtDataset& ds) {
  std::ofstream out = detail::open_output(path);
  save_ground_truth(out, ds);
}

// ---------------------------------------------------------------------------
// detections

inline std::vector<Detection> load_detections(std::istream& in, const std::string& where) {
  const nlohmann::json doc = detail::parse_json(in, where);
  detail::require(doc.is_array(), where + ": top level must be an array of detections");
  std::vector<Detection> dets;
  dets.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string ctx = where + ": detections[" + std::to_string(i) + "]";
    const auto& rec = doc[i];
    detail::require(rec.is_object(), ctx + " must be an object");
    Detection d;
    d.image_id = detail::require_integer(rec, "image_id", ctx);
    d.score = detail::require_number(rec, "score", ctx);
    if (rec.contains("category_id")) {
      d.category_id = static_cast<int>(detail::require_integer(rec, "category_id", ctx));
    }
    if (rec.contains("bbox")) {
      const std::vector<double> bbox = detail::require_number_array(rec, "bbox", 4, ctx);
      d.box = BBox{bbox[0], bbox[1], bbox[2], bbox[3]};
      detail::require(is_valid(*d.box), ctx + ": bbox must have positive width and height");
    }
    if (rec.contains("center")) {
      const std::vector<double> c = detail::require_number_array(rec, "center", 2, ctx);
      d.center = CenterPoint{c[0], c[1]};
    }
    if (rec.contains("probs")) {
      d.class_probs = detail::require_number_array(rec, "probs", kNumForegroundClasses + 1, ctx);
    }
    detail::require(d.box.has_value() || d.center.has_value(),
                    ctx + ": needs a 'bbox' or a 'center'");
    dets.push_back(std::move(d));
  }
  return dets;
}

inline std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  return load_detections(in, path);
}

inline nlohmann::json to_json(const Detection& d) {
  nlohmann::json rec{{"image_id", d.image_id}, {"score", d.score}};
  if (d.category_id >= 0) rec["category_id"] = d.category_id;
  if (d.box) rec["bbox"] = {d.box->x_min, d.box->y_min, d.box->width, d.box->height};
  if (d.center) rec["center"] = {d.center->x, d.center->y};
  if (!d.class_probs.empty()) rec["probs"] = d.class_probs;
  return rec;
}

inline void save_detections(std::ostream& out, std::span<const Detection> dets) {
  nlohmann::json doc = nlohmann::json::array();
  for (const Detection& d : dets) doc.push_back(to_json(d));
  out << doc.dump(2) << "\n";
}

inline void save_detections(const std::string& path, std::span<const Detection> dets) {
  std::ofstream out = detail::open_output(path);
  save_detections(out, dets);
}

// ---------------------------------------------------------------------------
// jitter samples (newline-delimited JSON: flat and greppable)

inline void save_jitter_samples(std::ostream& out, std::span<const JitterRecord> records) {
  for (const JitterRecord& r : records) {
    out << nlohmann::json{{"image_id", r.image_id},
                          {"dx", r.dx},
                          {"dy", r.dy},
                          {"score", r.score}}
               .dump()
        << "\n";
  }
}

inline void save_jitter_samples(const std::string& path,
                                std::span<const JitterRecord> records) {
  std::ofstream out = detail::open_output(path);
  save_jitter_samples(out, records);
}

inline std::vector<JitterRecord> load_jitter_samples(std::istream& in,
                                                     const std::string& where) {
  std::vector<JitterRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string ctx = where + ": line " + std::to_string(line_no);
    std::istringstream stream(line);
    const nlohmann::json rec = detail::parse_json(stream, ctx);
    detail::require(rec.is_object(), ctx + " must be a JSON object");
    records.push_back({detail::require_integer(rec, "image_id", ctx),
                       detail::require_number(rec, "dx", ctx),
                       detail::require_number(rec, "dy", ctx),
                       detail::require_number(rec, "score", ctx)});
  }
  return records;
}

inline std::vector<JitterRecord> load_jitter_samples(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  return load_jitter_samples(in, path);
}

inline EmpiricalJitter to_empirical(std::span<const JitterRecord> records) {
  EmpiricalJitter jitter;
  jitter.samples.reserve(records.size());
  for (const JitterRecord& r : records) jitter.samples.push_back({r.dx, r.dy});
  return jitter;
}

// ---------------------------------------------------------------------------
// curves and model descriptions

/// Two-column text: size and expected value, 12 significant digits.
inline void save_curve(std::ostream& out, std::span<const std::pair<double, double>> curve) {
  char line[80];
  for (const auto& [s, v] : curve) {
    std::snprintf(line, sizeof(line), "%.12g %.12g\n", s, v);
    out << line;
  }
}

inline void save_curve(const std::string& path,
                       std::span<const std::pair<double, double>> curve) {
  std::ofstream out = detail::open_output(path);
  save_curve(out, curve);
}

inline nlohmann::json to_json(const JitterModel& model) {
  return std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DeterministicJitter>) {
          return {{"type", "deterministic"}, {"delta_x", m.delta_x}, {"delta_y", m.delta_y}};
        } else if constexpr (std::is_same_v<T, UniformRadialJitter>) {
          return {{"type", "uniform-radial"}, {"lo", m.lo}, {"hi", m.hi}};
        } else if constexpr (std::is_same_v<T, GaussianJitter>) {
          return {{"type", "gaussian-isotropic"}, {"sigma", m.sigma}};
        } else {
          return {{"type", "empirical"}, {"n_samples", m.samples.size()}};
        }
      },
      model);
}

inline nlohmann::json to_json(const SizeOptimizationResult& result) {
  nlohmann::json rec{{"s_star", result.s_star},
                     {"expected_iou_at_star", result.expected_iou_at_star},
                     {"search_range", {result.search_range.lo, result.search_range.hi}}};
  rec["curve"] = nlohmann::json::array();
  for (const auto& [s, v] : result.curve) rec["curve"].push_back({s, v});
  return rec;
}

}  // namespace cellbox
