#ifndef REPSIM_DETECTION_HPP
#define REPSIM_DETECTION_HPP

// Cross-dataset detection evaluation: label mapping onto the five common
// classes, small-box filtering, IoU, and mAP@0.5 with all-points
// interpolated average precision.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/errors.hpp"

namespace repsim {

/// Axis-aligned box in pixels, top-left origin. Predictions carry a score;
/// ground truth does not.
struct BoundingBox {
  double x = 0.0, y = 0.0;  // top-left
  double w = 0.0, h = 0.0;
  std::string label;
  std::optional<double> score;
  std::string image_id;

  double area() const { return w * h; }
};

struct LabelMap {
  std::string name;
  std::map<std::string, std::string> mapping;  // source label -> common label
};

inline const std::vector<std::string>& common_labels() {
  static const std::vector<std::string> labels = {"person", "cycle", "car",
                                                  "bus", "truck"};
  return labels;
}

// Both built-in maps also send every common label to itself, so boxes that
// already use common labels (model predictions) pass through and mapping is
// idempotent.
inline LabelMap bdd_label_map() {
  return {"bdd",
          {{"person", "person"},
           {"rider", "person"},
           {"bike", "cycle"},
           {"motor", "cycle"},
           {"cycle", "cycle"},
           {"car", "car"},
           {"bus", "bus"},
           {"truck", "truck"}}};
}

inline LabelMap gtav_label_map() {
  return {"gtav",
          {{"person", "person"},
           {"bicycle", "cycle"},
           {"motorcycle", "cycle"},
           {"cycle", "cycle"},
           {"car", "car"},
           {"van", "car"},
           {"bus", "bus"},
           {"truck", "truck"},
           {"trailer", "truck"}}};
}

inline LabelMap load_label_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open label map " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    LabelMap m;
    m.name = path.stem().string();
    for (auto it = j.begin(); it != j.end(); ++it)
      m.mapping[it.key()] = it.value().get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("label map " + path.string() + ": " + e.what());
  }
}

/// Built-in table by name, else a JSON file of source->common pairs.
inline LabelMap resolve_label_map(const std::string& name_or_path) {
  if (name_or_path == "bdd") return bdd_label_map();
  if (name_or_path == "gtav") return gtav_label_map();
  return load_label_map(name_or_path);
}

/// Replaces every source label by its common label; geometry untouched.
inline std::vector<BoundingBox> map_labels(std::vector<BoundingBox> boxes,
                                           const LabelMap& m) {
  for (auto& b : boxes) {
    const auto it = m.mapping.find(b.label);
    if (it == m.mapping.end())
      throw UnknownLabel("label '" + b.label + "' is not in map '" + m.name +
                         "'");
    b.label = it->second;
  }
  return boxes;
}

/// Drops boxes with area strictly below min_area; order preserved.
inline std::vector<BoundingBox> filter_small(std::vector<BoundingBox> boxes,
                                             double min_area) {
  std::erase_if(boxes, [&](const BoundingBox& b) { return b.area() < min_area; });
  return boxes;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct ClassAp {
  std::string label;
  double ap = 0.0;
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
};

struct EvalResult {
  std::vector<ClassAp> per_class;        // classes present in ground truth
  std::vector<std::string> excluded;     // classes with no ground truth
  double map = 0.0;                      // unweighted mean over per_class
};

namespace detail {

// AP for one class: predictions already restricted to the class.
inline ClassAp class_ap(const std::string& label,
                        const std::vector<const BoundingBox*>& gt,
                        std::vector<const BoundingBox*> preds,
                        double iou_threshold) {
  ClassAp out;
  out.label = label;
  out.n_gt = gt.size();
  out.n_pred = preds.size();
  if (gt.empty()) return out;
  if (preds.empty()) return out;  // ap 0

  // Descending score; stable so tied scores keep input order.
  std::stable_sort(preds.begin(), preds.end(),
                   [](const BoundingBox* a, const BoundingBox* b) {
                     return *a->score > *b->score;
                   });

  // Ground truth per image, with a matched flag each.
  std::map<std::string, std::vector<std::size_t>> gt_by_image;
  for (std::size_t i = 0; i < gt.size(); ++i)
    gt_by_image[gt[i]->image_id].push_back(i);
  std::vector<bool> matched(gt.size(), false);

  std::vector<double> precision, recall;
  std::size_t tp = 0, fp = 0;
  for (const BoundingBox* p : preds) {
    // Best unmatched ground-truth box in this image; ties break toward the
    // lowest ground-truth index (the first encountered).
    double best = -1.0;
    std::size_t best_idx = 0;
    const auto it = gt_by_image.find(p->image_id);
    if (it != gt_by_image.end()) {
      for (std::size_t gi : it->second) {
        if (matched[gi]) continue;
        const double v = iou(*p, *gt[gi]);
        if (v > best) {
          best = v;
          best_idx = gi;
        }
      }
    }
    if (best >= iou_threshold) {
      matched[best_idx] = true;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt.size()));
  }

  // All-points interpolation: make precision non-increasing from the right,
  // then integrate the staircase over recall.
  for (std::size_t i = precision.size() - 1; i-- > 0;)
    precision[i] = std::max(precision[i], precision[i + 1]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  out.ap = ap;
  return out;
}

}  // namespace detail

/// mAP at the given IoU threshold over the listed classes. Predictions are
/// matched greedily in score order, each to the unmatched ground-truth box
/// of highest IoU in its image. Classes absent from the ground truth have
/// undefined AP and are excluded (and reported as such) rather than
/// averaged in as zero.
inline EvalResult map_at_50(const std::vector<BoundingBox>& gt,
                            const std::vector<BoundingBox>& pred,
                            const std::vector<std::string>& classes = common_labels(),
                            double iou_threshold = 0.5) {
  for (const auto& p : pred)
    if (!p.score)
      throw MissingScores("prediction without a score (image '" + p.image_id +
                          "', label '" + p.label + "')");

  EvalResult result;
  double sum = 0.0;
  for (const auto& label : classes) {
    std::vector<const BoundingBox*> g, p;
    for (const auto& b : gt)
      if (b.label == label) g.push_back(&b);
    for (const auto& b : pred)
      if (b.label == label) p.push_back(&b);
    if (g.empty()) {
      result.excluded.push_back(label);
      continue;
    }
    result.per_class.push_back(detail::class_ap(label, g, std::move(p), iou_threshold));
    sum += result.per_class.back().ap;
  }
  if (!result.per_class.empty())
    result.map = sum / static_cast<double>(result.per_class.size());
  return result;
}

/// JSON-lines box files: one object per line,
/// {"image_id": str, "label": str, "x": f, "y": f, "w": f, "h": f, "score": f?}.
inline std::vector<BoundingBox> load_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open box file " + path.string());
  std::vector<BoundingBox> boxes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      BoundingBox b;
      b.image_id = j.at("image_id").get<std::string>();
      b.label = j.at("label").get<std::string>();
      b.x = j.at("x").get<double>();
      b.y = j.at("y").get<double>();
      b.w = j.at("w").get<double>();
      b.h = j.at("h").get<double>();
      if (j.contains("score")) b.score = j.at("score").get<double>();
      if (b.w <= 0.0 || b.h <= 0.0)
        throw InputError(path.string() + ":" + std::to_string(line_no) +
                         ": box width/height must be positive");
      boxes.push_back(std::move(b));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return boxes;
}

}  // namespace repsim

#endif  // REPSIM_DETECTION_HPP
