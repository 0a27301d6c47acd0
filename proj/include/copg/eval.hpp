#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "copg/core.hpp"

namespace copg {

// Class-separation regimes: CORNER is class-agnostic over everything, COMMON
// evaluates per-class over the unified {pedestrian, cyclist, vehicle} set,
// NOVEL is class-agnostic over categories mapped to "novel".
enum class View { kCorner, kCommon, kNovel };

const char* to_string(View view);
std::optional<View> view_from_string(const std::string& s);

struct GtBox {
  Box2D box;
  std::string category;
  double area = 0.0;  // square pixels; loaders default it to w*h
};

// Scene-aligned inputs: preds[i] and gts[i] describe the same scene.
using DetectionScenes = std::vector<std::vector<Detection>>;
using GroundTruthScenes = std::vector<std::vector<GtBox>>;

// COCO box-scale bands: small < 32^2, medium 32^2..96^2, large > 96^2.
enum class AreaBand { kSmall, kMedium, kLarge };

bool area_in_band(double area, AreaBand band);

// The 10 thresholds 0.50:0.05:0.95.
const std::vector<double>& coco_iou_thresholds();

// Canonical evaluation order: score descending, ties by box coordinates and
// category. Makes every metric independent of input ordering.
bool canonical_pred_less(const Detection& a, const Detection& b);

// Greedy COCO matching: predictions (already score-sorted) each take the
// unmatched ground truth with the highest IoU >= threshold; ties go to the
// earliest ground truth. Returns (pred index, gt index) pairs.
std::vector<std::pair<int, int>> greedy_match(const std::vector<Box2D>& preds,
                                              const std::vector<Box2D>& gts,
                                              double iou_threshold);

struct RecallOptions {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  int max_dets = 100;
  std::optional<AreaBand> area;
};

// Recall of ground truths pooled over scenes, averaged over IoU thresholds,
// with at most max_dets top-scoring predictions per scene and ground truths
// restricted to the area band when one is given. Absent when no ground truth
// is in range (undefined, never 0).
std::optional<double> average_recall(const DetectionScenes& preds,
                                     const GroundTruthScenes& gts,
                                     const RecallOptions& opts = {});

// COCO AP: 101-point interpolated precision averaged over the 10 IoU
// thresholds, top max_dets predictions per scene. Absent when no ground truth
// exists.
std::optional<double> average_precision(const DetectionScenes& preds,
                                        const GroundTruthScenes& gts,
                                        int max_dets = 100);

struct ClassSeparation {
  View view = View::kCorner;
  std::set<std::string> common_classes = {"pedestrian", "cyclist", "vehicle"};
  // Category -> role, role in {vehicle, pedestrian, cyclist, novel, ignore}.
  // Applied to predictions and ground truths alike; consulted by the COMMON
  // and NOVEL views only (CORNER matches on boxes alone).
  std::map<std::string, std::string> class_map;
};

// One evaluation class after separation: COMMON yields one entry per common
// class, NOVEL and CORNER yield a single entry each.
struct ClassEvalInput {
  std::string class_name;
  DetectionScenes preds;
  GroundTruthScenes gts;
};

// Throws UnmappedCategory when a prediction or ground-truth category is
// missing from the class map (COMMON/NOVEL views).
std::vector<ClassEvalInput> apply_class_separation(const DetectionScenes& preds,
                                                   const GroundTruthScenes& gts,
                                                   const ClassSeparation& sep);

struct MetricRow {
  std::optional<double> ar, ar50, ar75, ar1, ar10;
  std::optional<double> ar_small, ar_medium, ar_large;
  std::optional<double> ap;
};

// All metric columns of the evaluation protocol for one view. Undefined
// metrics (no ground truth in range) stay absent and serialize as null.
struct EvalReport {
  View view = View::kCorner;
  MetricRow overall;
  std::vector<std::pair<std::string, MetricRow>> per_class;
  int num_proposals = 0;
  int num_scenes_with_proposals = 0;
};

// Runs the separation then every metric; the overall row averages the
// per-class rows over the classes where each metric is defined.
EvalReport evaluate(const DetectionScenes& preds, const GroundTruthScenes& gts,
                    const ClassSeparation& sep);

}  // namespace copg
