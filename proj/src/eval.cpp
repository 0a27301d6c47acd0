#include "copg/eval.hpp"

#include <algorithm>
#include <cmath>

#include "copg/errors.hpp"

namespace copg {

namespace {

// Predictions of one scene in canonical order, truncated to max_dets.
std::vector<Detection> canonical_top(const std::vector<Detection>& preds,
                                     int max_dets) {
  std::vector<Detection> sorted = preds;
  std::sort(sorted.begin(), sorted.end(), canonical_pred_less);
  if (static_cast<int>(sorted.size()) > max_dets) {
    sorted.resize(max_dets);
  }
  return sorted;
}

std::vector<GtBox> gts_in_band(const std::vector<GtBox>& gts,
                               const std::optional<AreaBand>& band) {
  if (!band.has_value()) {
    return gts;
  }
  std::vector<GtBox> kept;
  kept.reserve(gts.size());
  for (const GtBox& g : gts) {
    if (area_in_band(g.area, *band)) {
      kept.push_back(g);
    }
  }
  return kept;
}

void check_aligned(const DetectionScenes& preds, const GroundTruthScenes& gts) {
  if (preds.size() != gts.size()) {
    throw InvalidSpec("evaluation inputs must have one entry per scene on both sides");
  }
}

std::string role_of(const std::map<std::string, std::string>& class_map,
                    const std::string& category, const char* side) {
  const auto it = class_map.find(category);
  if (it == class_map.end()) {
    throw UnmappedCategory(std::string("class map does not cover ") + side +
                           " category '" + category + "'");
  }
  const std::string& role = it->second;
  if (role != "vehicle" && role != "pedestrian" && role != "cyclist" &&
      role != "novel" && role != "ignore") {
    throw InvalidSpec("class map role '" + role + "' is not one of "
                      "vehicle/pedestrian/cyclist/novel/ignore");
  }
  return role;
}

std::optional<double> average_defined(
    const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v.has_value()) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) {
    return std::nullopt;
  }
  return sum / n;
}

}  // namespace

const char* to_string(View view) {
  switch (view) {
    case View::kCorner:
      return "CORNER";
    case View::kCommon:
      return "COMMON";
    case View::kNovel:
      return "NOVEL";
  }
  return "unknown";
}

std::optional<View> view_from_string(const std::string& s) {
  if (s == "CORNER" || s == "corner") return View::kCorner;
  if (s == "COMMON" || s == "common") return View::kCommon;
  if (s == "NOVEL" || s == "novel") return View::kNovel;
  return std::nullopt;
}

bool area_in_band(double area, AreaBand band) {
  constexpr double kSmallMax = 32.0 * 32.0;
  constexpr double kMediumMax = 96.0 * 96.0;
  switch (band) {
    case AreaBand::kSmall:
      return area < kSmallMax;
    case AreaBand::kMedium:
      return area >= kSmallMax && area <= kMediumMax;
    case AreaBand::kLarge:
      return area > kMediumMax;
  }
  return false;
}

const std::vector<double>& coco_iou_thresholds() {
  static const std::vector<double> thresholds = [] {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) {
      t.push_back(0.50 + 0.05 * i);
    }
    return t;
  }();
  return thresholds;
}

bool canonical_pred_less(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.box.x != b.box.x) return a.box.x < b.box.x;
  if (a.box.y != b.box.y) return a.box.y < b.box.y;
  if (a.box.w != b.box.w) return a.box.w < b.box.w;
  if (a.box.h != b.box.h) return a.box.h < b.box.h;
  return a.category < b.category;
}

std::vector<std::pair<int, int>> greedy_match(const std::vector<Box2D>& preds,
                                              const std::vector<Box2D>& gts,
                                              double iou_threshold) {
  std::vector<std::pair<int, int>> matches;
  std::vector<bool> gt_used(gts.size(), false);
  for (std::size_t pi = 0; pi < preds.size(); ++pi) {
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_used[gi]) {
        continue;
      }
      const double overlap = iou(preds[pi], gts[gi]);
      if (overlap >= iou_threshold &&
          (best_gt < 0 || overlap > best_iou)) {
        best_gt = static_cast<int>(gi);
        best_iou = overlap;
      }
    }
    if (best_gt >= 0) {
      gt_used[best_gt] = true;
      matches.emplace_back(static_cast<int>(pi), best_gt);
    }
  }
  return matches;
}

std::optional<double> average_recall(const DetectionScenes& preds,
                                     const GroundTruthScenes& gts,
                                     const RecallOptions& opts) {
  check_aligned(preds, gts);
  const std::size_t n_scenes = preds.size();

  std::vector<std::vector<Box2D>> pred_boxes(n_scenes);
  std::vector<std::vector<Box2D>> gt_boxes(n_scenes);
  long total_gt = 0;
  for (std::size_t s = 0; s < n_scenes; ++s) {
    for (const Detection& d : canonical_top(preds[s], opts.max_dets)) {
      pred_boxes[s].push_back(d.box);
    }
    for (const GtBox& g : gts_in_band(gts[s], opts.area)) {
      gt_boxes[s].push_back(g.box);
    }
    total_gt += static_cast<long>(gt_boxes[s].size());
  }
  if (total_gt == 0) {
    return std::nullopt;
  }

  double recall_sum = 0.0;
  for (const double threshold : opts.iou_thresholds) {
    long matched = 0;
    for (std::size_t s = 0; s < n_scenes; ++s) {
      matched += static_cast<long>(
          greedy_match(pred_boxes[s], gt_boxes[s], threshold).size());
    }
    recall_sum += static_cast<double>(matched) / total_gt;
  }
  return recall_sum / opts.iou_thresholds.size();
}

std::optional<double> average_precision(const DetectionScenes& preds,
                                        const GroundTruthScenes& gts,
                                        int max_dets) {
  check_aligned(preds, gts);
  const std::size_t n_scenes = preds.size();

  std::vector<std::vector<Detection>> canon(n_scenes);
  long total_gt = 0;
  for (std::size_t s = 0; s < n_scenes; ++s) {
    canon[s] = canonical_top(preds[s], max_dets);
    total_gt += static_cast<long>(gts[s].size());
  }
  if (total_gt == 0) {
    return std::nullopt;
  }

  // Global order: score descending, ties keep scene-major canonical order.
  struct Entry {
    double score;
    int scene;
    int pos;
  };
  std::vector<Entry> order;
  for (std::size_t s = 0; s < n_scenes; ++s) {
    for (std::size_t p = 0; p < canon[s].size(); ++p) {
      order.push_back({canon[s][p].score, static_cast<int>(s),
                       static_cast<int>(p)});
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });

  double ap_sum = 0.0;
  for (const double threshold : coco_iou_thresholds()) {
    std::vector<std::vector<bool>> is_tp(n_scenes);
    for (std::size_t s = 0; s < n_scenes; ++s) {
      std::vector<Box2D> pb, gb;
      for (const Detection& d : canon[s]) {
        pb.push_back(d.box);
      }
      for (const GtBox& g : gts[s]) {
        gb.push_back(g.box);
      }
      is_tp[s].assign(pb.size(), false);
      for (const auto& [pi, gi] : greedy_match(pb, gb, threshold)) {
        is_tp[s][pi] = true;
      }
    }

    std::vector<double> precision, recall;
    precision.reserve(order.size());
    recall.reserve(order.size());
    long tp = 0, fp = 0;
    for (const Entry& e : order) {
      if (is_tp[e.scene][e.pos]) {
        ++tp;
      } else {
        ++fp;
      }
      precision.push_back(static_cast<double>(tp) / (tp + fp));
      recall.push_back(static_cast<double>(tp) / total_gt);
    }
    // Monotone precision envelope from the right.
    for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
      precision[i] = std::max(precision[i], precision[i + 1]);
    }
    double ap_t = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double r = k / 100.0;
      const auto it = std::lower_bound(recall.begin(), recall.end(), r);
      if (it != recall.end()) {
        ap_t += precision[it - recall.begin()];
      }
    }
    ap_sum += ap_t / 101.0;
  }
  return ap_sum / coco_iou_thresholds().size();
}

std::vector<ClassEvalInput> apply_class_separation(const DetectionScenes& preds,
                                                   const GroundTruthScenes& gts,
                                                   const ClassSeparation& sep) {
  check_aligned(preds, gts);
  const std::size_t n_scenes = preds.size();
  std::vector<ClassEvalInput> out;

  if (sep.view == View::kCorner) {
    ClassEvalInput entry;
    entry.class_name = "corner";
    entry.preds = preds;
    entry.gts = gts;
    for (auto& scene : entry.preds) {
      for (auto& d : scene) {
        d.category.clear();
      }
    }
    for (auto& scene : entry.gts) {
      for (auto& g : scene) {
        g.category.clear();
      }
    }
    out.push_back(std::move(entry));
    return out;
  }

  // COMMON and NOVEL consult the class map on both sides.
  std::vector<std::vector<std::string>> pred_roles(n_scenes), gt_roles(n_scenes);
  for (std::size_t s = 0; s < n_scenes; ++s) {
    for (const Detection& d : preds[s]) {
      pred_roles[s].push_back(role_of(sep.class_map, d.category, "prediction"));
    }
    for (const GtBox& g : gts[s]) {
      gt_roles[s].push_back(role_of(sep.class_map, g.category, "ground-truth"));
    }
  }

  auto collect = [&](const std::string& role) {
    ClassEvalInput entry;
    entry.class_name = role;
    entry.preds.resize(n_scenes);
    entry.gts.resize(n_scenes);
    for (std::size_t s = 0; s < n_scenes; ++s) {
      for (std::size_t i = 0; i < preds[s].size(); ++i) {
        if (pred_roles[s][i] == role) {
          entry.preds[s].push_back(preds[s][i]);
        }
      }
      for (std::size_t i = 0; i < gts[s].size(); ++i) {
        if (gt_roles[s][i] == role) {
          entry.gts[s].push_back(gts[s][i]);
        }
      }
    }
    return entry;
  };

  if (sep.view == View::kCommon) {
    for (const std::string& cls : sep.common_classes) {
      out.push_back(collect(cls));
    }
  } else {
    out.push_back(collect("novel"));
  }
  return out;
}

EvalReport evaluate(const DetectionScenes& preds, const GroundTruthScenes& gts,
                    const ClassSeparation& sep) {
  EvalReport report;
  report.view = sep.view;
  for (const auto& scene : preds) {
    report.num_proposals += static_cast<int>(scene.size());
    if (!scene.empty()) {
      ++report.num_scenes_with_proposals;
    }
  }

  auto metric_row = [](const ClassEvalInput& in) {
    MetricRow row;
    RecallOptions opts;
    row.ar = average_recall(in.preds, in.gts, opts);
    opts.iou_thresholds = {0.50};
    row.ar50 = average_recall(in.preds, in.gts, opts);
    opts.iou_thresholds = {0.75};
    row.ar75 = average_recall(in.preds, in.gts, opts);
    opts = RecallOptions{};
    opts.max_dets = 1;
    row.ar1 = average_recall(in.preds, in.gts, opts);
    opts.max_dets = 10;
    row.ar10 = average_recall(in.preds, in.gts, opts);
    opts = RecallOptions{};
    opts.area = AreaBand::kSmall;
    row.ar_small = average_recall(in.preds, in.gts, opts);
    opts.area = AreaBand::kMedium;
    row.ar_medium = average_recall(in.preds, in.gts, opts);
    opts.area = AreaBand::kLarge;
    row.ar_large = average_recall(in.preds, in.gts, opts);
    row.ap = average_precision(in.preds, in.gts);
    return row;
  };

  for (const ClassEvalInput& entry : apply_class_separation(preds, gts, sep)) {
    report.per_class.emplace_back(entry.class_name, metric_row(entry));
  }

  auto fold = [&](auto member) {
    std::vector<std::optional<double>> values;
    for (const auto& [name, row] : report.per_class) {
      values.push_back(row.*member);
    }
    return average_defined(values);
  };
  report.overall.ar = fold(&MetricRow::ar);
  report.overall.ar50 = fold(&MetricRow::ar50);
  report.overall.ar75 = fold(&MetricRow::ar75);
  report.overall.ar1 = fold(&MetricRow::ar1);
  report.overall.ar10 = fold(&MetricRow::ar10);
  report.overall.ar_small = fold(&MetricRow::ar_small);
  report.overall.ar_medium = fold(&MetricRow::ar_medium);
  report.overall.ar_large = fold(&MetricRow::ar_large);
  report.overall.ap = fold(&MetricRow::ap);
  return report;
}

}  // namespace copg
