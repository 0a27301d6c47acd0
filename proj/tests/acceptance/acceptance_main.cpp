// Acceptance suite: end-to-end checks of the shipped pipeline, evaluator and
// CLI against generator ground truth and independent oracles. Prints one
// PASS/FAIL line per criterion; the throughput target is soft and never fails
// the run.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "copg/commands.hpp"
#include "copg/eval.hpp"
#include "copg/ground.hpp"
#include "copg/io.hpp"
#include "copg/proposal.hpp"
#include "copg/range_cluster.hpp"
#include "copg/synth.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace copg;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  int id;
  bool pass;
  bool soft;
  std::string text;
};

std::vector<Criterion> g_results;

void record(int id, bool pass, const std::string& text, bool soft = false) {
  g_results.push_back({id, pass, soft, text});
  const char* tag = pass ? "[PASS]" : (soft ? "[SOFT]" : "[FAIL]");
  std::cout << tag << " criterion " << id << ": " << text << std::endl;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value, int digits = 3) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << value;
  return std::move(out).str();
}

// ---------------------------------------------------------------------------
// 1. Clustering oracle equivalence on randomized range images.
// ---------------------------------------------------------------------------

RangeImage random_range_image(std::mt19937& rng) {
  std::uniform_int_distribution<int> rows_dist(1, 32);
  std::uniform_int_distribution<int> cols_dist(2, 128);
  const int rows = rows_dist(rng);
  const int cols = cols_dist(rng);
  RangeImage img;
  img.rows = rows;
  img.cols = cols;
  img.range.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  img.point_index.assign(static_cast<std::size_t>(rows) * cols, -1);
  const double span = 26.8;
  for (int r = 0; r < rows; ++r) {
    img.row_angles.push_back(2.0 - (r + 0.5) * span / rows);
  }
  for (int c = 0; c < cols; ++c) {
    img.col_angles.push_back(-180.0 + (c + 0.5) * 360.0 / cols);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> dist(2.0, 40.0);
  const double base = dist(rng);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double p = unit(rng);
      if (p < 0.35) {
        continue;
      }
      const std::size_t at = img.idx(r, c);
      img.point_index[at] = static_cast<std::int32_t>(at);
      img.range[at] = p < 0.65 ? dist(rng) : base + 0.02 * r + 0.4 * unit(rng);
    }
  }
  return img;
}

void criterion_1() {
  const auto start = Clock::now();
  std::mt19937 rng(20240501);
  int equal = 0;
  const int total = 500;
  for (int i = 0; i < total; ++i) {
    const RangeImage img = random_range_image(rng);
    const ClusterLabels labels = cluster_range_image(img, 8.0);
    const auto reference = oracle::connected_components(img, 8.0);
    if (oracle::labels_equivalent(labels.label, reference)) {
      ++equal;
    }
  }
  const double elapsed = seconds_since(start);
  record(1, equal == total && elapsed < 60.0,
         "clustering equals union-find components on " + std::to_string(equal) +
             "/" + std::to_string(total) + " random range images in " +
             fmt(elapsed, 1) + "s (limit 60s)");
}

// ---------------------------------------------------------------------------
// 2. Merge-angle identities.
// ---------------------------------------------------------------------------

void criterion_2() {
  double worst = 0.0;
  for (double d = 0.5; d <= 80.0; d *= 2.0) {
    for (double alpha = 0.1; alpha <= 45.0; alpha += 0.37) {
      const double beta = merge_angle(d, d, alpha);
      worst = std::max(worst, std::abs(beta - (90.0 - alpha / 2.0)));
    }
  }
  bool symmetric = true;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.1, 90.0);
  for (int i = 0; i < 10000; ++i) {
    const double d1 = dist(rng), d2 = dist(rng), a = dist(rng) / 2.0 + 0.01;
    if (merge_angle(d1, d2, a) != merge_angle(d2, d1, a)) {
      symmetric = false;
      break;
    }
  }
  record(2, worst <= 1e-9 && symmetric,
         "beta(d,d,alpha) = 90 - alpha/2 within " + fmt(worst * 1e9, 3) +
             "e-9 deg; argument order symmetric exactly");
}

// ---------------------------------------------------------------------------
// 3 + 4. Ground recovery and end-to-end recovery on the default corpus.
// ---------------------------------------------------------------------------

void criteria_3_and_4() {
  const auto start = Clock::now();
  const std::vector<SceneSpec> specs = generate_corpus(50, 7, CorpusKnobs{});
  const PipelineConfig cfg;

  double worst_recall = 1.0, worst_precision = 1.0;
  int ground_scenes_ok = 0;

  DetectionScenes corner_preds;
  GroundTruthScenes corner_gts;
  int suppression_violations = 0;
  int commons_with_detection = 0;

  for (const SceneSpec& spec : specs) {
    const SyntheticScene scene = generate_scene(spec);

    // Ground recovery against generator labels.
    const Plane plane = fit_ground_plane(
        scene.bundle.cloud,
        {cfg.ransac_iterations, cfg.ransac_inlier_dist, cfg.seed,
         cfg.ground_max_tilt_deg});
    const GroundSplit split =
        split_ground(scene.bundle.cloud, plane, cfg.ransac_inlier_dist);
    long truth_ground = 0, found_truth = 0;
    for (const PointLabel& label : scene.truth.point_labels) {
      truth_ground += label.is_ground;
    }
    for (const std::int32_t i : split.ground_indices) {
      found_truth += scene.truth.point_labels[i].is_ground;
    }
    const double recall =
        truth_ground > 0 ? static_cast<double>(found_truth) / truth_ground : 1.0;
    const double precision =
        !split.ground_indices.empty()
            ? static_cast<double>(found_truth) / split.ground_indices.size()
            : 1.0;
    worst_recall = std::min(worst_recall, recall);
    worst_precision = std::min(worst_precision, precision);
    ground_scenes_ok += recall >= 0.99 && precision >= 0.99;

    // Full pipeline with perfect segmentation and detections.
    const PipelineRun run = run_pipeline(scene.bundle, cfg);

    std::vector<Detection> preds;
    for (const Proposal& p : run.final_proposals.proposals) {
      preds.push_back({p.box, "proposal", p.score});

      // Attribute the proposal to the object owning most of its points.
      const Cluster* cluster = nullptr;
      for (const Cluster& c : run.clusters) {
        if (c.id == p.source_cluster_id) {
          cluster = &c;
          break;
        }
      }
      std::map<std::int32_t, int> votes;
      for (const std::int32_t pi : cluster->point_indices) {
        ++votes[scene.truth.point_labels[pi].object];
      }
      std::int32_t majority = -1;
      int best = -1;
      for (const auto& [obj, count] : votes) {
        if (count > best) {
          best = count;
          majority = obj;
        }
      }
      if (majority >= 0 &&
          scene.truth.objects[majority].kind == ObjectKind::kCommon &&
          scene.truth.objects[majority].gt_box.has_value()) {
        ++suppression_violations;
      }
    }
    corner_preds.push_back(std::move(preds));

    std::vector<GtBox> gts;
    for (const ObjectTruth& truth : scene.truth.objects) {
      if (truth.kind == ObjectKind::kCorner && truth.gt_box.has_value()) {
        gts.push_back({*truth.gt_box, truth.category, truth.gt_box->area()});
      }
      if (truth.kind == ObjectKind::kCommon && truth.gt_box.has_value()) {
        ++commons_with_detection;
      }
    }
    corner_gts.push_back(std::move(gts));
  }

  record(3, worst_recall >= 0.99 && worst_precision >= 0.99,
         "RANSAC ground split on 50 scenes: worst recall " +
             fmt(worst_recall, 4) + ", worst precision " +
             fmt(worst_precision, 4) + " (both required >= 0.99), " +
             std::to_string(ground_scenes_ok) + "/50 scenes pass");

  RecallOptions ar50;
  ar50.iou_thresholds = {0.50};
  const auto recall50 = average_recall(corner_preds, corner_gts, ar50);
  const double elapsed = seconds_since(start);
  const bool pass = recall50.has_value() && *recall50 >= 0.90 &&
                    suppression_violations == 0 && elapsed < 120.0;
  record(4, pass,
         "end-to-end on 50 scenes: corner-case AR50 " +
             (recall50 ? fmt(*recall50, 4) : std::string("undefined")) +
             " (required >= 0.90); " + std::to_string(suppression_violations) +
             " of " + std::to_string(commons_with_detection) +
             " detected common objects survived (required 0); " +
             fmt(elapsed, 1) + "s (limit 120s)");
}

// ---------------------------------------------------------------------------
// 5. Ablation trend reproduction.
// ---------------------------------------------------------------------------

long total_finals(const std::vector<SceneBundle>& bundles,
                  const PipelineConfig& cfg) {
  long total = 0;
  for (const SceneOutcome& o : run_batch(bundles, cfg, 0)) {
    total += o.run.num_final;
  }
  return total;
}

void criterion_5() {
  SceneSpec base;
  base.rows = 32;
  base.cols = 1024;
  const auto specs = generate_corpus(50, 7, CorpusKnobs{}, base);
  std::vector<SceneBundle> bundles;
  bundles.reserve(specs.size());
  for (const SceneSpec& spec : specs) {
    bundles.push_back(generate_scene(spec).bundle);
  }
  PipelineConfig cfg;
  cfg.range_rows = base.rows;
  cfg.range_cols = base.cols;

  std::ostringstream detail;
  bool pass = true;

  auto sweep = [&](const char* name, const std::vector<double>& values,
                   auto setter, bool nondecreasing) {
    std::vector<long> counts;
    for (const double value : values) {
      PipelineConfig variant = cfg;
      setter(variant, value);
      counts.push_back(total_finals(bundles, variant));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < counts.size(); ++i) {
      monotone &= nondecreasing ? counts[i] >= counts[i - 1]
                                : counts[i] <= counts[i - 1];
    }
    pass &= monotone;
    detail << name << " #Proposals";
    for (const long c : counts) {
      detail << " " << c;
    }
    detail << (monotone ? " ok; " : " NOT MONOTONE; ");
  };

  sweep("bg_ratio_max {0.15..0.75}", {0.15, 0.30, 0.45, 0.60, 0.75},
        [](PipelineConfig& c, double v) { c.bg_ratio_max = v; }, true);
  sweep("suppression_iou_max {0,0.25,0.5}", {0.0, 0.25, 0.5},
        [](PipelineConfig& c, double v) { c.suppression_iou_max = v; }, true);
  sweep("max_cluster_distance {25,50,100}", {25, 50, 100},
        [](PipelineConfig& c, double v) { c.max_cluster_distance = v; }, true);
  sweep("min_cluster_points {5,10,20}", {5, 10, 20},
        [](PipelineConfig& c, double v) {
          c.min_cluster_points = static_cast<int>(v);
        },
        false);

  // The ablation command reproduces the table structure (param value, AP,
  // AR, #Proposals, #Scenes) through the file interface.
  const fs::path work = fs::temp_directory_path() / "copg_acceptance_ablate";
  fs::remove_all(work);
  fs::create_directories(work);
  SynthOptions synth;
  write_file_atomic(work / "spec.json",
                    R"({"n": 12, "seed": 3, "rows": 32, "cols": 1024})");
  synth.spec_path = work / "spec.json";
  synth.out_dir = work / "corpus";
  cmd_synth(synth);
  write_file_atomic(work / "ablation.json",
                    R"({"parameter": "bg_ratio_max",
                        "values": [0.15, 0.30, 0.45, 0.60, 0.75],
                        "overrides": {"range_image.rows": 32,
                                      "range_image.cols": 1024}})");
  auto file_sweep = [&](const std::string& parameter,
                        const std::string& values, std::size_t n_values) {
    write_file_atomic(work / "ablation.json",
                      std::string("{\"parameter\": \"") + parameter +
                          "\", \"values\": " + values +
                          ", \"overrides\": {\"range_image.rows\": 32, "
                          "\"range_image.cols\": 1024}}");
    AblateOptions ablate;
    ablate.corpus_dir = work / "corpus";
    ablate.spec_path = work / "ablation.json";
    ablate.out_path = work / "table.csv";
    cmd_ablate(ablate);
    std::ifstream csv(work / "table.csv");
    std::string header;
    std::getline(csv, header);
    const bool columns_ok =
        header == parameter + ",AP,AR,#Proposals,#Scenes";
    std::vector<long> counts;
    std::string line;
    while (std::getline(csv, line)) {
      const auto last = line.rfind(',');
      const auto second_last = line.rfind(',', last - 1);
      counts.push_back(
          std::stol(line.substr(second_last + 1, last - second_last - 1)));
    }
    bool monotone = counts.size() == n_values;
    for (std::size_t i = 1; i < counts.size(); ++i) {
      monotone &= counts[i] >= counts[i - 1];
    }
    return columns_ok && monotone;
  };
  const bool bg_file_ok =
      file_sweep("bg_ratio_max", "[0.15, 0.30, 0.45, 0.60, 0.75]", 5);
  const bool iou_file_ok =
      file_sweep("suppression_iou_max", "[0.0, 0.25, 0.5]", 3);
  pass &= bg_file_ok && iou_file_ok;
  detail << "ablate CSV columns "
         << (bg_file_ok && iou_file_ok ? "match (param,AP,AR,#Proposals,#Scenes)"
                                       : "DO NOT MATCH");
  fs::remove_all(work);

  record(5, pass, detail.str());
}

// ---------------------------------------------------------------------------
// 6 + 7. Evaluation oracle equivalence and metric identities.
// ---------------------------------------------------------------------------

struct RandomInstance {
  DetectionScenes preds;
  GroundTruthScenes gts;
};

RandomInstance random_instance(std::mt19937& rng) {
  std::uniform_int_distribution<int> scene_count(1, 3);
  std::uniform_int_distribution<int> item_count(0, 6);
  std::uniform_real_distribution<double> coord(0.0, 60.0);
  std::uniform_real_distribution<double> size(2.0, 30.0);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  RandomInstance inst;
  const int scenes = scene_count(rng);
  inst.preds.resize(scenes);
  inst.gts.resize(scenes);
  for (int s = 0; s < scenes; ++s) {
    for (int i = item_count(rng); i > 0; --i) {
      const Box2D box{coord(rng), coord(rng), size(rng), size(rng)};
      inst.gts[s].push_back({box, "obj", box.w * box.h});
    }
    for (int i = item_count(rng); i > 0; --i) {
      double sc = score(rng);
      if (i % 2 == 0) {
        sc = std::round(sc * 4) / 4;  // exercise score ties
      }
      if (!inst.gts[s].empty() && i % 2 == 1) {
        const Box2D& base = inst.gts[s][i % inst.gts[s].size()].box;
        inst.preds[s].push_back(
            {{base.x + (score(rng) - 0.5) * 8, base.y + (score(rng) - 0.5) * 8,
              base.w * (0.8 + 0.4 * score(rng)),
              base.h * (0.8 + 0.4 * score(rng))},
             "obj",
             sc});
      } else {
        inst.preds[s].push_back(
            {{coord(rng), coord(rng), size(rng), size(rng)}, "obj", sc});
      }
    }
  }
  return inst;
}

void criteria_6_and_7() {
  std::mt19937 rng(987654);
  int matched = 0;
  const int total = 1000;
  double worst = 0.0;
  bool ordering_ok = true;

  for (int i = 0; i < total; ++i) {
    const RandomInstance inst = random_instance(rng);
    bool all_equal = true;

    std::optional<double> ar_by_dets[3];
    const int det_limits[3] = {1, 10, 100};
    for (int k = 0; k < 3; ++k) {
      RecallOptions opts;
      opts.max_dets = det_limits[k];
      const auto got = average_recall(inst.preds, inst.gts, opts);
      const auto expected = oracle::average_recall(
          inst.preds, inst.gts, coco_iou_thresholds(), det_limits[k]);
      ar_by_dets[k] = got;
      if (got.has_value() != expected.has_value()) {
        all_equal = false;
      } else if (got.has_value()) {
        const double diff = std::abs(*got - *expected);
        worst = std::max(worst, diff);
        all_equal &= diff <= 1e-9;
      }
    }
    if (ar_by_dets[0].has_value()) {
      ordering_ok &= *ar_by_dets[0] <= *ar_by_dets[1] + 1e-15;
      ordering_ok &= *ar_by_dets[1] <= *ar_by_dets[2] + 1e-15;
    }

    const auto got_ap = average_precision(inst.preds, inst.gts);
    const auto expected_ap = oracle::average_precision(inst.preds, inst.gts);
    if (got_ap.has_value() != expected_ap.has_value()) {
      all_equal = false;
    } else if (got_ap.has_value()) {
      const double diff = std::abs(*got_ap - *expected_ap);
      worst = std::max(worst, diff);
      all_equal &= diff <= 1e-9;
    }
    matched += all_equal;
  }
  record(6, matched == total,
         "AR and AP match the brute-force re-simulation on " +
             std::to_string(matched) + "/" + std::to_string(total) +
             " random instances (worst diff " + fmt(worst * 1e12, 3) + "e-12)");

  // Perfect predictions give AR exactly 1.
  bool perfect_ok = true;
  std::mt19937 rng7(13);
  for (int i = 0; i < 50; ++i) {
    RandomInstance inst = random_instance(rng7);
    bool any = false;
    for (std::size_t s = 0; s < inst.gts.size(); ++s) {
      inst.preds[s].clear();
      for (const GtBox& g : inst.gts[s]) {
        inst.preds[s].push_back({g.box, g.category, 1.0});
        any = true;
      }
    }
    if (!any) {
      continue;
    }
    const auto ar = average_recall(inst.preds, inst.gts);
    perfect_ok &= ar.has_value() && *ar == 1.0;
  }

  // CORNER view is invariant to erasing category labels.
  bool corner_ok = true;
  std::mt19937 rng8(17);
  const char* names[] = {"car", "dog", "unknown"};
  for (int i = 0; i < 50; ++i) {
    RandomInstance inst = random_instance(rng8);
    int k = 0;
    for (auto& scene : inst.preds) {
      for (auto& d : scene) {
        d.category = names[k++ % 3];
      }
    }
    const ClassSeparation sep{View::kCorner, {}, {}};
    const EvalReport labeled = evaluate(inst.preds, inst.gts, sep);
    for (auto& scene : inst.preds) {
      for (auto& d : scene) {
        d.category.clear();
      }
    }
    const EvalReport erased = evaluate(inst.preds, inst.gts, sep);
    corner_ok &= labeled.overall.ar == erased.overall.ar &&
                 labeled.overall.ap == erased.overall.ap &&
                 labeled.overall.ar50 == erased.overall.ar50;
  }

  record(7, perfect_ok && ordering_ok && corner_ok,
         std::string("AR(preds == gts) = 1.0 exactly: ") +
             (perfect_ok ? "yes" : "NO") +
             "; AR^1 <= AR^10 <= AR^100 on all tested sets: " +
             (ordering_ok ? "yes" : "NO") +
             "; CORNER AR invariant to label erasure: " +
             (corner_ok ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 8. Worker-count determinism of cmd_propose.
// ---------------------------------------------------------------------------

nlohmann::json manifest_without_timings(const fs::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  for (auto& scene : j["scenes"]) {
    scene.erase("timings_ms");
  }
  return j;
}

void criterion_8() {
  const fs::path work = fs::temp_directory_path() / "copg_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  write_file_atomic(work / "spec.json",
                    R"({"n": 10, "seed": 77, "rows": 32, "cols": 1024})");
  SynthOptions synth;
  synth.spec_path = work / "spec.json";
  synth.out_dir = work / "corpus";
  cmd_synth(synth);

  ProposeOptions propose;
  propose.corpus_dir = work / "corpus";
  propose.overrides = {"range_image.rows=32", "range_image.cols=1024"};
  propose.out_dir = work / "out1";
  propose.workers = 1;
  const int rc1 = cmd_propose(propose);
  propose.out_dir = work / "outN";
  propose.workers = 4;
  const int rcN = cmd_propose(propose);

  bool identical = rc1 == 0 && rcN == 0;
  int files = 0;
  for (const auto& entry :
       fs::recursive_directory_iterator(work / "out1")) {
    if (!entry.is_regular_file() ||
        entry.path().filename() == "manifest.json") {
      continue;
    }
    const fs::path other =
        work / "outN" / fs::relative(entry.path(), work / "out1");
    identical &= fs::exists(other) &&
                 read_file(entry.path()) == read_file(other);
    ++files;
  }
  // Manifests carry wall-clock stage timings; compare them with the timing
  // fields stripped.
  const bool manifests_match =
      manifest_without_timings(work / "out1/manifest.json") ==
      manifest_without_timings(work / "outN/manifest.json");
  fs::remove_all(work);

  record(8, identical && files >= 11 && manifests_match,
         "propose with 1 and 4 workers: " + std::to_string(files) +
             " proposal files byte-identical; manifests equal modulo stage "
             "timings");
}

// ---------------------------------------------------------------------------
// 9. Throughput soft target.
// ---------------------------------------------------------------------------

void criterion_9() {
  const auto specs = generate_corpus(1, 900, CorpusKnobs{});
  const SyntheticScene scene = generate_scene(specs[0]);
  const PipelineConfig cfg;
  run_pipeline(scene.bundle, cfg);  // warm-up
  double best = 1e9;
  for (int i = 0; i < 3; ++i) {
    const PipelineRun run = run_pipeline(scene.bundle, cfg);
    best = std::min(best,
                    run.stage_ms[0] + run.stage_ms[1] + run.stage_ms[2]);
  }
  record(9, best < 100.0,
         "ground removal + clustering + proposal generation on a 64x2048 "
         "scene (" +
             std::to_string(scene.bundle.cloud.size()) + " points): " +
             fmt(best, 1) + " ms (soft target < 100 ms)",
         /*soft=*/true);
}

}  // namespace

int main() {
  std::cout << "copg acceptance suite\n";
  criterion_1();
  criterion_2();
  criteria_3_and_4();
  criterion_5();
  criteria_6_and_7();
  criterion_8();
  criterion_9();

  int hard_failures = 0;
  for (const Criterion& c : g_results) {
    if (!c.pass && !c.soft) {
      ++hard_failures;
    }
  }
  std::cout << (hard_failures == 0 ? "ALL CRITERIA PASSED"
                                   : std::to_string(hard_failures) +
                                         " CRITERIA FAILED")
            << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
