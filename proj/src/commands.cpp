#include "copg/commands.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "copg/errors.hpp"

namespace copg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) {
      workers = 1;
    }
  }
  workers = std::min(workers, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
}

std::string round3(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << value;
  return std::move(out).str();
}

json optional_metric(const std::optional<double>& v) {
  if (v.has_value()) {
    return *v;
  }
  return nullptr;
}

CocoDoc proposals_to_coco(const std::vector<const SceneBundle*>& bundles,
                          const std::vector<const SceneOutcome*>& outcomes,
                          const std::vector<int>& image_ids) {
  CocoDoc doc;
  doc.categories.push_back({1, "proposal"});
  int ann_id = 1;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const SceneBundle& bundle = *bundles[i];
    doc.images.push_back({image_ids[i], bundle.scene_id,
                          bundle.cam.image_width, bundle.cam.image_height});
    for (const Proposal& p : outcomes[i]->run.final_proposals.proposals) {
      CocoAnnotation ann;
      ann.id = ann_id++;
      ann.image_id = image_ids[i];
      ann.bbox = p.box;
      ann.category_id = 1;
      ann.score = p.score;
      ann.area = p.box.area();
      ann.stage = to_string(p.stage);
      ann.source_cluster_id = p.source_cluster_id;
      doc.annotations.push_back(std::move(ann));
    }
  }
  return doc;
}

// Scene-aligned join of two COCO docs over the union of their image ids.
void align_by_image(const CocoDoc& pred_doc, const CocoDoc& gt_doc,
                    DetectionScenes& preds, GroundTruthScenes& gts) {
  std::map<int, std::pair<std::vector<Detection>, std::vector<GtBox>>> by_id;
  for (const CocoImage& im : pred_doc.images) {
    by_id[im.id];
  }
  for (const CocoImage& im : gt_doc.images) {
    by_id[im.id];
  }
  for (const CocoAnnotation& a : pred_doc.annotations) {
    by_id[a.image_id].first.push_back(
        {a.bbox, pred_doc.category_name(a.category_id), a.score.value_or(1.0)});
  }
  for (const CocoAnnotation& a : gt_doc.annotations) {
    by_id[a.image_id].second.push_back(
        {a.bbox, gt_doc.category_name(a.category_id),
         a.area.value_or(a.bbox.area())});
  }
  preds.clear();
  gts.clear();
  for (auto& [id, pair] : by_id) {
    preds.push_back(std::move(pair.first));
    gts.push_back(std::move(pair.second));
  }
}

struct AblationRow {
  double value = 0.0;
  std::optional<double> ap;
  std::optional<double> ar;
  int num_proposals = 0;
  int num_scenes = 0;
};

const std::map<std::string, std::string>& ablation_parameters() {
  static const std::map<std::string, std::string> params = {
      {"theta_min", "cluster.theta_min"},
      {"min_cluster_points", "cluster.min_cluster_points"},
      {"max_cluster_distance", "cluster.max_cluster_distance"},
      {"bg_ratio_max", "filter.bg_ratio_max"},
      {"suppression_iou_max", "filter.suppression_iou_max"},
  };
  return params;
}

}  // namespace

std::vector<fs::path> discover_scene_dirs(const fs::path& corpus_dir) {
  if (!fs::is_directory(corpus_dir)) {
    throw IoError("corpus directory not found: " + corpus_dir.string());
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "points.bin")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

SceneBundle load_scene_bundle(const fs::path& scene_dir) {
  SceneBundle bundle;
  bundle.scene_id = scene_dir.filename().string();
  bundle.cloud = load_point_cloud(scene_dir / "points.bin");
  bundle.cam = load_camera_model(scene_dir / "calib.json");
  if (fs::exists(scene_dir / "seg.pgm")) {
    SegMap seg = load_seg_map(scene_dir / "seg.pgm");
    if (seg.width != bundle.cam.image_width ||
        seg.height != bundle.cam.image_height) {
      throw ParseError(bundle.scene_id +
                       ": seg map dimensions do not match the calibration");
    }
    bundle.seg = std::move(seg);
  }
  if (fs::exists(scene_dir / "detections.json")) {
    const CocoDoc doc = load_coco(scene_dir / "detections.json");
    std::vector<Detection> dets;
    for (const CocoAnnotation& a : doc.annotations) {
      dets.push_back(
          {a.bbox, doc.category_name(a.category_id), a.score.value_or(1.0)});
    }
    bundle.detections = std::move(dets);
  }
  return bundle;
}

std::vector<SceneOutcome> run_batch(const std::vector<SceneBundle>& scenes,
                                    const PipelineConfig& cfg, int workers) {
  std::vector<SceneOutcome> outcomes(scenes.size());
  parallel_for(static_cast<int>(scenes.size()), workers, [&](int i) {
    outcomes[i].scene_id = scenes[i].scene_id;
    try {
      outcomes[i].run = run_pipeline(scenes[i], cfg);
      outcomes[i].ok = true;
    } catch (const std::exception& e) {
      outcomes[i].ok = false;
      outcomes[i].error = scenes[i].scene_id + ": " + e.what();
    }
  });
  return outcomes;
}

json manifest_json(const std::string& corpus, const PipelineConfig& cfg,
                   const std::vector<SceneOutcome>& outcomes) {
  json scenes = json::array();
  int errors = 0;
  long total_final = 0;
  for (const SceneOutcome& o : outcomes) {
    json s;
    s["scene_id"] = o.scene_id;
    s["status"] = o.ok ? "ok" : "error";
    if (!o.ok) {
      ++errors;
      s["error"] = o.error;
    } else {
      json skipped = json::array();
      for (const PipelineStage stage : o.run.skipped_stages) {
        skipped.push_back(to_string(stage));
      }
      s["skipped_stages"] = skipped;
      s["num_initial"] = o.run.num_initial;
      s["num_intermediate"] = o.run.num_intermediate;
      s["num_final"] = o.run.num_final;
      s["timings_ms"] = {
          {"ground_removal", o.run.stage_ms[0]},
          {"clustering", o.run.stage_ms[1]},
          {"projection", o.run.stage_ms[2]},
          {"background_removal", o.run.stage_ms[3]},
          {"common_suppression", o.run.stage_ms[4]},
          {"total", o.run.total_ms},
      };
      total_final += o.run.num_final;
    }
    scenes.push_back(std::move(s));
  }
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"corpus", corpus},
          {"config", config_to_json(cfg)},
          {"num_scenes", outcomes.size()},
          {"num_errors", errors},
          {"total_final_proposals", total_final},
          {"scenes", scenes}};
}

json report_to_json(const EvalReport& report) {
  auto row_json = [](const MetricRow& row) {
    return json{{"AR", optional_metric(row.ar)},
                {"AR50", optional_metric(row.ar50)},
                {"AR75", optional_metric(row.ar75)},
                {"AR1", optional_metric(row.ar1)},
                {"AR10", optional_metric(row.ar10)},
                {"AR_small", optional_metric(row.ar_small)},
                {"AR_medium", optional_metric(row.ar_medium)},
                {"AR_large", optional_metric(row.ar_large)},
                {"AP", optional_metric(row.ap)}};
  };
  json per_class;
  for (const auto& [name, row] : report.per_class) {
    per_class[name] = row_json(row);
  }
  json j = row_json(report.overall);
  j["view"] = to_string(report.view);
  j["num_proposals"] = report.num_proposals;
  j["num_scenes_with_proposals"] = report.num_scenes_with_proposals;
  j["per_class"] = per_class;
  return j;
}

void print_report_table(const EvalReport& report, std::ostream& out) {
  const char* headers[] = {"AR",   "AR50", "AR75", "AR^1", "AR^10",
                           "AR^s", "AR^m", "AR^l", "AP"};
  const std::optional<double> values[] = {
      report.overall.ar,       report.overall.ar50,   report.overall.ar75,
      report.overall.ar1,      report.overall.ar10,   report.overall.ar_small,
      report.overall.ar_medium, report.overall.ar_large, report.overall.ap};
  out << std::left << std::setw(8) << "view";
  for (const char* h : headers) {
    out << std::setw(8) << h;
  }
  out << std::setw(12) << "#Proposals" << std::setw(8) << "#Scenes" << "\n";
  out << std::left << std::setw(8) << to_string(report.view);
  for (const auto& v : values) {
    out << std::setw(8) << (v.has_value() ? round3(*v) : "-");
  }
  out << std::setw(12) << report.num_proposals << std::setw(8)
      << report.num_scenes_with_proposals << "\n";
}

ClassSeparation load_class_separation(const std::optional<fs::path>& path,
                                      View view) {
  ClassSeparation sep;
  sep.view = view;
  if (!path.has_value()) {
    if (view != View::kCorner) {
      throw ParseError("the COMMON and NOVEL views need a class map file");
    }
    return sep;
  }
  json j;
  try {
    j = json::parse(read_file(*path));
    if (j.contains("common_classes")) {
      sep.common_classes.clear();
      for (const auto& c : j["common_classes"]) {
        sep.common_classes.insert(c.get<std::string>());
      }
    }
    for (const auto& [category, role] : j.at("map").items()) {
      sep.class_map[category] = role.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError(path->string() + ": " + e.what());
  }
  return sep;
}

int cmd_propose(const ProposeOptions& opts) {
  PipelineConfig cfg;
  if (opts.config_path.has_value()) {
    cfg = load_config(*opts.config_path);
  }
  for (const std::string& assignment : opts.overrides) {
    apply_config_override(cfg, assignment);
  }
  validate_config(cfg);

  const std::vector<fs::path> dirs = discover_scene_dirs(opts.corpus_dir);

  std::vector<SceneBundle> bundles;
  std::vector<SceneOutcome> load_failures;
  std::vector<int> bundle_image_ids;
  bundles.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    try {
      bundles.push_back(load_scene_bundle(dirs[i]));
      bundle_image_ids.push_back(static_cast<int>(i));
    } catch (const std::exception& e) {
      SceneOutcome failure;
      failure.scene_id = dirs[i].filename().string();
      failure.ok = false;
      failure.error = failure.scene_id + ": " + e.what();
      load_failures.push_back(std::move(failure));
    }
  }

  std::vector<SceneOutcome> outcomes = run_batch(bundles, cfg, opts.workers);

  fs::create_directories(opts.out_dir / "proposals");
  std::vector<const SceneBundle*> merged_bundles;
  std::vector<const SceneOutcome*> merged_outcomes;
  std::vector<int> merged_ids;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    if (!outcomes[i].ok) {
      continue;
    }
    const std::vector<const SceneBundle*> one_bundle = {&bundles[i]};
    const std::vector<const SceneOutcome*> one_outcome = {&outcomes[i]};
    const CocoDoc doc =
        proposals_to_coco(one_bundle, one_outcome, {bundle_image_ids[i]});
    save_coco(doc, opts.out_dir / "proposals" / (bundles[i].scene_id + ".json"));
    merged_bundles.push_back(&bundles[i]);
    merged_outcomes.push_back(&outcomes[i]);
    merged_ids.push_back(bundle_image_ids[i]);
  }
  save_coco(proposals_to_coco(merged_bundles, merged_outcomes, merged_ids),
            opts.out_dir / "proposals.json");

  // Manifest covers load failures and pipeline outcomes in scene order.
  std::vector<SceneOutcome> all;
  all.reserve(load_failures.size() + outcomes.size());
  for (auto& o : outcomes) {
    all.push_back(std::move(o));
  }
  for (auto& o : load_failures) {
    all.push_back(std::move(o));
  }
  std::sort(all.begin(), all.end(),
            [](const SceneOutcome& a, const SceneOutcome& b) {
              return a.scene_id < b.scene_id;
            });
  const json manifest = manifest_json(opts.corpus_dir.string(), cfg, all);
  write_file_atomic(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");

  int errors = 0;
  for (const SceneOutcome& o : all) {
    if (!o.ok) {
      ++errors;
      std::cerr << "error: " << o.error << "\n";
    }
  }
  std::cout << "propose: " << all.size() << " scene(s), " << errors
            << " error(s), " << manifest["total_final_proposals"]
            << " final proposal(s) -> " << opts.out_dir.string() << "\n";
  return errors == 0 ? 0 : 1;
}

int cmd_evaluate(const EvaluateOptions& opts) {
  const auto view = view_from_string(opts.view);
  if (!view.has_value()) {
    throw ParseError("unknown view '" + opts.view +
                     "' (expected CORNER, COMMON, or NOVEL)");
  }
  const CocoDoc pred_doc = load_coco(opts.proposals_path);
  const CocoDoc gt_doc = load_coco(opts.gt_path);
  const ClassSeparation sep =
      load_class_separation(opts.class_map_path, *view);

  DetectionScenes preds;
  GroundTruthScenes gts;
  align_by_image(pred_doc, gt_doc, preds, gts);

  EvalReport report;
  try {
    report = evaluate(preds, gts, sep);
  } catch (const UnmappedCategory& e) {
    throw UnmappedCategory(
        std::string(e.what()) + " (map: " +
        (opts.class_map_path ? opts.class_map_path->string() : "<none>") +
        ", proposals: " + opts.proposals_path.string() +
        ", gt: " + opts.gt_path.string() + ")");
  }
  print_report_table(report, std::cout);
  if (opts.out_path.has_value()) {
    write_file_atomic(*opts.out_path, report_to_json(report).dump(2) + "\n");
  }
  return 0;
}

int cmd_ablate(const AblateOptions& opts) {
  json spec;
  try {
    spec = json::parse(read_file(opts.spec_path));
  } catch (const json::exception& e) {
    throw ParseError(opts.spec_path.string() + ": " + e.what());
  }
  const std::string parameter = spec.at("parameter").get<std::string>();
  const auto param_it = ablation_parameters().find(parameter);
  if (param_it == ablation_parameters().end()) {
    throw ParseError("ablation parameter must be one of theta_min, "
                     "min_cluster_points, max_cluster_distance, bg_ratio_max, "
                     "suppression_iou_max");
  }
  if (!spec.contains("values") || !spec["values"].is_array() ||
      spec["values"].empty()) {
    throw ParseError("ablation spec needs a nonempty 'values' array");
  }

  PipelineConfig base;
  if (spec.contains("config_path")) {
    base = load_config(spec["config_path"].get<std::string>());
  }
  if (spec.contains("overrides")) {
    for (const auto& [key, value] : spec["overrides"].items()) {
      apply_config_override(
          base, key + "=" +
                    (value.is_string() ? value.get<std::string>() : value.dump()));
    }
  }

  const std::vector<fs::path> dirs = discover_scene_dirs(opts.corpus_dir);
  std::vector<SceneBundle> bundles;
  bundles.reserve(dirs.size());
  for (const fs::path& dir : dirs) {
    bundles.push_back(load_scene_bundle(dir));
  }
  const fs::path gt_path = opts.corpus_dir / "ground_truth.json";
  if (!fs::exists(gt_path)) {
    throw IoError("ablation needs " + gt_path.string());
  }
  const CocoDoc gt_doc = load_coco(gt_path);

  std::vector<AblationRow> rows;
  for (const auto& value : spec["values"]) {
    PipelineConfig cfg = base;
    apply_config_override(cfg, param_it->second + "=" + value.dump());
    validate_config(cfg);

    const std::vector<SceneOutcome> outcomes =
        run_batch(bundles, cfg, opts.workers);
    for (const SceneOutcome& o : outcomes) {
      if (!o.ok) {
        throw Error("ablation run failed at " + parameter + "=" +
                    value.dump() + ": " + o.error);
      }
    }

    std::vector<const SceneBundle*> bptr;
    std::vector<const SceneOutcome*> optr;
    std::vector<int> ids;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      bptr.push_back(&bundles[i]);
      optr.push_back(&outcomes[i]);
      ids.push_back(static_cast<int>(i));
    }
    const CocoDoc pred_doc = proposals_to_coco(bptr, optr, ids);

    DetectionScenes preds;
    GroundTruthScenes gts;
    align_by_image(pred_doc, gt_doc, preds, gts);
    const EvalReport report =
        evaluate(preds, gts, ClassSeparation{View::kCorner, {}, {}});

    AblationRow row;
    row.value = value.get<double>();
    row.ap = report.overall.ap;
    row.ar = report.overall.ar;
    row.num_proposals = report.num_proposals;
    for (const SceneOutcome& o : outcomes) {
      if (o.run.num_final > 0) {
        ++row.num_scenes;
      }
    }
    rows.push_back(row);
  }

  std::ostringstream table;
  table << std::left << std::setw(22) << parameter << std::setw(8) << "AP"
        << std::setw(8) << "AR" << std::setw(12) << "#Proposals"
        << std::setw(8) << "#Scenes" << "\n";
  std::ostringstream csv;
  csv << parameter << ",AP,AR,#Proposals,#Scenes\n";
  for (const AblationRow& row : rows) {
    const std::string ap = row.ap.has_value() ? round3(*row.ap) : "-";
    const std::string ar = row.ar.has_value() ? round3(*row.ar) : "-";
    table << std::left << std::setw(22) << row.value << std::setw(8) << ap
          << std::setw(8) << ar << std::setw(12) << row.num_proposals
          << std::setw(8) << row.num_scenes << "\n";
    csv << row.value << "," << ap << "," << ar << "," << row.num_proposals
        << "," << row.num_scenes << "\n";
  }
  std::cout << table.str();
  write_file_atomic(opts.out_path, csv.str());
  return 0;
}

int cmd_synth(const SynthOptions& opts) {
  int n = 50;
  std::uint64_t seed = 7;
  CorpusKnobs knobs;
  SceneSpec base;
  if (opts.spec_path.has_value()) {
    json j;
    try {
      j = json::parse(read_file(*opts.spec_path));
    } catch (const json::exception& e) {
      throw ParseError(opts.spec_path->string() + ": " + e.what());
    }
    n = j.value("n", n);
    seed = j.value("seed", seed);
    knobs.corner_min = j.value("corner_min", knobs.corner_min);
    knobs.corner_max = j.value("corner_max", knobs.corner_max);
    knobs.common_min = j.value("common_min", knobs.common_min);
    knobs.common_max = j.value("common_max", knobs.common_max);
    knobs.background_min = j.value("background_min", knobs.background_min);
    knobs.background_max = j.value("background_max", knobs.background_max);
    knobs.detection_jitter = j.value("detection_jitter", knobs.detection_jitter);
    base.ground_height = j.value("ground_height", base.ground_height);
    base.rows = j.value("rows", base.rows);
    base.cols = j.value("cols", base.cols);
    base.elevation_min = j.value("elevation_min", base.elevation_min);
    base.elevation_max = j.value("elevation_max", base.elevation_max);
    base.max_range = j.value("max_range", base.max_range);
    if (j.contains("camera")) {
      const auto& c = j["camera"];
      base.camera.width = c.value("width", base.camera.width);
      base.camera.height = c.value("height", base.camera.height);
      base.camera.focal = c.value("focal", base.camera.focal);
      base.camera.center_u = c.value("center_u", base.camera.center_u);
      base.camera.center_v = c.value("center_v", base.camera.center_v);
      base.camera.pos_x = c.value("pos_x", base.camera.pos_x);
      base.camera.pos_y = c.value("pos_y", base.camera.pos_y);
      base.camera.pos_z = c.value("pos_z", base.camera.pos_z);
    }
  }

  const std::vector<SceneSpec> specs = generate_corpus(n, seed, knobs, base);

  // One corpus-wide category table keeps ids stable across scene files.
  std::set<std::string> gt_names, det_names;
  for (const SceneSpec& spec : specs) {
    for (const ObjectSpec& obj : spec.objects) {
      if (obj.kind == ObjectKind::kCorner) {
        gt_names.insert(obj.category);
      } else if (obj.kind == ObjectKind::kCommon) {
        det_names.insert(obj.category);
      }
    }
  }
  std::map<std::string, int> gt_ids, det_ids;
  std::vector<CocoCategory> gt_categories, det_categories;
  for (const std::string& name : gt_names) {
    gt_ids[name] = static_cast<int>(gt_ids.size()) + 1;
    gt_categories.push_back({gt_ids[name], name});
  }
  for (const std::string& name : det_names) {
    det_ids[name] = static_cast<int>(det_ids.size()) + 1;
    det_categories.push_back({det_ids[name], name});
  }

  fs::create_directories(opts.out_dir);
  CocoDoc corpus_gt;
  corpus_gt.categories = gt_categories;
  int gt_ann_id = 1;
  long total_points = 0;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SyntheticScene scene = generate_scene(specs[i]);
    const fs::path scene_dir = opts.out_dir / specs[i].scene_id;
    fs::create_directories(scene_dir);

    save_point_cloud(scene.bundle.cloud, scene_dir / "points.bin");
    save_camera_model(scene.bundle.cam, scene_dir / "calib.json");
    save_seg_map(*scene.bundle.seg, scene_dir / "seg.pgm");
    total_points += static_cast<long>(scene.bundle.cloud.size());

    CocoDoc det_doc;
    det_doc.categories = det_categories;
    det_doc.images.push_back({static_cast<int>(i), specs[i].scene_id,
                              scene.bundle.cam.image_width,
                              scene.bundle.cam.image_height});
    int det_ann_id = 1;
    for (const Detection& det : *scene.bundle.detections) {
      CocoAnnotation ann;
      ann.id = det_ann_id++;
      ann.image_id = static_cast<int>(i);
      ann.bbox = det.box;
      ann.category_id = det_ids.at(det.category);
      ann.score = det.score;
      det_doc.annotations.push_back(std::move(ann));
    }
    save_coco(det_doc, scene_dir / "detections.json");

    CocoDoc scene_gt;
    scene_gt.categories = gt_categories;
    scene_gt.images.push_back(det_doc.images.front());
    corpus_gt.images.push_back(det_doc.images.front());
    for (const ObjectTruth& truth : scene.truth.objects) {
      if (truth.kind != ObjectKind::kCorner || !truth.gt_box.has_value()) {
        continue;
      }
      CocoAnnotation ann;
      ann.id = gt_ann_id++;
      ann.image_id = static_cast<int>(i);
      ann.bbox = *truth.gt_box;
      ann.category_id = gt_ids.at(truth.category);
      ann.area = truth.gt_box->area();
      scene_gt.annotations.push_back(ann);
      corpus_gt.annotations.push_back(std::move(ann));
    }
    save_coco(scene_gt, scene_dir / "gt.json");
  }
  save_coco(corpus_gt, opts.out_dir / "ground_truth.json");

  std::cout << "synth: wrote " << specs.size() << " scene(s), " << total_points
            << " point(s), " << corpus_gt.annotations.size()
            << " corner-case gt box(es) -> " << opts.out_dir.string() << "\n";
  return 0;
}

int cmd_report(const ReportOptions& opts) {
  const CocoDoc doc = load_coco(opts.proposals_path);
  fs::create_directories(opts.out_dir);

  std::map<int, std::vector<const CocoAnnotation*>> by_image;
  for (const CocoAnnotation& a : doc.annotations) {
    by_image[a.image_id].push_back(&a);
  }

  std::ostringstream csv;
  csv << "scene_id,num_proposals,max_score,mean_score\n";
  for (const CocoImage& im : doc.images) {
    RgbImage canvas;
    const fs::path base_image =
        opts.images_dir.has_value()
            ? (*opts.images_dir / (im.file_name + ".ppm"))
            : fs::path{};
    if (!base_image.empty() && fs::exists(base_image)) {
      canvas = load_ppm(base_image);
    } else {
      canvas = make_rgb_image(im.width, im.height);
      canvas.fill(24, 24, 24);
    }

    double max_score = 0.0, score_sum = 0.0;
    int count = 0;
    const auto it = by_image.find(im.id);
    if (it != by_image.end()) {
      for (const CocoAnnotation* ann : it->second) {
        std::uint8_t r = 80, g = 220, b = 100;  // final
        const std::string stage = ann->stage.value_or("final");
        if (stage == "initial") {
          r = 235;
          g = 190;
          b = 45;
        } else if (stage == "intermediate") {
          r = 70;
          g = 150;
          b = 235;
        }
        draw_rect(canvas, ann->bbox, r, g, b);
        const double s = ann->score.value_or(0.0);
        max_score = std::max(max_score, s);
        score_sum += s;
        ++count;
      }
    }
    save_ppm(canvas, opts.out_dir / (im.file_name + "_proposals.ppm"));
    csv << im.file_name << "," << count << "," << max_score << ","
        << (count > 0 ? score_sum / count : 0.0) << "\n";
  }
  write_file_atomic(opts.out_dir / "metrics.csv", csv.str());
  std::cout << "report: " << doc.images.size() << " overlay(s) -> "
            << opts.out_dir.string() << "\n";
  return 0;
}

}  // namespace copg
