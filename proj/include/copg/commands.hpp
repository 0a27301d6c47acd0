#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copg/eval.hpp"
#include "copg/io.hpp"
#include "copg/proposal.hpp"
#include "copg/synth.hpp"

namespace copg {

inline constexpr const char* kToolName = "copg";
inline constexpr const char* kToolVersion = "0.1.0";

// Scene directories hold points.bin (required), calib.json (required),
// seg.pgm and detections.json (optional; their pipeline stages skip when
// absent), plus gt.json when the corpus carries annotations.
std::vector<std::filesystem::path> discover_scene_dirs(
    const std::filesystem::path& corpus_dir);
SceneBundle load_scene_bundle(const std::filesystem::path& scene_dir);

struct SceneOutcome {
  std::string scene_id;
  bool ok = false;
  std::string error;
  PipelineRun run;
};

// Maps run_pipeline over scenes with a bounded worker pool; outcomes come
// back in input order regardless of scheduling. workers <= 0 means one per
// hardware thread.
std::vector<SceneOutcome> run_batch(const std::vector<SceneBundle>& scenes,
                                    const PipelineConfig& cfg, int workers);

nlohmann::json manifest_json(const std::string& corpus,
                             const PipelineConfig& cfg,
                             const std::vector<SceneOutcome>& outcomes);

nlohmann::json report_to_json(const EvalReport& report);
void print_report_table(const EvalReport& report, std::ostream& out);

struct ProposeOptions {
  std::filesystem::path corpus_dir;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;  // section.key=value
  int workers = 0;
};

struct EvaluateOptions {
  std::filesystem::path proposals_path;
  std::filesystem::path gt_path;
  std::optional<std::filesystem::path> class_map_path;
  std::string view = "CORNER";
  std::optional<std::filesystem::path> out_path;
};

struct AblateOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path spec_path;
  std::filesystem::path out_path;  // CSV table
  int workers = 0;
};

struct SynthOptions {
  std::optional<std::filesystem::path> spec_path;  // defaults when absent
  std::filesystem::path out_dir;
};

struct ReportOptions {
  std::filesystem::path proposals_path;
  std::optional<std::filesystem::path> images_dir;  // PPM base images
  std::filesystem::path out_dir;
};

// Subcommand entry points; each returns a process exit code.
int cmd_propose(const ProposeOptions& opts);
int cmd_evaluate(const EvaluateOptions& opts);
int cmd_ablate(const AblateOptions& opts);
int cmd_synth(const SynthOptions& opts);
int cmd_report(const ReportOptions& opts);

// Loads {"common_classes": [...], "map": {category: role}} for the COMMON
// and NOVEL views. CORNER needs no map.
ClassSeparation load_class_separation(
    const std::optional<std::filesystem::path>& path, View view);

}  // namespace copg
