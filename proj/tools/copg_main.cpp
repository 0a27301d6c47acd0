#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "copg/commands.hpp"
#include "copg/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Corner-case proposal generation and evaluation toolkit"};
  app.set_version_flag("--version", std::string(copg::kToolName) + " " +
                                        copg::kToolVersion);
  app.require_subcommand(1);

  copg::ProposeOptions propose;
  auto* propose_cmd = app.add_subcommand(
      "propose", "Run the proposal pipeline over a scene corpus");
  propose_cmd->add_option("corpus", propose.corpus_dir, "Corpus directory")
      ->required();
  propose_cmd->add_option("-o,--out", propose.out_dir, "Output directory")
      ->required();
  std::string propose_config;
  propose_cmd->add_option("-c,--config", propose_config,
                          "Pipeline config file (key = value sections)");
  propose_cmd->add_option("--set", propose.overrides,
                          "Config override, section.key=value (repeatable)");
  propose_cmd->add_option("-j,--workers", propose.workers,
                          "Worker threads (default: one per core)");

  copg::EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Score proposals against ground truth (COCO-style AR/AP)");
  evaluate_cmd->add_option("proposals", evaluate.proposals_path,
                           "Proposals JSON")
      ->required();
  evaluate_cmd->add_option("gt", evaluate.gt_path, "Ground-truth JSON")
      ->required();
  std::string evaluate_class_map;
  evaluate_cmd->add_option("-m,--class-map", evaluate_class_map,
                           "Class map JSON (required for COMMON/NOVEL)");
  evaluate_cmd->add_option("-v,--view", evaluate.view,
                           "Class-separation view: CORNER, COMMON, or NOVEL");
  std::string evaluate_out;
  evaluate_cmd->add_option("-o,--out", evaluate_out, "Report JSON output path");

  copg::AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Sweep one pipeline parameter and tabulate AP/AR/#Proposals");
  ablate_cmd->add_option("corpus", ablate.corpus_dir, "Corpus directory")
      ->required();
  ablate_cmd->add_option("spec", ablate.spec_path, "Ablation spec JSON")
      ->required();
  ablate_cmd->add_option("-o,--out", ablate.out_path, "Output CSV path")
      ->required();
  ablate_cmd->add_option("-j,--workers", ablate.workers, "Worker threads");

  copg::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic corpus in the standard formats");
  synth_cmd->add_option("-o,--out", synth.out_dir, "Output corpus directory")
      ->required();
  std::string synth_spec;
  synth_cmd->add_option("spec", synth_spec,
                        "Corpus spec JSON (defaults used when omitted)");

  copg::ReportOptions report;
  auto* report_cmd = app.add_subcommand(
      "report", "Render proposal overlays (PPM) and a per-scene metrics CSV");
  report_cmd->add_option("proposals", report.proposals_path, "Proposals JSON")
      ->required();
  report_cmd->add_option("-o,--out", report.out_dir, "Output directory")
      ->required();
  std::string report_images;
  report_cmd->add_option("--images", report_images,
                         "Directory of <scene_id>.ppm base images");

  CLI11_PARSE(app, argc, argv);

  try {
    if (propose_cmd->parsed()) {
      if (!propose_config.empty()) {
        propose.config_path = propose_config;
      }
      return copg::cmd_propose(propose);
    }
    if (evaluate_cmd->parsed()) {
      if (!evaluate_class_map.empty()) {
        evaluate.class_map_path = evaluate_class_map;
      }
      if (!evaluate_out.empty()) {
        evaluate.out_path = evaluate_out;
      }
      return copg::cmd_evaluate(evaluate);
    }
    if (ablate_cmd->parsed()) {
      return copg::cmd_ablate(ablate);
    }
    if (synth_cmd->parsed()) {
      if (!synth_spec.empty()) {
        synth.spec_path = synth_spec;
      }
      return copg::cmd_synth(synth);
    }
    if (report_cmd->parsed()) {
      if (!report_images.empty()) {
        report.images_dir = report_images;
      }
      return copg::cmd_report(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
