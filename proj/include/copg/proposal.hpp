#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copg/core.hpp"
#include "copg/ground.hpp"
#include "copg/range_cluster.hpp"

namespace copg {

enum class ProposalStage { kInitial, kIntermediate, kFinal };

const char* to_string(ProposalStage stage);
std::optional<ProposalStage> proposal_stage_from_string(const std::string& s);

// One candidate corner case. The score is the source cluster's point count;
// the stage only moves forward (initial -> intermediate -> final).
struct Proposal {
  Box2D box;
  std::int32_t source_cluster_id = -1;
  double score = 0.0;
  ProposalStage stage = ProposalStage::kInitial;
};

// Everything the pipeline consumes for one scene. Segmentation and detections
// are optional; their filter stages are skipped when absent.
struct SceneBundle {
  PointCloud cloud;
  CameraModel cam;
  std::optional<SegMap> seg;
  std::optional<std::vector<Detection>> detections;
  std::string scene_id;
};

struct ProposalSet {
  std::string scene_id;
  std::vector<Proposal> proposals;
};

// Pipeline stages that can be skipped or timed individually.
enum class PipelineStage {
  kGroundRemoval,
  kClustering,
  kProjection,
  kBackgroundRemoval,
  kCommonSuppression,
};

const char* to_string(PipelineStage stage);

// Full run record for one scene: the final proposals plus what the batch
// driver writes into the manifest. The extracted clusters stay attached so
// callers can trace a proposal back to its source points.
struct PipelineRun {
  ProposalSet final_proposals;
  std::vector<Cluster> clusters;  // after size/distance filtering
  std::vector<PipelineStage> skipped_stages;
  int num_initial = 0;
  int num_intermediate = 0;
  int num_final = 0;
  double stage_ms[5] = {0, 0, 0, 0, 0};  // indexed by PipelineStage
  double total_ms = 0.0;
};

// One proposal per cluster whose projected points yield a valid box; clusters
// fully behind the camera or outside the image produce none. Scores carry the
// cluster point counts.
std::vector<Proposal> initial_proposals(const std::vector<Cluster>& clusters,
                                        const PointCloud& cloud,
                                        const CameraModel& cam);

// Fraction of the box's rasterized pixels whose segmentation label is a
// background class. The box is rasterized to the integer pixels whose centers
// fall inside it (half-open on the right/bottom edges). Throws EmptyRaster
// when no pixel center is covered.
double background_ratio(const Box2D& box, const SegMap& seg,
                        const std::set<std::uint8_t>& background_ids);

// Keeps proposals with background_ratio <= bg_ratio_max and promotes them to
// the intermediate stage. Proposals whose box covers no pixel center are
// dropped (nothing to assess, and such a box is degenerate downstream).
std::vector<Proposal> remove_background(const std::vector<Proposal>& proposals,
                                        const SegMap& seg,
                                        const std::set<std::uint8_t>& background_ids,
                                        double bg_ratio_max);

// Keeps proposals whose IoU with every detection is <= suppression_iou_max
// and promotes them to the final stage.
std::vector<Proposal> suppress_common(const std::vector<Proposal>& proposals,
                                      const std::vector<Detection>& detections,
                                      double suppression_iou_max);

// The whole dataflow: ground removal -> range-image clustering -> cluster
// projection -> background removal -> common-class suppression. Stages whose
// inputs are absent are recorded as skipped and pass proposals through
// unchanged (stage still advances). Deterministic for fixed scene and config.
PipelineRun run_pipeline(const SceneBundle& scene, const PipelineConfig& cfg);

}  // namespace copg
