#include "copg/proposal.hpp"

#include <cassert>
#include <chrono>
#include <cmath>

#include "copg/errors.hpp"

namespace copg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct RasterCounts {
  long total = 0;
  long background = 0;
};

RasterCounts raster_counts(const Box2D& box, const SegMap& seg,
                           const std::set<std::uint8_t>& background_ids) {
  RasterCounts counts;
  // Pixel (ix, iy) has center (ix + 0.5, iy + 0.5); it belongs to the box
  // when the center is inside the half-open rectangle.
  const int ix0 = std::max(0, static_cast<int>(std::floor(box.x - 0.5)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(box.y - 0.5)));
  const int ix1 = std::min(seg.width - 1, static_cast<int>(std::ceil(box.x + box.w)));
  const int iy1 = std::min(seg.height - 1, static_cast<int>(std::ceil(box.y + box.h)));
  for (int iy = iy0; iy <= iy1; ++iy) {
    const double cy = iy + 0.5;
    if (cy < box.y || cy >= box.y + box.h) {
      continue;
    }
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double cx = ix + 0.5;
      if (cx < box.x || cx >= box.x + box.w) {
        continue;
      }
      ++counts.total;
      if (background_ids.count(seg.at(ix, iy)) > 0) {
        ++counts.background;
      }
    }
  }
  return counts;
}

}  // namespace

const char* to_string(ProposalStage stage) {
  switch (stage) {
    case ProposalStage::kInitial:
      return "initial";
    case ProposalStage::kIntermediate:
      return "intermediate";
    case ProposalStage::kFinal:
      return "final";
  }
  return "unknown";
}

std::optional<ProposalStage> proposal_stage_from_string(const std::string& s) {
  if (s == "initial") return ProposalStage::kInitial;
  if (s == "intermediate") return ProposalStage::kIntermediate;
  if (s == "final") return ProposalStage::kFinal;
  return std::nullopt;
}

const char* to_string(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::kGroundRemoval:
      return "ground_removal";
    case PipelineStage::kClustering:
      return "clustering";
    case PipelineStage::kProjection:
      return "projection";
    case PipelineStage::kBackgroundRemoval:
      return "background_removal";
    case PipelineStage::kCommonSuppression:
      return "common_suppression";
  }
  return "unknown";
}

std::vector<Proposal> initial_proposals(const std::vector<Cluster>& clusters,
                                        const PointCloud& cloud,
                                        const CameraModel& cam) {
  std::vector<Proposal> proposals;
  proposals.reserve(clusters.size());
  std::vector<Pixel> pixels;
  for (const Cluster& cluster : clusters) {
    pixels.clear();
    for (const std::int32_t i : cluster.point_indices) {
      if (auto px = project_point(cloud.points[i], cam)) {
        pixels.push_back(*px);
      }
    }
    if (auto box = box_from_pixels(pixels, cam)) {
      proposals.push_back({*box, cluster.id,
                           static_cast<double>(cluster.point_indices.size()),
                           ProposalStage::kInitial});
    }
  }
  return proposals;
}

double background_ratio(const Box2D& box, const SegMap& seg,
                        const std::set<std::uint8_t>& background_ids) {
  const RasterCounts counts = raster_counts(box, seg, background_ids);
  if (counts.total == 0) {
    throw EmptyRaster("background_ratio: box covers no pixel center");
  }
  return static_cast<double>(counts.background) / counts.total;
}

std::vector<Proposal> remove_background(const std::vector<Proposal>& proposals,
                                        const SegMap& seg,
                                        const std::set<std::uint8_t>& background_ids,
                                        double bg_ratio_max) {
  std::vector<Proposal> kept;
  kept.reserve(proposals.size());
  for (const Proposal& p : proposals) {
    assert(p.stage == ProposalStage::kInitial);
    const RasterCounts counts = raster_counts(p.box, seg, background_ids);
    if (counts.total == 0) {
      continue;
    }
    if (static_cast<double>(counts.background) / counts.total <= bg_ratio_max) {
      Proposal promoted = p;
      promoted.stage = ProposalStage::kIntermediate;
      kept.push_back(promoted);
    }
  }
  return kept;
}

std::vector<Proposal> suppress_common(const std::vector<Proposal>& proposals,
                                      const std::vector<Detection>& detections,
                                      double suppression_iou_max) {
  std::vector<Proposal> kept;
  kept.reserve(proposals.size());
  for (const Proposal& p : proposals) {
    assert(p.stage == ProposalStage::kIntermediate);
    bool overlaps_common = false;
    for (const Detection& det : detections) {
      if (iou(p.box, det.box) > suppression_iou_max) {
        overlaps_common = true;
        break;
      }
    }
    if (!overlaps_common) {
      Proposal promoted = p;
      promoted.stage = ProposalStage::kFinal;
      kept.push_back(promoted);
    }
  }
  return kept;
}

PipelineRun run_pipeline(const SceneBundle& scene, const PipelineConfig& cfg) {
  PipelineRun run;
  run.final_proposals.scene_id = scene.scene_id;
  const auto t_total = Clock::now();

  // Ground removal. Clouds too small to fit a plane skip the stage instead
  // of failing: an (almost) empty scene is a valid vacuous input.
  auto t = Clock::now();
  std::vector<std::int32_t> nonground;
  if (scene.cloud.size() >= 3) {
    const RansacOptions ransac{cfg.ransac_iterations, cfg.ransac_inlier_dist,
                               cfg.seed, cfg.ground_max_tilt_deg};
    const Plane plane = fit_ground_plane(scene.cloud, ransac);
    nonground = split_ground(scene.cloud, plane, cfg.ransac_inlier_dist)
                    .nonground_indices;
  } else {
    run.skipped_stages.push_back(PipelineStage::kGroundRemoval);
    nonground.resize(scene.cloud.size());
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
      nonground[i] = static_cast<std::int32_t>(i);
    }
  }
  run.stage_ms[0] = ms_since(t);

  t = Clock::now();
  const RangeImage img =
      build_range_image(scene.cloud, nonground, cfg.range_rows, cfg.range_cols,
                        cfg.elevation_min, cfg.elevation_max);
  const ClusterLabels labels = cluster_range_image(img, cfg.theta_min);
  run.clusters = extract_clusters(labels, img, cfg.min_cluster_points,
                                  cfg.max_cluster_distance);
  run.stage_ms[1] = ms_since(t);

  t = Clock::now();
  std::vector<Proposal> proposals =
      initial_proposals(run.clusters, scene.cloud, scene.cam);
  run.num_initial = static_cast<int>(proposals.size());
  run.stage_ms[2] = ms_since(t);

  t = Clock::now();
  if (scene.seg.has_value()) {
    proposals = remove_background(proposals, *scene.seg,
                                  cfg.background_class_ids, cfg.bg_ratio_max);
  } else {
    run.skipped_stages.push_back(PipelineStage::kBackgroundRemoval);
    for (Proposal& p : proposals) {
      p.stage = ProposalStage::kIntermediate;
    }
  }
  run.num_intermediate = static_cast<int>(proposals.size());
  run.stage_ms[3] = ms_since(t);

  t = Clock::now();
  if (scene.detections.has_value()) {
    proposals =
        suppress_common(proposals, *scene.detections, cfg.suppression_iou_max);
  } else {
    run.skipped_stages.push_back(PipelineStage::kCommonSuppression);
    for (Proposal& p : proposals) {
      p.stage = ProposalStage::kFinal;
    }
  }
  run.num_final = static_cast<int>(proposals.size());
  run.stage_ms[4] = ms_since(t);

  run.final_proposals.proposals = std::move(proposals);
  run.total_ms = ms_since(t_total);
  return run;
}

}  // namespace copg
