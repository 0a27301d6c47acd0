#include "copg/core.hpp"

#include <algorithm>
#include <cmath>

#include "copg/errors.hpp"

namespace copg {

void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.theta_min > 0.0 && cfg.theta_min < 180.0)) {
    throw InvalidSpec("config: theta_min must be in (0, 180) degrees");
  }
  if (cfg.bg_ratio_max < 0.0 || cfg.bg_ratio_max > 1.0) {
    throw InvalidSpec("config: bg_ratio_max must be in [0, 1]");
  }
  if (cfg.suppression_iou_max < 0.0 || cfg.suppression_iou_max > 1.0) {
    throw InvalidSpec("config: suppression_iou_max must be in [0, 1]");
  }
  if (cfg.range_rows < 1 || cfg.range_cols < 1) {
    throw InvalidSpec("config: range image must be at least 1x1");
  }
  if (!(cfg.elevation_min < cfg.elevation_max)) {
    throw InvalidSpec("config: elevation_min must be < elevation_max");
  }
  if (cfg.ransac_iterations < 1) {
    throw InvalidSpec("config: ransac_iterations must be >= 1");
  }
  if (cfg.ransac_inlier_dist <= 0.0) {
    throw InvalidSpec("config: ransac_inlier_dist must be positive");
  }
  if (cfg.min_cluster_points < 0) {
    throw InvalidSpec("config: min_cluster_points must be >= 0");
  }
  if (cfg.max_cluster_distance < 0.0) {
    throw InvalidSpec("config: max_cluster_distance must be >= 0");
  }
}

std::optional<Pixel> project_point(const Point3& p, const CameraModel& cam) {
  const auto& P = cam.P;
  const double uh = P[0] * p.x + P[1] * p.y + P[2] * p.z + P[3];
  const double vh = P[4] * p.x + P[5] * p.y + P[6] * p.z + P[7];
  const double wh = P[8] * p.x + P[9] * p.y + P[10] * p.z + P[11];
  if (!(wh > 0.0)) {
    return std::nullopt;
  }
  const double u = uh / wh;
  const double v = vh / wh;
  if (u < 0.0 || u >= cam.image_width || v < 0.0 || v >= cam.image_height) {
    return std::nullopt;
  }
  return Pixel{u, v};
}

double iou(const Box2D& a, const Box2D& b) {
  const double ix0 = std::max(a.x, b.x);
  const double iy0 = std::max(a.y, b.y);
  const double ix1 = std::min(a.x + a.w, b.x + b.w);
  const double iy1 = std::min(a.y + a.h, b.y + b.h);
  const double iw = ix1 - ix0;
  const double ih = iy1 - iy0;
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return inter / uni;
}

std::optional<Box2D> box_from_pixels(std::span<const Pixel> pixels,
                                     const CameraModel& cam) {
  if (pixels.size() < 2) {
    return std::nullopt;
  }
  double min_u = pixels[0].u, max_u = pixels[0].u;
  double min_v = pixels[0].v, max_v = pixels[0].v;
  bool distinct = false;
  for (const Pixel& px : pixels) {
    if (px.u != pixels[0].u || px.v != pixels[0].v) {
      distinct = true;
    }
    min_u = std::min(min_u, px.u);
    max_u = std::max(max_u, px.u);
    min_v = std::min(min_v, px.v);
    max_v = std::max(max_v, px.v);
  }
  if (!distinct) {
    return std::nullopt;
  }
  const double x0 = std::clamp(min_u, 0.0, static_cast<double>(cam.image_width));
  const double x1 = std::clamp(max_u, 0.0, static_cast<double>(cam.image_width));
  const double y0 = std::clamp(min_v, 0.0, static_cast<double>(cam.image_height));
  const double y1 = std::clamp(max_v, 0.0, static_cast<double>(cam.image_height));
  if (x1 <= x0 || y1 <= y0) {
    return std::nullopt;
  }
  return Box2D{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace copg
