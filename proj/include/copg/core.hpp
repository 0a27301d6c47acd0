#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace copg {

// Lidar frame convention: x forward, y left, z up, meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // reflectance in [0,1]
};

// Order is stable: indices identify points for the whole pipeline run.
struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

// KITTI-style calibration: a single 3x4 row-major matrix mapping homogeneous
// lidar-frame points to homogeneous pixels (intrinsics x extrinsics folded).
struct CameraModel {
  std::array<double, 12> P{};
  int image_width = 0;
  int image_height = 0;
};

// Continuous (sub-pixel) axis-aligned rectangle, COCO (x, y, w, h) convention
// with the origin at the top-left pixel corner. Area is w*h.
struct Box2D {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  friend bool operator==(const Box2D& a, const Box2D& b) {
    return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
  }
};

struct Detection {
  Box2D box;
  std::string category;
  double score = 0.0;  // confidence in [0,1]
};

// Dense semantic labeling of the camera image, one 8-bit class id per pixel.
struct SegMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;  // row-major, size width*height

  std::uint8_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

// Every tunable of the proposal pipeline. Defaults are the values reported
// as in effect for the full pipeline (clustering angle 8 deg, cluster size
// 10, max distance 50 m, background ratio 0.45, suppression IoU 0.25).
struct PipelineConfig {
  // Ground removal (RANSAC plane fit).
  int ransac_iterations = 200;
  double ransac_inlier_dist = 0.2;  // meters
  // Hypotheses tilted more than this from the z-axis are rejected as
  // non-ground (walls). Values >= 90 disable the guard.
  double ground_max_tilt_deg = 30.0;
  std::uint64_t seed = 0;

  // Range image geometry.
  int range_rows = 64;
  int range_cols = 2048;
  double elevation_min = -24.8;  // degrees
  double elevation_max = 2.0;    // degrees

  // Clustering.
  double theta_min = 8.0;  // degrees; neighbor pairs merge when beta > theta_min
  int min_cluster_points = 10;
  double max_cluster_distance = 50.0;  // meters

  // Proposal filtering.
  double bg_ratio_max = 0.45;
  double suppression_iou_max = 0.25;
  // Urban-scene training-id convention: road, sidewalk, building, wall,
  // fence, pole, vegetation, terrain, sky.
  std::set<std::uint8_t> background_class_ids = {0, 1, 2, 3, 4, 5, 8, 9, 10};
};

// Throws InvalidSpec when a config violates its invariants (theta_min in
// (0, 180), ratios in [0, 1], grid at least 1x1, elevation span nonempty).
void validate_config(const PipelineConfig& cfg);

// Projects a lidar-frame point through the camera. Returns the dehomogenized
// pixel when the homogeneous depth is strictly positive and the pixel lies
// inside [0, width) x [0, height); absent otherwise. Border pixels count as
// outside (half-open interval).
std::optional<Pixel> project_point(const Point3& p, const CameraModel& cam);

// Intersection over union of two boxes; 0 when disjoint.
double iou(const Box2D& a, const Box2D& b);

// Min/max envelope of a pixel set, clipped to the image rectangle. Absent
// when fewer than 2 distinct pixels are given or the clipped box has zero
// area.
std::optional<Box2D> box_from_pixels(std::span<const Pixel> pixels,
                                     const CameraModel& cam);

}  // namespace copg
