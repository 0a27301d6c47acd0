#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "copg/core.hpp"

namespace copg {

// 2D polar grid of sensor distances. range == 0 encodes "no return" and
// point_index == -1 marks the same cells. Row 0 is the top of the image
// (highest elevation); columns sweep azimuth from -180 to +180 degrees and
// wrap across the seam.
struct RangeImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> range;              // rows*cols, meters
  std::vector<std::int32_t> point_index;  // rows*cols, -1 = no return
  std::vector<double> row_angles;         // elevation per row, degrees
  std::vector<double> col_angles;         // azimuth per column, degrees

  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols + c;
  }
  double range_at(int r, int c) const { return range[idx(r, c)]; }
  bool occupied(int r, int c) const { return point_index[idx(r, c)] >= 0; }
};

// Per-pixel cluster ids; -1 where the range image has no return. Ids are
// contiguous 0..num_clusters-1 in first-encounter row-major order.
struct ClusterLabels {
  int rows = 0;
  int cols = 0;
  std::vector<std::int32_t> label;
  int num_clusters = 0;

  std::int32_t at(int r, int c) const {
    return label[static_cast<std::size_t>(r) * cols + c];
  }
};

struct Cluster {
  std::int32_t id = -1;
  std::vector<std::pair<int, int>> pixel_coords;  // (row, col)
  std::vector<std::int32_t> point_indices;        // into the source cloud
  double min_sensor_distance = 0.0;
};

// Bins points by elevation row and azimuth column; the nearer point wins a
// collision and points outside [elevation_min, elevation_max] are dropped.
RangeImage build_range_image(const PointCloud& cloud, int rows, int cols,
                             double elevation_min, double elevation_max);

// Same, restricted to a subset of cloud indices (back-pointers still refer
// to the full cloud).
RangeImage build_range_image(const PointCloud& cloud,
                             std::span<const std::int32_t> indices, int rows,
                             int cols, double elevation_min,
                             double elevation_max);

// Angle at the farther point of a beam pair, subtended by the nearer point
// and the sensor ray: beta = atan2(d2*sin(alpha), d1 - d2*cos(alpha)) with
// d1 the longer range (arguments are swapped internally). Degrees in, degrees
// out. Large beta means the two returns likely belong to the same surface.
double merge_angle(double d1, double d2, double alpha_deg);

// Labels occupied pixels into clusters by breadth-first search: two 4-neighbor
// pixels join iff merge_angle over their ranges exceeds theta_min (strictly),
// with alpha taken from the actual angle arrays along that axis. Columns wrap
// across the azimuth seam; rows do not.
ClusterLabels cluster_range_image(const RangeImage& img, double theta_min_deg);

// Drops clusters smaller than min_points or farther than max_distance
// (distance of the nearest member return). Order follows cluster id.
std::vector<Cluster> extract_clusters(const ClusterLabels& labels,
                                      const RangeImage& img, int min_points,
                                      double max_distance);

}  // namespace copg
