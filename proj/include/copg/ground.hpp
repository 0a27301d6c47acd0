#pragma once

#include <cstdint>
#include <vector>

#include "copg/core.hpp"

namespace copg {

// Plane {p : normal.p + offset = 0} with a unit normal. fit_ground_plane
// canonicalizes the sign so the normal points toward +z.
struct Plane {
  double nx = 0.0;
  double ny = 0.0;
  double nz = 0.0;
  double offset = 0.0;

  double signed_distance(const Point3& p) const {
    return nx * p.x + ny * p.y + nz * p.z + offset;
  }
};

// Disjoint partition of cloud indices into ground and non-ground.
struct GroundSplit {
  std::vector<std::int32_t> ground_indices;
  std::vector<std::int32_t> nonground_indices;
  Plane plane;
};

// One scored RANSAC hypothesis; exposed so callers can audit a run.
struct PlaneHypothesis {
  Plane plane;
  int inlier_count = 0;
  bool tilt_rejected = false;
};

struct RansacOptions {
  int iterations = 200;
  double inlier_dist = 0.2;  // meters
  std::uint64_t seed = 0;
  // Max angle between the plane normal and the z-axis; >= 90 disables.
  double max_tilt_deg = 30.0;
};

// RANSAC plane fit: samples 3-point hypotheses and returns the one with the
// most inliers (|normal.p + offset| <= inlier_dist). Deterministic for a
// fixed seed; the first hypothesis found wins among equal inlier counts.
// Collinear triples are skipped without consuming an iteration. Throws
// TooFewPoints (< 3 points) or DegenerateGeometry (no usable hypothesis).
// When `log` is non-null every scored hypothesis is appended to it.
Plane fit_ground_plane(const PointCloud& cloud, const RansacOptions& opts,
                       std::vector<PlaneHypothesis>* log = nullptr);

// Threshold split: ground_indices = {i : |signed_distance(p_i)| <= inlier_dist}.
GroundSplit split_ground(const PointCloud& cloud, const Plane& plane,
                         double inlier_dist);

}  // namespace copg
