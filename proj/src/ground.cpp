#include "copg/ground.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "copg/errors.hpp"

namespace copg {

namespace {

constexpr double kCollinearEps = 1e-9;

struct Vec3 {
  double x, y, z;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Plane through three points, canonicalized so the normal points toward +z
// (ties broken toward +y, then +x). Returns false for collinear triples.
bool plane_from_triple(const Point3& a, const Point3& b, const Point3& c,
                       Plane& out) {
  const Vec3 ab{b.x - a.x, b.y - a.y, b.z - a.z};
  const Vec3 ac{c.x - a.x, c.y - a.y, c.z - a.z};
  Vec3 n = cross(ab, ac);
  const double norm = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
  if (norm < kCollinearEps) {
    return false;
  }
  n.x /= norm;
  n.y /= norm;
  n.z /= norm;
  if (n.z < 0.0 || (n.z == 0.0 && (n.y < 0.0 || (n.y == 0.0 && n.x < 0.0)))) {
    n.x = -n.x;
    n.y = -n.y;
    n.z = -n.z;
  }
  out.nx = n.x;
  out.ny = n.y;
  out.nz = n.z;
  out.offset = -(n.x * a.x + n.y * a.y + n.z * a.z);
  return true;
}

int count_inliers(const PointCloud& cloud, const Plane& plane, double dist) {
  int count = 0;
  for (const Point3& p : cloud.points) {
    if (std::abs(plane.signed_distance(p)) <= dist) {
      ++count;
    }
  }
  return count;
}

}  // namespace

Plane fit_ground_plane(const PointCloud& cloud, const RansacOptions& opts,
                       std::vector<PlaneHypothesis>* log) {
  const std::size_t n = cloud.size();
  if (n < 3) {
    throw TooFewPoints("fit_ground_plane: need at least 3 points, got " +
                       std::to_string(n));
  }
  if (opts.iterations < 1) {
    throw InvalidSpec("fit_ground_plane: iterations must be >= 1");
  }

  const double tilt_cos_min =
      opts.max_tilt_deg < 90.0
          ? std::cos(opts.max_tilt_deg * std::numbers::pi / 180.0)
          : -1.0;

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  Plane best{};
  int best_inliers = -1;
  int scored = 0;
  // Collinear triples do not consume an iteration; the attempt budget keeps
  // degenerate clouds from spinning forever.
  long attempts_left = static_cast<long>(opts.iterations) * 20 + 100;

  while (scored < opts.iterations && attempts_left > 0) {
    --attempts_left;
    std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    std::size_t k = pick(rng);
    if (i == j || j == k || i == k) {
      continue;
    }
    Plane hyp;
    if (!plane_from_triple(cloud.points[i], cloud.points[j], cloud.points[k],
                           hyp)) {
      continue;
    }
    ++scored;
    const bool tilt_ok = hyp.nz >= tilt_cos_min;
    const int inliers = count_inliers(cloud, hyp, opts.inlier_dist);
    if (log != nullptr) {
      log->push_back({hyp, inliers, !tilt_ok});
    }
    if (tilt_ok && inliers > best_inliers) {
      best_inliers = inliers;
      best = hyp;
    }
  }

  if (scored == 0) {
    throw DegenerateGeometry(
        "fit_ground_plane: every sampled triple was collinear");
  }
  if (best_inliers < 0) {
    throw DegenerateGeometry(
        "fit_ground_plane: no hypothesis within the ground tilt limit");
  }
  return best;
}

GroundSplit split_ground(const PointCloud& cloud, const Plane& plane,
                         double inlier_dist) {
  GroundSplit split;
  split.plane = plane;
  split.ground_indices.reserve(cloud.size() / 2);
  split.nonground_indices.reserve(cloud.size() / 2);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(plane.signed_distance(cloud.points[i])) <= inlier_dist) {
      split.ground_indices.push_back(static_cast<std::int32_t>(i));
    } else {
      split.nonground_indices.push_back(static_cast<std::int32_t>(i));
    }
  }
  return split;
}

}  // namespace copg
