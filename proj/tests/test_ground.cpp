#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "copg/errors.hpp"
#include "copg/ground.hpp"
#include "support/oracles.hpp"

using namespace copg;

namespace {

PointCloud plane_with_outliers(unsigned seed) {
  // 100 points on z = -1.7 plus 20 points well off the plane.
  PointCloud cloud;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> xy(-20.0, 20.0);
  std::uniform_real_distribution<double> zoff(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    cloud.points.push_back({xy(rng), xy(rng), -1.7, 0.5});
  }
  for (int i = 0; i < 20; ++i) {
    cloud.points.push_back({xy(rng), xy(rng), zoff(rng), 0.5});
  }
  return cloud;
}

}  // namespace

TEST_CASE("fit_ground_plane recovers an exact plane") {
  PointCloud cloud;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> xy(-10.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    cloud.points.push_back({xy(rng), xy(rng), 0.0, 0.0});
  }
  const Plane plane = fit_ground_plane(cloud, {200, 0.2, 3, 30.0});
  CHECK(std::abs(plane.nz) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plane.offset == doctest::Approx(0.0).epsilon(1e-12));
  const GroundSplit split = split_ground(cloud, plane, 0.2);
  CHECK(split.ground_indices.size() == cloud.size());
}

TEST_CASE("fit_ground_plane needs at least three points") {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0, 0});
  cloud.points.push_back({1, 0, 0, 0});
  CHECK_THROWS_AS(fit_ground_plane(cloud, {100, 0.2, 0, 90.0}), TooFewPoints);
}

TEST_CASE("fit_ground_plane reports fully collinear clouds") {
  PointCloud cloud;
  for (int i = 0; i < 10; ++i) {
    cloud.points.push_back({static_cast<double>(i), 0.0, 0.0, 0.0});
  }
  CHECK_THROWS_AS(fit_ground_plane(cloud, {50, 0.2, 0, 90.0}),
                  DegenerateGeometry);
}

TEST_CASE("RANSAC inlier set matches exhaustive triple enumeration") {
  const PointCloud cloud = plane_with_outliers(99);
  const oracle::EnumeratedPlane best =
      oracle::best_plane_by_enumeration(cloud, 0.2);
  REQUIRE(best.inlier_count == 100);

  const Plane plane = fit_ground_plane(cloud, {300, 0.2, 17, 30.0});
  const GroundSplit split = split_ground(cloud, plane, 0.2);
  const std::set<std::int32_t> got(split.ground_indices.begin(),
                                   split.ground_indices.end());
  CHECK(got == best.inliers);
}

TEST_CASE("split_ground thresholds by plane distance") {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0.1, 0});
  cloud.points.push_back({0, 0, 0.5, 0});
  const Plane plane{0, 0, 1, 0};
  const GroundSplit split = split_ground(cloud, plane, 0.2);
  CHECK(split.ground_indices == std::vector<std::int32_t>{0});
  CHECK(split.nonground_indices == std::vector<std::int32_t>{1});
}

TEST_CASE("split_ground on an empty cloud yields empty sets") {
  const GroundSplit split = split_ground(PointCloud{}, {0, 0, 1, 0}, 0.2);
  CHECK(split.ground_indices.empty());
  CHECK(split.nonground_indices.empty());
}

TEST_CASE("GroundSplit partitions every input") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud cloud;
    const int n = 3 + trial * 7;
    for (int i = 0; i < n; ++i) {
      cloud.points.push_back({coord(rng), coord(rng), coord(rng), 0});
    }
    const Plane plane = fit_ground_plane(
        cloud, {50, 0.5, static_cast<std::uint64_t>(trial), 90.0});
    const GroundSplit split = split_ground(cloud, plane, 0.5);
    CHECK(split.ground_indices.size() + split.nonground_indices.size() ==
          cloud.size());
    std::set<std::int32_t> all(split.ground_indices.begin(),
                               split.ground_indices.end());
    all.insert(split.nonground_indices.begin(), split.nonground_indices.end());
    CHECK(all.size() == cloud.size());
  }
}

TEST_CASE("fit_ground_plane is deterministic for a fixed seed") {
  const PointCloud cloud = plane_with_outliers(3);
  const RansacOptions opts{200, 0.2, 12345, 30.0};
  const Plane a = fit_ground_plane(cloud, opts);
  const Plane b = fit_ground_plane(cloud, opts);
  CHECK(a.nx == b.nx);
  CHECK(a.ny == b.ny);
  CHECK(a.nz == b.nz);
  CHECK(a.offset == b.offset);
}

TEST_CASE("the returned plane dominates every sampled hypothesis") {
  const PointCloud cloud = plane_with_outliers(21);
  std::vector<PlaneHypothesis> log;
  const Plane plane = fit_ground_plane(cloud, {150, 0.2, 7, 30.0}, &log);
  CHECK(!log.empty());
  const GroundSplit split = split_ground(cloud, plane, 0.2);
  const int winner_inliers = static_cast<int>(split.ground_indices.size());
  for (const PlaneHypothesis& hyp : log) {
    if (!hyp.tilt_rejected) {
      CHECK(winner_inliers >= hyp.inlier_count);
    }
  }
}

TEST_CASE("inlier distance is sign-invariant") {
  const PointCloud cloud = plane_with_outliers(8);
  const Plane plane = fit_ground_plane(cloud, {200, 0.2, 2, 30.0});
  const Plane flipped{-plane.nx, -plane.ny, -plane.nz, -plane.offset};
  const GroundSplit a = split_ground(cloud, plane, 0.2);
  const GroundSplit b = split_ground(cloud, flipped, 0.2);
  CHECK(a.ground_indices == b.ground_indices);
  CHECK(a.nonground_indices == b.nonground_indices);
}

TEST_CASE("the tilt guard rejects walls as ground") {
  // A dense vertical wall plus a sparser floor: without the guard the wall
  // plane wins on raw inlier count.
  PointCloud cloud;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> span(-10.0, 10.0);
  std::uniform_real_distribution<double> height(-1.5, 3.0);
  for (int i = 0; i < 200; ++i) {
    cloud.points.push_back({5.0, span(rng), height(rng), 0});
  }
  for (int i = 0; i < 100; ++i) {
    cloud.points.push_back({span(rng), span(rng), -1.7, 0});
  }

  const Plane guarded = fit_ground_plane(cloud, {500, 0.2, 5, 30.0});
  const GroundSplit split = split_ground(cloud, guarded, 0.2);
  int floor_inliers = 0, wall_inliers = 0;
  for (const std::int32_t i : split.ground_indices) {
    (i >= 200 ? floor_inliers : wall_inliers) += 1;
  }
  CHECK(floor_inliers >= 95);
  CHECK(wall_inliers <= 20);

  const Plane unguarded = fit_ground_plane(cloud, {500, 0.2, 5, 90.0});
  CHECK(std::abs(unguarded.nz) < 0.1);
}
