#include "copg/range_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include "copg/errors.hpp"

namespace copg {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

// Shortest angular distance between two azimuth values, wrap-aware.
double azimuth_step(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

RangeImage build_range_image(const PointCloud& cloud,
                             std::span<const std::int32_t> indices, int rows,
                             int cols, double elevation_min,
                             double elevation_max) {
  if (rows < 1 || cols < 1) {
    throw InvalidSpec("build_range_image: rows and cols must be >= 1");
  }
  if (!(elevation_min < elevation_max)) {
    throw InvalidSpec("build_range_image: elevation_min must be < elevation_max");
  }

  RangeImage img;
  img.rows = rows;
  img.cols = cols;
  img.range.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  img.point_index.assign(static_cast<std::size_t>(rows) * cols, -1);

  const double elev_span = elevation_max - elevation_min;
  img.row_angles.resize(rows);
  for (int r = 0; r < rows; ++r) {
    img.row_angles[r] = elevation_max - (r + 0.5) * elev_span / rows;
  }
  img.col_angles.resize(cols);
  for (int c = 0; c < cols; ++c) {
    img.col_angles[c] = -180.0 + (c + 0.5) * 360.0 / cols;
  }

  for (const std::int32_t i : indices) {
    const Point3& p = cloud.points[i];
    const double horiz = std::hypot(p.x, p.y);
    const double dist = std::hypot(horiz, p.z);
    if (dist <= 1e-12) {
      continue;  // a return at the sensor origin carries no direction
    }
    const double elev = std::atan2(p.z, horiz) * kRadToDeg;
    if (elev < elevation_min || elev > elevation_max) {
      continue;
    }
    int r = static_cast<int>((elevation_max - elev) / elev_span * rows);
    r = std::clamp(r, 0, rows - 1);

    const double azim = std::atan2(p.y, p.x) * kRadToDeg;  // (-180, 180]
    int c = static_cast<int>((azim + 180.0) / 360.0 * cols);
    c = ((c % cols) + cols) % cols;

    const std::size_t cell = img.idx(r, c);
    if (img.point_index[cell] < 0 || dist < img.range[cell]) {
      img.point_index[cell] = i;
      img.range[cell] = dist;
    }
  }
  return img;
}

RangeImage build_range_image(const PointCloud& cloud, int rows, int cols,
                             double elevation_min, double elevation_max) {
  std::vector<std::int32_t> all(cloud.size());
  std::iota(all.begin(), all.end(), 0);
  return build_range_image(cloud, all, rows, cols, elevation_min,
                           elevation_max);
}

double merge_angle(double d1, double d2, double alpha_deg) {
  if (d1 < d2) {
    std::swap(d1, d2);
  }
  const double alpha = alpha_deg * kDegToRad;
  return std::atan2(d2 * std::sin(alpha), d1 - d2 * std::cos(alpha)) * kRadToDeg;
}

ClusterLabels cluster_range_image(const RangeImage& img, double theta_min_deg) {
  ClusterLabels out;
  out.rows = img.rows;
  out.cols = img.cols;
  out.label.assign(static_cast<std::size_t>(img.rows) * img.cols, -1);
  out.num_clusters = 0;

  const int rows = img.rows;
  const int cols = img.cols;

  auto passes = [&](int r0, int c0, int r1, int c1) {
    double alpha;
    if (c0 == c1) {
      alpha = std::abs(img.row_angles[r0] - img.row_angles[r1]);
    } else {
      alpha = azimuth_step(img.col_angles[c0], img.col_angles[c1]);
    }
    return merge_angle(img.range_at(r0, c0), img.range_at(r1, c1), alpha) >
           theta_min_deg;
  };

  std::queue<std::pair<int, int>> frontier;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!img.occupied(r, c) || out.at(r, c) >= 0) {
        continue;
      }
      const std::int32_t id = out.num_clusters++;
      out.label[static_cast<std::size_t>(r) * cols + c] = id;
      frontier.push({r, c});
      while (!frontier.empty()) {
        const auto [pr, pc] = frontier.front();
        frontier.pop();
        const int nbr[4][2] = {{pr - 1, pc},
                               {pr + 1, pc},
                               {pr, pc == 0 ? cols - 1 : pc - 1},
                               {pr, pc == cols - 1 ? 0 : pc + 1}};
        for (const auto& [nr, nc] : nbr) {
          if (nr < 0 || nr >= rows) {
            continue;
          }
          if (nr == pr && nc == pc) {
            continue;  // cols == 1 makes a pixel its own lateral neighbor
          }
          if (!img.occupied(nr, nc) || out.at(nr, nc) >= 0) {
            continue;
          }
          if (passes(pr, pc, nr, nc)) {
            out.label[static_cast<std::size_t>(nr) * cols + nc] = id;
            frontier.push({nr, nc});
          }
        }
      }
    }
  }
  return out;
}

std::vector<Cluster> extract_clusters(const ClusterLabels& labels,
                                      const RangeImage& img, int min_points,
                                      double max_distance) {
  std::vector<Cluster> all(labels.num_clusters);
  for (int i = 0; i < labels.num_clusters; ++i) {
    all[i].id = i;
    all[i].min_sensor_distance = std::numeric_limits<double>::infinity();
  }
  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      const std::int32_t id = labels.at(r, c);
      if (id < 0) {
        continue;
      }
      Cluster& cl = all[id];
      cl.pixel_coords.emplace_back(r, c);
      cl.point_indices.push_back(img.point_index[img.idx(r, c)]);
      cl.min_sensor_distance =
          std::min(cl.min_sensor_distance, img.range_at(r, c));
    }
  }
  std::vector<Cluster> kept;
  kept.reserve(all.size());
  for (Cluster& cl : all) {
    if (static_cast<int>(cl.point_indices.size()) >= min_points &&
        cl.min_sensor_distance <= max_distance) {
      kept.push_back(std::move(cl));
    }
  }
  return kept;
}

}  // namespace copg
