#include "copg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "copg/errors.hpp"

namespace copg {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kRayEps = 1e-9;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double hash_unit(std::uint64_t x) {
  return static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53;
}

// Ray/plane: z = height. Returns t or absent.
std::optional<double> ray_ground(const Vec3& origin, const Vec3& dir,
                                 double height) {
  if (std::abs(dir.z) < 1e-15) {
    return std::nullopt;
  }
  const double t = (height - origin.z) / dir.z;
  if (t <= kRayEps) {
    return std::nullopt;
  }
  return t;
}

// Ray/object: slab method in the box frame, quadratic + caps for cylinders.
std::optional<double> ray_object(const Vec3& origin, const Vec3& dir,
                                 const ObjectSpec& obj) {
  const Vec3 rel = origin - Vec3{obj.cx, obj.cy, obj.cz};
  if (obj.shape == ObjectShape::kBox) {
    const double yaw = obj.yaw_deg * kDegToRad;
    const double c = std::cos(yaw), s = std::sin(yaw);
    // Rotate by -yaw into the box frame.
    const Vec3 o{c * rel.x + s * rel.y, -s * rel.x + c * rel.y, rel.z};
    const Vec3 d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z};
    const double half[3] = {obj.extent_x / 2, obj.extent_y / 2, obj.extent_z / 2};
    const double oo[3] = {o.x, o.y, o.z};
    const double dd[3] = {d.x, d.y, d.z};
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
      if (std::abs(dd[axis]) < 1e-15) {
        if (std::abs(oo[axis]) > half[axis]) {
          return std::nullopt;
        }
        continue;
      }
      double t0 = (-half[axis] - oo[axis]) / dd[axis];
      double t1 = (half[axis] - oo[axis]) / dd[axis];
      if (t0 > t1) {
        std::swap(t0, t1);
      }
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      if (t_enter > t_exit) {
        return std::nullopt;
      }
    }
    if (t_enter > kRayEps) {
      return t_enter;
    }
    return std::nullopt;
  }

  // Vertical cylinder: extent_x is the diameter, extent_z the height.
  const double radius = obj.extent_x / 2;
  const double z0 = -obj.extent_z / 2;
  const double z1 = obj.extent_z / 2;
  double best = std::numeric_limits<double>::infinity();

  const double a = dir.x * dir.x + dir.y * dir.y;
  if (a > 1e-15) {
    const double b = 2.0 * (rel.x * dir.x + rel.y * dir.y);
    const double cterm = rel.x * rel.x + rel.y * rel.y - radius * radius;
    const double disc = b * b - 4 * a * cterm;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
        if (t > kRayEps && t < best) {
          const double z = rel.z + t * dir.z;
          if (z >= z0 && z <= z1) {
            best = t;
          }
        }
      }
    }
  }
  if (std::abs(dir.z) > 1e-15) {
    for (const double zcap : {z0, z1}) {
      const double t = (zcap - rel.z) / dir.z;
      if (t > kRayEps && t < best) {
        const double px = rel.x + t * dir.x;
        const double py = rel.y + t * dir.y;
        if (px * px + py * py <= radius * radius) {
          best = t;
        }
      }
    }
  }
  if (std::isfinite(best)) {
    return best;
  }
  return std::nullopt;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  std::int32_t object = -1;  // -1 = ground
  bool valid = false;
};

Hit nearest_hit(const Vec3& origin, const Vec3& dir, const SceneSpec& spec,
                double max_t) {
  Hit hit;
  if (auto t = ray_ground(origin, dir, spec.ground_height)) {
    if (*t <= max_t) {
      hit = {*t, -1, true};
    }
  }
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    if (auto t = ray_object(origin, dir, spec.objects[i])) {
      if (*t <= max_t && (!hit.valid || *t < hit.t)) {
        hit = {*t, static_cast<std::int32_t>(i), true};
      }
    }
  }
  return hit;
}

// Projection without the in-image test: needed for ground-truth envelopes of
// partially visible objects, which box_from_pixels then clips.
std::optional<Pixel> project_unclipped(const Point3& p, const CameraModel& cam) {
  const auto& P = cam.P;
  const double uh = P[0] * p.x + P[1] * p.y + P[2] * p.z + P[3];
  const double vh = P[4] * p.x + P[5] * p.y + P[6] * p.z + P[7];
  const double wh = P[8] * p.x + P[9] * p.y + P[10] * p.z + P[11];
  if (!(wh > 0.0)) {
    return std::nullopt;
  }
  return Pixel{uh / wh, vh / wh};
}

// Outline sample points: box corners, or cap-circle samples for cylinders.
std::vector<Point3> outline_points(const ObjectSpec& obj) {
  std::vector<Point3> pts;
  if (obj.shape == ObjectShape::kBox) {
    const double yaw = obj.yaw_deg * kDegToRad;
    const double c = std::cos(yaw), s = std::sin(yaw);
    for (const double sx : {-0.5, 0.5}) {
      for (const double sy : {-0.5, 0.5}) {
        for (const double sz : {-0.5, 0.5}) {
          const double bx = sx * obj.extent_x;
          const double by = sy * obj.extent_y;
          pts.push_back({obj.cx + c * bx - s * by, obj.cy + s * bx + c * by,
                         obj.cz + sz * obj.extent_z, 0.0});
        }
      }
    }
  } else {
    constexpr int kCircleSamples = 128;
    const double radius = obj.extent_x / 2;
    for (int i = 0; i < kCircleSamples; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / kCircleSamples;
      const double px = obj.cx + radius * std::cos(phi);
      const double py = obj.cy + radius * std::sin(phi);
      pts.push_back({px, py, obj.cz - obj.extent_z / 2, 0.0});
      pts.push_back({px, py, obj.cz + obj.extent_z / 2, 0.0});
    }
  }
  return pts;
}

void validate(const SceneSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw InvalidSpec("scene spec: lidar grid must be at least 1x1");
  }
  if (!(spec.elevation_min < spec.elevation_max)) {
    throw InvalidSpec("scene spec: elevation_min must be < elevation_max");
  }
  if (spec.max_range <= 0.0) {
    throw InvalidSpec("scene spec: max_range must be positive");
  }
  if (spec.camera.width < 1 || spec.camera.height < 1 ||
      spec.camera.focal <= 0.0) {
    throw InvalidSpec("scene spec: camera is degenerate");
  }
  if (spec.ground_height >= 0.0) {
    throw InvalidSpec("scene spec: ground plane must sit below the sensor");
  }
  for (const ObjectSpec& obj : spec.objects) {
    if (obj.extent_x <= 0.0 || obj.extent_y <= 0.0 || obj.extent_z <= 0.0) {
      throw InvalidSpec("scene spec: object extents must be positive");
    }
    const double reach =
        0.5 * std::sqrt(obj.extent_x * obj.extent_x +
                        obj.extent_y * obj.extent_y +
                        obj.extent_z * obj.extent_z);
    const double center_dist =
        std::sqrt(obj.cx * obj.cx + obj.cy * obj.cy + obj.cz * obj.cz);
    if (center_dist <= reach + 0.3) {
      throw InvalidSpec("scene spec: object interpenetrates the sensor origin");
    }
  }
}

}  // namespace

const char* to_string(ObjectShape shape) {
  return shape == ObjectShape::kBox ? "box" : "cylinder";
}

const char* to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kCommon:
      return "common";
    case ObjectKind::kCorner:
      return "corner";
    case ObjectKind::kBackgroundStructure:
      return "background_structure";
  }
  return "unknown";
}

CameraModel camera_model(const CameraRig& rig) {
  // Lidar-to-camera axes: Xc = -y, Yc = -z, Zc = x, so K*R collapses to the
  // rows below; the fourth column is -K*R*C for camera center C.
  const double f = rig.focal, cu = rig.center_u, cv = rig.center_v;
  const double kr[3][3] = {{cu, -f, 0.0}, {cv, 0.0, -f}, {1.0, 0.0, 0.0}};
  const double c[3] = {rig.pos_x, rig.pos_y, rig.pos_z};
  CameraModel cam;
  cam.image_width = rig.width;
  cam.image_height = rig.height;
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) {
      cam.P[r * 4 + k] = kr[r][k];
    }
    cam.P[r * 4 + 3] = -(kr[r][0] * c[0] + kr[r][1] * c[1] + kr[r][2] * c[2]);
  }
  return cam;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
  validate(spec);

  SyntheticScene scene;
  scene.bundle.scene_id = spec.scene_id;
  scene.bundle.cam = camera_model(spec.camera);

  // Lidar pass: one beam per range-image cell, at the exact bin centers.
  const double elev_span = spec.elevation_max - spec.elevation_min;
  const Vec3 sensor{0.0, 0.0, 0.0};
  for (int r = 0; r < spec.rows; ++r) {
    const double elev =
        (spec.elevation_max - (r + 0.5) * elev_span / spec.rows) * kDegToRad;
    const double ce = std::cos(elev), se = std::sin(elev);
    for (int c = 0; c < spec.cols; ++c) {
      const double azim =
          (-180.0 + (c + 0.5) * 360.0 / spec.cols) * kDegToRad;
      const Vec3 dir{ce * std::cos(azim), ce * std::sin(azim), se};
      const Hit hit = nearest_hit(sensor, dir, spec, spec.max_range);
      if (!hit.valid) {
        continue;
      }
      const double intensity =
          0.1 + 0.8 * hash_unit(spec.seed ^
                                (static_cast<std::uint64_t>(r) * spec.cols + c));
      scene.bundle.cloud.points.push_back(
          {hit.t * dir.x, hit.t * dir.y, hit.t * dir.z, intensity});
      scene.truth.point_labels.push_back({hit.object < 0, hit.object});
    }
  }

  // Segmentation pass: per-pixel ray cast from the camera center.
  SegMap seg;
  seg.width = spec.camera.width;
  seg.height = spec.camera.height;
  seg.labels.assign(static_cast<std::size_t>(seg.width) * seg.height, kSegSky);
  const Vec3 cam_center{spec.camera.pos_x, spec.camera.pos_y, spec.camera.pos_z};
  constexpr double kSegMaxT = 2000.0;
  for (int v = 0; v < seg.height; ++v) {
    for (int u = 0; u < seg.width; ++u) {
      const Vec3 dir{1.0, -((u + 0.5) - spec.camera.center_u) / spec.camera.focal,
                     -((v + 0.5) - spec.camera.center_v) / spec.camera.focal};
      const Hit hit = nearest_hit(cam_center, dir, spec, kSegMaxT);
      std::uint8_t label = kSegSky;
      if (hit.valid) {
        if (hit.object < 0) {
          label = kSegRoad;
        } else {
          switch (spec.objects[hit.object].kind) {
            case ObjectKind::kBackgroundStructure:
              label = kSegBuilding;
              break;
            case ObjectKind::kCommon:
              label = kSegCommonObject;
              break;
            case ObjectKind::kCorner:
              label = kSegCornerObject;
              break;
          }
        }
      }
      seg.labels[static_cast<std::size_t>(v) * seg.width + u] = label;
    }
  }
  scene.bundle.seg = std::move(seg);

  // Truth: per-object hit counts and analytic 2D boxes. The envelope uses the
  // outline samples plus the object's own emitted points so it contains every
  // projected return by construction.
  scene.truth.objects.resize(spec.objects.size());
  std::vector<std::vector<Pixel>> object_pixels(spec.objects.size());
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    scene.truth.objects[i].kind = spec.objects[i].kind;
    scene.truth.objects[i].category = spec.objects[i].category;
    for (const Point3& corner : outline_points(spec.objects[i])) {
      if (auto px = project_unclipped(corner, scene.bundle.cam)) {
        object_pixels[i].push_back(*px);
      }
    }
  }
  for (std::size_t pi = 0; pi < scene.bundle.cloud.size(); ++pi) {
    const std::int32_t obj = scene.truth.point_labels[pi].object;
    if (obj >= 0) {
      ++scene.truth.objects[obj].hit_count;
      if (auto px =
              project_unclipped(scene.bundle.cloud.points[pi], scene.bundle.cam)) {
        object_pixels[obj].push_back(*px);
      }
    }
  }
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    scene.truth.objects[i].gt_box =
        box_from_pixels(object_pixels[i], scene.bundle.cam);
  }

  // Perfect detections for common objects (optionally jittered).
  std::vector<Detection> detections;
  std::mt19937_64 jitter_rng(splitmix64(spec.seed ^ 0xdecafULL));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    if (spec.objects[i].kind != ObjectKind::kCommon ||
        !scene.truth.objects[i].gt_box.has_value()) {
      continue;
    }
    Box2D box = *scene.truth.objects[i].gt_box;
    if (spec.detection_jitter > 0.0) {
      box.x += unit(jitter_rng) * spec.detection_jitter * box.w;
      box.y += unit(jitter_rng) * spec.detection_jitter * box.h;
    }
    detections.push_back({box, spec.objects[i].category, 1.0});
  }
  scene.bundle.detections = std::move(detections);

  return scene;
}

namespace {

struct AzimuthSector {
  double center = 0.0;
  double half = 0.0;
};

bool sector_free(const std::vector<AzimuthSector>& taken, double center,
                 double half) {
  for (const AzimuthSector& s : taken) {
    double d = std::abs(center - s.center);
    d = std::min(d, 360.0 - d);
    if (d < half + s.half) {
      return false;
    }
  }
  return true;
}

// Angular half-span of an object's bounding circle seen from the sensor.
double half_span_deg(double radius, double dist) {
  return std::asin(std::min(1.0, radius / dist)) * kRadToDeg + 2.5;
}

}  // namespace

std::vector<SceneSpec> generate_corpus(int n, std::uint64_t seed,
                                       const CorpusKnobs& knobs,
                                       const SceneSpec& base) {
  if (n < 1) {
    throw InvalidSpec("generate_corpus: n must be >= 1");
  }
  const char* corner_categories[] = {"barrier", "debris", "cart", "animal"};

  std::vector<SceneSpec> corpus;
  corpus.reserve(n);
  for (int idx = 0; idx < n; ++idx) {
    SceneSpec spec = base;
    spec.objects.clear();
    spec.seed = splitmix64(seed ^ (0x5ce9e5u + static_cast<std::uint64_t>(idx)));
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", idx);
    spec.scene_id = name;
    spec.detection_jitter = knobs.detection_jitter;

    std::mt19937_64 rng(spec.seed);
    auto uniform = [&](double lo, double hi) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto uniform_int = [&](int lo, int hi) {
      return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    const int n_common = uniform_int(knobs.common_min, knobs.common_max);
    const int n_corner = uniform_int(knobs.corner_min, knobs.corner_max);
    const int n_background =
        uniform_int(knobs.background_min, knobs.background_max);

    std::vector<AzimuthSector> taken;
    // The placement window starts inside the camera field of view and widens
    // if a crowded scene leaves no room; the object still exists either way.
    auto place = [&](double dist, double radius, double fov_limit) {
      const double half = half_span_deg(radius, dist);
      const double windows[] = {fov_limit, 60.0, 175.0};
      for (const double window : windows) {
        for (int attempt = 0; attempt < 80; ++attempt) {
          const double center = uniform(-window, window);
          if (sector_free(taken, center, half)) {
            taken.push_back({center, half});
            return center;
          }
        }
      }
      taken.push_back({180.0, half});  // park it behind the sensor
      return 180.0;
    };

    auto add_object = [&](ObjectSpec obj, double dist, double azim_deg) {
      const double azim = azim_deg * kDegToRad;
      obj.cx = dist * std::cos(azim);
      obj.cy = dist * std::sin(azim);
      obj.cz = spec.ground_height + obj.extent_z / 2;
      spec.objects.push_back(std::move(obj));
    };

    for (int i = 0; i < n_common; ++i) {
      ObjectSpec obj;
      obj.shape = ObjectShape::kBox;
      obj.kind = ObjectKind::kCommon;
      obj.extent_x = uniform(3.8, 4.6);
      obj.extent_y = uniform(1.7, 2.0);
      obj.extent_z = uniform(1.4, 1.7);
      obj.yaw_deg = uniform(0.0, 180.0);
      obj.category = "car";
      const double dist = uniform(14.0, 28.0);
      const double radius = 0.5 * std::hypot(obj.extent_x, obj.extent_y);
      add_object(std::move(obj), dist, place(dist, radius, 38.0));
    }
    for (int i = 0; i < n_corner; ++i) {
      ObjectSpec obj;
      obj.kind = ObjectKind::kCorner;
      obj.category = corner_categories[uniform_int(0, 3)];
      const double dist = uniform(7.0, 22.0);
      double radius;
      if (uniform(0.0, 1.0) < 0.5) {
        obj.shape = ObjectShape::kBox;
        obj.extent_x = uniform(0.6, 1.6);
        obj.extent_y = uniform(0.6, 1.6);
        obj.extent_z = uniform(0.8, 1.8);
        obj.yaw_deg = uniform(0.0, 180.0);
        radius = 0.5 * std::hypot(obj.extent_x, obj.extent_y);
      } else {
        obj.shape = ObjectShape::kCylinder;
        obj.extent_x = uniform(0.6, 1.6);
        obj.extent_y = obj.extent_x;
        obj.extent_z = uniform(0.8, 1.8);
        radius = obj.extent_x / 2;
      }
      add_object(std::move(obj), dist, place(dist, radius, 38.0));
    }
    for (int i = 0; i < n_background; ++i) {
      ObjectSpec obj;
      obj.shape = ObjectShape::kBox;
      obj.kind = ObjectKind::kBackgroundStructure;
      obj.extent_x = uniform(0.8, 2.0);
      obj.extent_y = uniform(6.0, 12.0);
      obj.extent_z = uniform(3.0, 6.0);
      obj.category = "building";
      const double dist = uniform(18.0, 38.0);
      const double azim = place(dist, 0.5 * obj.extent_y + 1.0, 50.0);
      obj.yaw_deg = azim;  // long side tangential to the viewing ray
      add_object(std::move(obj), dist, azim);
    }

    corpus.push_back(std::move(spec));
  }
  return corpus;
}

}  // namespace copg
