#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copg/proposal.hpp"

namespace copg {

enum class ObjectShape { kBox, kCylinder };
enum class ObjectKind { kCommon, kCorner, kBackgroundStructure };

const char* to_string(ObjectShape shape);
const char* to_string(ObjectKind kind);

// A solid standing in the scene: an axis-extent box rotated by yaw about z,
// or a vertical cylinder (extent_x is the diameter, yaw ignored). Closed-form
// ray intersections keep the generated ranges exact.
struct ObjectSpec {
  ObjectShape shape = ObjectShape::kBox;
  ObjectKind kind = ObjectKind::kCorner;
  double cx = 0.0, cy = 0.0, cz = 0.0;  // center, lidar frame
  double yaw_deg = 0.0;
  double extent_x = 1.0, extent_y = 1.0, extent_z = 1.0;  // full extents
  std::string category = "misc";
};

// Pinhole camera placed near the sensor, looking along +x (lidar forward).
struct CameraRig {
  int width = 1242;
  int height = 375;
  double focal = 620.0;
  double center_u = 621.0;
  double center_v = 187.5;
  double pos_x = 0.27, pos_y = 0.0, pos_z = -0.08;  // camera center, lidar frame
};

CameraModel camera_model(const CameraRig& rig);

struct SceneSpec {
  std::uint64_t seed = 0;
  std::string scene_id = "scene_0000";
  double ground_height = -1.7;  // meters (z of the ground plane)
  int rows = 64;
  int cols = 2048;
  double elevation_min = -24.8;
  double elevation_max = 2.0;
  double max_range = 120.0;
  double detection_jitter = 0.0;  // fraction of box size; 0 = perfect boxes
  CameraRig camera;
  std::vector<ObjectSpec> objects;
};

// Per-point generator label: ground or the index of the hit object.
struct PointLabel {
  bool is_ground = false;
  std::int32_t object = -1;
};

struct ObjectTruth {
  ObjectKind kind = ObjectKind::kCorner;
  std::string category;
  std::optional<Box2D> gt_box;  // absent when the object is not visible
  int hit_count = 0;            // lidar returns on this object
};

struct SceneTruth {
  std::vector<PointLabel> point_labels;  // aligned with the cloud
  std::vector<ObjectTruth> objects;      // aligned with spec.objects
};

struct SyntheticScene {
  SceneBundle bundle;
  SceneTruth truth;
};

// Casts one lidar beam per range-image cell (exact bin-center angles) against
// the ground plane and every object, nearest hit wins. Also renders the
// segmentation map by per-pixel ray casting and derives analytic ground-truth
// boxes plus perfect detections for common objects. Fully deterministic per
// spec. Throws InvalidSpec for degenerate geometry.
SyntheticScene generate_scene(const SceneSpec& spec);

// Seg map class ids used by the generator. Ground and structures take ids
// from the default background set; objects take foreground ids.
inline constexpr std::uint8_t kSegRoad = 0;
inline constexpr std::uint8_t kSegBuilding = 2;
inline constexpr std::uint8_t kSegSky = 10;
inline constexpr std::uint8_t kSegCornerObject = 11;
inline constexpr std::uint8_t kSegCommonObject = 13;

// Per-scene object count ranges for randomized corpora.
struct CorpusKnobs {
  int corner_min = 1, corner_max = 3;
  int common_min = 1, common_max = 2;
  int background_min = 1, background_max = 3;
  double detection_jitter = 0.0;
};

// Reproducible randomized corpus: objects are placed in disjoint azimuth
// sectors so truth labels stay unambiguous (no occlusion between objects).
// `base` supplies the scene geometry (lidar grid, ground height, camera);
// seeds, scene ids and objects are filled per scene.
std::vector<SceneSpec> generate_corpus(int n, std::uint64_t seed,
                                       const CorpusKnobs& knobs,
                                       const SceneSpec& base = SceneSpec{});

}  // namespace copg
