#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copg/core.hpp"
#include "copg/eval.hpp"
#include "copg/proposal.hpp"

namespace copg {

// Point cloud file: little-endian stream of 4 x float32 per point
// (x, y, z, intensity), KITTI velodyne layout.
void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_point_cloud(const std::filesystem::path& path);

// Calibration: {"P": [12 row-major doubles], "width": int, "height": int}.
void save_camera_model(const CameraModel& cam, const std::filesystem::path& path);
CameraModel load_camera_model(const std::filesystem::path& path);

// Segmentation map: binary PGM (P5), 8-bit, one class id per pixel.
void save_seg_map(const SegMap& seg, const std::filesystem::path& path);
SegMap load_seg_map(const std::filesystem::path& path);

// Minimal RGB raster for proposal overlays, written as binary PPM (P6).
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  void fill(std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

RgbImage make_rgb_image(int width, int height);
void draw_rect(RgbImage& img, const Box2D& box, std::uint8_t r, std::uint8_t g,
               std::uint8_t b, int thickness = 2);
void save_ppm(const RgbImage& img, const std::filesystem::path& path);
RgbImage load_ppm(const std::filesystem::path& path);
RgbImage rgb_from_seg(const SegMap& seg);

// COCO-style JSON: images, annotations with bbox [x,y,w,h], categories.
struct CocoImage {
  int id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CocoAnnotation {
  int id = 0;
  int image_id = 0;
  Box2D bbox;
  int category_id = 0;
  std::optional<double> score;
  std::optional<double> area;
  std::optional<std::string> stage;             // proposals only
  std::optional<int> source_cluster_id;         // proposals only
};

struct CocoCategory {
  int id = 0;
  std::string name;
};

struct CocoDoc {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::vector<CocoCategory> categories;

  std::string category_name(int id) const;
};

nlohmann::json coco_to_json(const CocoDoc& doc);
CocoDoc coco_from_json(const nlohmann::json& j);
void save_coco(const CocoDoc& doc, const std::filesystem::path& path);
CocoDoc load_coco(const std::filesystem::path& path);

// Scene-aligned views over a COCO document, ordered by image id. Annotation
// category ids resolve to names through the categories table; a missing table
// entry keeps the numeric id as the name.
std::vector<std::vector<Detection>> detections_by_image(const CocoDoc& doc);
std::vector<std::vector<GtBox>> gts_by_image(const CocoDoc& doc);

// Pipeline configuration file: "key = value" under [section] headers, '#'
// comments. Unknown sections or keys are parse errors.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const PipelineConfig& cfg);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Applies one "section.key=value" override on top of a config.
void apply_config_override(PipelineConfig& cfg, const std::string& assignment);

// Writes a file only through a temp-and-rename so partial output never lands
// under the final name.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);
std::string read_file(const std::filesystem::path& path);

}  // namespace copg
