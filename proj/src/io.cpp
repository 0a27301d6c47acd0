#include "copg/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "copg/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "point cloud I/O assumes a little-endian host");

namespace copg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
      throw IoError("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

void save_point_cloud(const PointCloud& cloud, const fs::path& path) {
  std::string data;
  data.resize(cloud.size() * 16);
  char* out = data.data();
  for (const Point3& p : cloud.points) {
    const float values[4] = {static_cast<float>(p.x), static_cast<float>(p.y),
                             static_cast<float>(p.z),
                             static_cast<float>(p.intensity)};
    std::memcpy(out, values, 16);
    out += 16;
  }
  write_file_atomic(path, data);
}

PointCloud load_point_cloud(const fs::path& path) {
  const std::string data = read_file(path);
  if (data.size() % 16 != 0) {
    throw IoError("point cloud file " + path.string() +
                  " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.points.resize(data.size() / 16);
  const char* in = data.data();
  for (Point3& p : cloud.points) {
    float values[4];
    std::memcpy(values, in, 16);
    in += 16;
    p = {values[0], values[1], values[2], values[3]};
  }
  return cloud;
}

void save_camera_model(const CameraModel& cam, const fs::path& path) {
  json j;
  j["P"] = cam.P;
  j["width"] = cam.image_width;
  j["height"] = cam.image_height;
  write_file_atomic(path, j.dump(2) + "\n");
}

CameraModel load_camera_model(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CameraModel cam;
  try {
    const auto& p = j.at("P");
    if (!p.is_array() || p.size() != 12) {
      throw ParseError(path.string() + ": P must be a 12-element array");
    }
    for (int i = 0; i < 12; ++i) {
      cam.P[i] = p[i].get<double>();
    }
    cam.image_width = j.at("width").get<int>();
    cam.image_height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (cam.image_width <= 0 || cam.image_height <= 0) {
    throw ParseError(path.string() + ": image dimensions must be positive");
  }
  return cam;
}

void save_seg_map(const SegMap& seg, const fs::path& path) {
  std::string data = "P5\n" + std::to_string(seg.width) + " " +
                     std::to_string(seg.height) + "\n255\n";
  data.append(reinterpret_cast<const char*>(seg.labels.data()),
              seg.labels.size());
  write_file_atomic(path, data);
}

namespace {

// Reads one whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istringstream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw ParseError("truncated PNM header");
}

}  // namespace

SegMap load_seg_map(const fs::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  try {
    if (pnm_token(in) != "P5") {
      throw ParseError(path.string() + ": not a binary PGM (P5)");
    }
    SegMap seg;
    seg.width = std::stoi(pnm_token(in));
    seg.height = std::stoi(pnm_token(in));
    const int maxval = std::stoi(pnm_token(in));
    if (seg.width <= 0 || seg.height <= 0 || maxval != 255) {
      throw ParseError(path.string() + ": unsupported PGM geometry");
    }
    const std::size_t pixels =
        static_cast<std::size_t>(seg.width) * seg.height;
    const std::size_t offset = static_cast<std::size_t>(in.tellg()) + 1;
    if (data.size() < offset + pixels) {
      throw ParseError(path.string() + ": truncated PGM payload");
    }
    seg.labels.assign(data.begin() + offset, data.begin() + offset + pixels);
    return seg;
  } catch (const std::invalid_argument&) {
    throw ParseError(path.string() + ": malformed PGM header");
  }
}

void RgbImage::fill(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }
}

RgbImage make_rgb_image(int width, int height) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);
  return img;
}

void draw_rect(RgbImage& img, const Box2D& box, std::uint8_t r, std::uint8_t g,
               std::uint8_t b, int thickness) {
  const int x0 = std::clamp(static_cast<int>(std::lround(box.x)), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::lround(box.y)), 0, img.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::lround(box.x + box.w)), 0, img.width - 1);
  const int y1 = std::clamp(static_cast<int>(std::lround(box.y + box.h)), 0, img.height - 1);
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) {
      return;
    }
    const std::size_t at = (static_cast<std::size_t>(y) * img.width + x) * 3;
    img.rgb[at] = r;
    img.rgb[at + 1] = g;
    img.rgb[at + 2] = b;
  };
  for (int t = 0; t < thickness; ++t) {
    for (int x = x0; x <= x1; ++x) {
      put(x, y0 + t);
      put(x, y1 - t);
    }
    for (int y = y0; y <= y1; ++y) {
      put(x0 + t, y);
      put(x1 - t, y);
    }
  }
}

void save_ppm(const RgbImage& img, const fs::path& path) {
  std::string data = "P6\n" + std::to_string(img.width) + " " +
                     std::to_string(img.height) + "\n255\n";
  data.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  write_file_atomic(path, data);
}

RgbImage load_ppm(const fs::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  if (pnm_token(in) != "P6") {
    throw ParseError(path.string() + ": not a binary PPM (P6)");
  }
  RgbImage img;
  img.width = std::stoi(pnm_token(in));
  img.height = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  if (img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw ParseError(path.string() + ": unsupported PPM geometry");
  }
  const std::size_t bytes = static_cast<std::size_t>(img.width) * img.height * 3;
  const std::size_t offset = static_cast<std::size_t>(in.tellg()) + 1;
  if (data.size() < offset + bytes) {
    throw ParseError(path.string() + ": truncated PPM payload");
  }
  img.rgb.assign(data.begin() + offset, data.begin() + offset + bytes);
  return img;
}

RgbImage rgb_from_seg(const SegMap& seg) {
  RgbImage img = make_rgb_image(seg.width, seg.height);
  for (std::size_t i = 0; i < seg.labels.size(); ++i) {
    // Spread class ids over hue-ish bands; exact colors are cosmetic.
    const std::uint8_t id = seg.labels[i];
    img.rgb[i * 3] = static_cast<std::uint8_t>(37 * id + 40);
    img.rgb[i * 3 + 1] = static_cast<std::uint8_t>(73 * id + 80);
    img.rgb[i * 3 + 2] = static_cast<std::uint8_t>(151 * id + 120);
  }
  return img;
}

std::string CocoDoc::category_name(int id) const {
  for (const CocoCategory& c : categories) {
    if (c.id == id) {
      return c.name;
    }
  }
  return std::to_string(id);
}

json coco_to_json(const CocoDoc& doc) {
  json images = json::array();
  for (const CocoImage& im : doc.images) {
    images.push_back({{"id", im.id},
                      {"file_name", im.file_name},
                      {"width", im.width},
                      {"height", im.height}});
  }
  json annotations = json::array();
  for (const CocoAnnotation& a : doc.annotations) {
    json ja = {{"id", a.id},
               {"image_id", a.image_id},
               {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
               {"category_id", a.category_id}};
    if (a.score) ja["score"] = *a.score;
    if (a.area) ja["area"] = *a.area;
    if (a.stage) ja["stage"] = *a.stage;
    if (a.source_cluster_id) ja["source_cluster_id"] = *a.source_cluster_id;
    annotations.push_back(std::move(ja));
  }
  json categories = json::array();
  for (const CocoCategory& c : doc.categories) {
    categories.push_back({{"id", c.id}, {"name", c.name}});
  }
  return {{"images", images},
          {"annotations", annotations},
          {"categories", categories}};
}

CocoDoc coco_from_json(const json& j) {
  CocoDoc doc;
  try {
    for (const auto& im : j.value("images", json::array())) {
      doc.images.push_back({im.at("id").get<int>(),
                            im.value("file_name", std::string{}),
                            im.value("width", 0), im.value("height", 0)});
    }
    for (const auto& a : j.value("annotations", json::array())) {
      CocoAnnotation ann;
      ann.id = a.value("id", 0);
      ann.image_id = a.at("image_id").get<int>();
      const auto& bb = a.at("bbox");
      if (!bb.is_array() || bb.size() != 4) {
        throw ParseError("annotation bbox must be [x, y, w, h]");
      }
      ann.bbox = {bb[0].get<double>(), bb[1].get<double>(),
                  bb[2].get<double>(), bb[3].get<double>()};
      ann.category_id = a.value("category_id", 0);
      if (a.contains("score")) ann.score = a["score"].get<double>();
      if (a.contains("area")) ann.area = a["area"].get<double>();
      if (a.contains("stage")) ann.stage = a["stage"].get<std::string>();
      if (a.contains("source_cluster_id")) {
        ann.source_cluster_id = a["source_cluster_id"].get<int>();
      }
      doc.annotations.push_back(std::move(ann));
    }
    for (const auto& c : j.value("categories", json::array())) {
      doc.categories.push_back(
          {c.at("id").get<int>(), c.at("name").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed COCO JSON: ") + e.what());
  }
  return doc;
}

void save_coco(const CocoDoc& doc, const fs::path& path) {
  write_file_atomic(path, coco_to_json(doc).dump(2) + "\n");
}

CocoDoc load_coco(const fs::path& path) {
  try {
    return coco_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

template <typename T, typename Fn>
std::vector<std::vector<T>> group_by_image(const CocoDoc& doc, Fn to_item) {
  std::map<int, std::vector<T>> by_id;
  for (const CocoImage& im : doc.images) {
    by_id[im.id];
  }
  for (const CocoAnnotation& a : doc.annotations) {
    by_id[a.image_id].push_back(to_item(a));
  }
  std::vector<std::vector<T>> out;
  out.reserve(by_id.size());
  for (auto& [id, items] : by_id) {
    out.push_back(std::move(items));
  }
  return out;
}

}  // namespace

std::vector<std::vector<Detection>> detections_by_image(const CocoDoc& doc) {
  return group_by_image<Detection>(doc, [&](const CocoAnnotation& a) {
    return Detection{a.bbox, doc.category_name(a.category_id),
                     a.score.value_or(1.0)};
  });
}

std::vector<std::vector<GtBox>> gts_by_image(const CocoDoc& doc) {
  return group_by_image<GtBox>(doc, [&](const CocoAnnotation& a) {
    return GtBox{a.bbox, doc.category_name(a.category_id),
                 a.area.value_or(a.bbox.area())};
  });
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::set<std::uint8_t> parse_id_set(const std::string& value) {
  std::set<std::uint8_t> ids;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      continue;
    }
    const int id = std::stoi(item);
    if (id < 0 || id > 255) {
      throw ParseError("class id out of 8-bit range: " + item);
    }
    ids.insert(static_cast<std::uint8_t>(id));
  }
  return ids;
}

void set_config_key(PipelineConfig& cfg, const std::string& section,
                    const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  try {
    if (full == "ground.ransac_iterations") {
      cfg.ransac_iterations = std::stoi(value);
    } else if (full == "ground.ransac_inlier_dist") {
      cfg.ransac_inlier_dist = std::stod(value);
    } else if (full == "ground.max_tilt_deg") {
      cfg.ground_max_tilt_deg = std::stod(value);
    } else if (full == "ground.seed") {
      cfg.seed = std::stoull(value);
    } else if (full == "range_image.rows") {
      cfg.range_rows = std::stoi(value);
    } else if (full == "range_image.cols") {
      cfg.range_cols = std::stoi(value);
    } else if (full == "range_image.elevation_min") {
      cfg.elevation_min = std::stod(value);
    } else if (full == "range_image.elevation_max") {
      cfg.elevation_max = std::stod(value);
    } else if (full == "cluster.theta_min") {
      cfg.theta_min = std::stod(value);
    } else if (full == "cluster.min_cluster_points") {
      cfg.min_cluster_points = std::stoi(value);
    } else if (full == "cluster.max_cluster_distance") {
      cfg.max_cluster_distance = std::stod(value);
    } else if (full == "filter.bg_ratio_max") {
      cfg.bg_ratio_max = std::stod(value);
    } else if (full == "filter.suppression_iou_max") {
      cfg.suppression_iou_max = std::stod(value);
    } else if (full == "filter.background_class_ids") {
      cfg.background_class_ids = parse_id_set(value);
    } else {
      throw ParseError("unknown config key: " + full);
    }
  } catch (const std::invalid_argument&) {
    throw ParseError("bad value for " + full + ": '" + value + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("value out of range for " + full + ": '" + value + "'");
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) {
      line.resize(comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError("config line " + std::to_string(line_no) +
                         ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    set_config_key(cfg, section, trim(line.substr(0, eq)),
                   trim(line.substr(eq + 1)));
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path));
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[ground]\n";
  out << "ransac_iterations = " << cfg.ransac_iterations << "\n";
  out << "ransac_inlier_dist = " << cfg.ransac_inlier_dist << "\n";
  out << "max_tilt_deg = " << cfg.ground_max_tilt_deg << "\n";
  out << "seed = " << cfg.seed << "\n\n";
  out << "[range_image]\n";
  out << "rows = " << cfg.range_rows << "\n";
  out << "cols = " << cfg.range_cols << "\n";
  out << "elevation_min = " << cfg.elevation_min << "\n";
  out << "elevation_max = " << cfg.elevation_max << "\n\n";
  out << "[cluster]\n";
  out << "theta_min = " << cfg.theta_min << "\n";
  out << "min_cluster_points = " << cfg.min_cluster_points << "\n";
  out << "max_cluster_distance = " << cfg.max_cluster_distance << "\n\n";
  out << "[filter]\n";
  out << "bg_ratio_max = " << cfg.bg_ratio_max << "\n";
  out << "suppression_iou_max = " << cfg.suppression_iou_max << "\n";
  out << "background_class_ids = ";
  bool first = true;
  for (const std::uint8_t id : cfg.background_class_ids) {
    if (!first) {
      out << ",";
    }
    out << static_cast<int>(id);
    first = false;
  }
  out << "\n";
  return std::move(out).str();
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  json ids = json::array();
  for (const std::uint8_t id : cfg.background_class_ids) {
    ids.push_back(static_cast<int>(id));
  }
  return {{"ground",
           {{"ransac_iterations", cfg.ransac_iterations},
            {"ransac_inlier_dist", cfg.ransac_inlier_dist},
            {"max_tilt_deg", cfg.ground_max_tilt_deg},
            {"seed", cfg.seed}}},
          {"range_image",
           {{"rows", cfg.range_rows},
            {"cols", cfg.range_cols},
            {"elevation_min", cfg.elevation_min},
            {"elevation_max", cfg.elevation_max}}},
          {"cluster",
           {{"theta_min", cfg.theta_min},
            {"min_cluster_points", cfg.min_cluster_points},
            {"max_cluster_distance", cfg.max_cluster_distance}}},
          {"filter",
           {{"bg_ratio_max", cfg.bg_ratio_max},
            {"suppression_iou_max", cfg.suppression_iou_max},
            {"background_class_ids", ids}}}};
}

void apply_config_override(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ParseError("override must look like section.key=value: " + assignment);
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    throw ParseError("override key must be section.key: " + key);
  }
  set_config_key(cfg, key.substr(0, dot), key.substr(dot + 1), value);
}

}  // namespace copg
