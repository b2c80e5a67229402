#include "scene.hpp"

#include <gsmap/dataset.hpp>
#include <gsmap/errors.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace scenegen {

namespace {

/// Slab-method ray/AABB intersection; returns the entry parameter when the
/// ray starting outside hits the box.
std::optional<double> intersect_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                    const SceneBox& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (dir(axis) == 0.0) {
      if (origin(axis) < box.lo(axis) || origin(axis) > box.hi(axis)) return std::nullopt;
      continue;
    }
    double t0 = (box.lo(axis) - origin(axis)) / dir(axis);
    double t1 = (box.hi(axis) - origin(axis)) / dir(axis);
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near <= 0.0) return std::nullopt;
  return t_near;
}

std::optional<double> intersect_floor(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                      const Scene& scene) {
  if (dir.z() >= 0.0) return std::nullopt;
  const double t = -origin.z() / dir.z();
  if (t <= 0.0) return std::nullopt;
  const double x = origin.x() + t * dir.x();
  const double y = origin.y() + t * dir.y();
  if (x < scene.floor_x_min || x > scene.floor_x_max || y < scene.floor_y_min ||
      y > scene.floor_y_max) {
    return std::nullopt;
  }
  return t;
}

}  // namespace

RenderedFrame render_frame(const Scene& scene, const gsmap::CameraIntrinsics& intrinsics,
                           const gsmap::Pose& pose) {
  RenderedFrame frame;
  frame.depth.width = intrinsics.width;
  frame.depth.height = intrinsics.height;
  frame.depth.values.assign(static_cast<std::size_t>(intrinsics.width) * intrinsics.height, 0);
  frame.color.width = intrinsics.width;
  frame.color.height = intrinsics.height;
  frame.color.values.assign(3 * static_cast<std::size_t>(intrinsics.width) * intrinsics.height, 0);
  frame.masks.resize(scene.boxes.size());
  for (auto& mask : frame.masks) {
    mask.width = intrinsics.width;
    mask.height = intrinsics.height;
    mask.bits.assign(static_cast<std::size_t>(intrinsics.width) * intrinsics.height, 0);
  }

  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      // The camera-frame ray through pixel (u, v) has z = 1, so the ray
      // parameter of a hit IS the depth the sensor would report.
      const Eigen::Vector3d dir_cam((u - intrinsics.cx) / intrinsics.fx,
                                    (v - intrinsics.cy) / intrinsics.fy, 1.0);
      const Eigen::Vector3d dir = pose.rotation * dir_cam;
      const Eigen::Vector3d& origin = pose.translation;

      double best_t = std::numeric_limits<double>::infinity();
      int best_box = -1;
      for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
        if (auto t = intersect_box(origin, dir, scene.boxes[b])) {
          if (*t < best_t) {
            best_t = *t;
            best_box = static_cast<int>(b);
          }
        }
      }
      if (auto t = intersect_floor(origin, dir, scene)) {
        if (*t < best_t) {
          best_t = *t;
          best_box = -2;
        }
      }
      if (!std::isfinite(best_t) || best_t > scene.max_range) continue;

      const std::size_t i = static_cast<std::size_t>(v) * intrinsics.width + u;
      const double mm = std::round(best_t * 1000.0);
      frame.depth.values[i] =
          static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
      const Eigen::Vector3d& c =
          best_box >= 0 ? scene.boxes[static_cast<std::size_t>(best_box)].color
                        : scene.floor_color;
      for (int ch = 0; ch < 3; ++ch) {
        frame.color.values[3 * i + ch] =
            static_cast<std::uint8_t>(std::lround(std::clamp(c(ch), 0.0, 1.0) * 255.0));
      }
      if (best_box >= 0) frame.masks[static_cast<std::size_t>(best_box)].bits[i] = 1;
    }
  }
  return frame;
}

gsmap::Pose looking_east_down(const Eigen::Vector3d& position, double pitch) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  gsmap::Pose pose;
  // Columns: camera right (-y, i.e. south), camera down, camera view.
  pose.rotation.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);
  pose.rotation.col(1) = Eigen::Vector3d(-s, 0.0, -c);
  pose.rotation.col(2) = Eigen::Vector3d(c, 0.0, -s);
  pose.translation = position;
  return pose;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir, const Scene& scene,
                                    const gsmap::CameraIntrinsics& intrinsics,
                                    const std::vector<FrameSpec>& frames) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "parses");
  fs::create_directories(dir / "masks");

  nlohmann::json manifest;
  manifest["intrinsics"] = {{"fx", intrinsics.fx}, {"fy", intrinsics.fy},
                            {"cx", intrinsics.cx}, {"cy", intrinsics.cy},
                            {"width", intrinsics.width}, {"height", intrinsics.height}};
  manifest["poses"] = "poses.txt";
  manifest["frames"] = nlohmann::json::array();

  std::vector<gsmap::Pose> poses;
  for (const auto& spec : frames) {
    const RenderedFrame rendered = render_frame(scene, intrinsics, spec.pose);
    const std::string color_name = "frames/" + spec.frame_id + "_color.png";
    const std::string depth_name = "frames/" + spec.frame_id + "_depth.png";
    const std::string parse_name = "parses/" + spec.frame_id + ".json";
    gsmap::write_png_rgb8(dir / color_name, rendered.color);
    gsmap::write_png16(dir / depth_name, rendered.depth);

    nlohmann::json parse;
    parse["frame_id"] = spec.frame_id;
    parse["instances"] = nlohmann::json::array();
    for (const auto& inst : spec.instances) {
      const std::string mask_name = spec.frame_id + "_i" + std::to_string(inst.local_id) + ".png";
      gsmap::write_mask_png(dir / "masks" / mask_name,
                            rendered.masks[static_cast<std::size_t>(inst.box_index)]);
      parse["instances"].push_back({{"id", inst.local_id},
                                    {"text", scene.boxes[inst.box_index].text},
                                    {"mask", "../masks/" + mask_name}});
    }
    parse["regions"] = nlohmann::json::array();
    for (const auto& region : spec.regions) {
      parse["regions"].push_back(
          {{"id", region.local_id}, {"text", region.text}, {"members", region.members}});
    }
    std::ofstream parse_out(dir / parse_name);
    parse_out << parse.dump(2) << "\n";
    if (!parse_out) throw gsmap::DataError("scenegen: failed to write " + parse_name);

    manifest["frames"].push_back({{"id", spec.frame_id},
                                  {"color", color_name},
                                  {"depth", depth_name},
                                  {"parse", parse_name}});
    poses.push_back(spec.pose);
  }

  gsmap::write_pose_file(dir / "poses.txt", poses);
  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  if (!out) throw gsmap::DataError("scenegen: failed to write manifest");
  return manifest_path;
}

namespace {

Scene two_box_scene() {
  Scene scene;
  scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.75, -0.60, 0.0),
                                 Eigen::Vector3d(2.25, -0.10, 0.50),
                                 Eigen::Vector3d(0.80, 0.15, 0.10), "red storage box"});
  scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.75, 0.10, 0.0),
                                 Eigen::Vector3d(2.25, 0.60, 0.40),
                                 Eigen::Vector3d(0.10, 0.20, 0.80), "blue plastic crate"});
  return scene;
}

gsmap::CameraIntrinsics small_intrinsics() {
  gsmap::CameraIntrinsics intr;
  intr.fx = 110.0;
  intr.fy = 110.0;
  intr.cx = 80.0;
  intr.cy = 60.0;
  intr.width = 160;
  intr.height = 120;
  return intr;
}

constexpr double kPitch = 0.5235987755982988;  // 30 degrees

}  // namespace

GeneratedScene fixture_scene() {
  GeneratedScene g;
  g.scene = two_box_scene();
  g.intrinsics = small_intrinsics();

  const gsmap::Pose pose = looking_east_down(Eigen::Vector3d(0.35, 0.0, 1.20), kPitch);
  FrameSpec f0;
  f0.frame_id = "frame_000";
  f0.pose = pose;
  f0.instances = {{0, 0}};

  FrameSpec f1;
  f1.frame_id = "frame_001";
  f1.pose = pose;
  f1.instances = {{0, 0}, {1, 1}};
  f1.regions = {{0, "storage corner area", {0, 1}}};

  FrameSpec f2;
  f2.frame_id = "frame_002";
  f2.pose = pose;
  f2.instances = {{5, 0}, {7, 1}};
  f2.regions = {{3, "storage corner area", {5, 7}}};

  g.frames = {f0, f1, f2};
  return g;
}

GeneratedScene sweep_scene(int frame_count) {
  if (frame_count < 1) throw std::invalid_argument("sweep_scene: frame_count must be positive");
  GeneratedScene g;
  g.scene = two_box_scene();
  g.intrinsics = small_intrinsics();

  for (int k = 0; k < frame_count; ++k) {
    const double span = 0.9;
    const double y = frame_count == 1
                         ? 0.0
                         : -span / 2.0 + span * static_cast<double>(k) / (frame_count - 1);
    FrameSpec f;
    char id[32];
    std::snprintf(id, sizeof(id), "frame_%03d", k);
    f.frame_id = id;
    f.pose = looking_east_down(Eigen::Vector3d(0.35, y, 1.20), kPitch);
    f.instances = {{0, 0}, {1, 1}};
    f.regions = {{0, "storage corner area", {0, 1}}};
    g.frames.push_back(std::move(f));
  }
  return g;
}

GeneratedScene perf_scene() {
  GeneratedScene g;
  g.scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.8, -1.00, 0.0),
                                   Eigen::Vector3d(2.2, -0.65, 0.45),
                                   Eigen::Vector3d(0.8, 0.1, 0.1), "red storage box"});
  g.scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.8, -0.45, 0.0),
                                   Eigen::Vector3d(2.2, -0.10, 0.40),
                                   Eigen::Vector3d(0.1, 0.2, 0.8), "blue plastic crate"});
  g.scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.8, 0.10, 0.0),
                                   Eigen::Vector3d(2.2, 0.45, 0.50),
                                   Eigen::Vector3d(0.1, 0.7, 0.2), "green recycling bin"});
  g.scene.boxes.push_back(SceneBox{Eigen::Vector3d(1.8, 0.65, 0.0),
                                   Eigen::Vector3d(2.2, 1.00, 0.35),
                                   Eigen::Vector3d(0.8, 0.7, 0.1), "yellow tool chest"});
  g.scene.boxes.push_back(SceneBox{Eigen::Vector3d(2.6, -0.30, 0.0),
                                   Eigen::Vector3d(3.0, 0.30, 0.60),
                                   Eigen::Vector3d(0.6, 0.3, 0.7), "purple shipping carton"});

  g.intrinsics.fx = 525.0;
  g.intrinsics.fy = 525.0;
  g.intrinsics.cx = 320.0;
  g.intrinsics.cy = 240.0;
  g.intrinsics.width = 640;
  g.intrinsics.height = 480;

  FrameSpec f;
  f.frame_id = "frame_000";
  f.pose = looking_east_down(Eigen::Vector3d(0.2, 0.0, 1.30), kPitch);
  f.instances = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
  f.regions = {{0, "crowded storage shelf area", {0, 1, 2, 3, 4}}};
  g.frames = {f};
  return g;
}

}  // namespace scenegen
