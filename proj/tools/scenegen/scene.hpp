#pragma once

#include <gsmap/camera.hpp>
#include <gsmap/image_io.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scenegen {

/// Axis-aligned colored box with the label a detector would report.
struct SceneBox {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  Eigen::Vector3d color;  // [0,1]
  std::string text;
};

struct Scene {
  std::vector<SceneBox> boxes;
  // Finite floor rectangle at z = 0.
  double floor_x_min = 0.0;
  double floor_x_max = 4.0;
  double floor_y_min = -2.0;
  double floor_y_max = 2.0;
  Eigen::Vector3d floor_color = Eigen::Vector3d(0.5, 0.5, 0.5);
  double max_range = 10.0;
};

/// What one instance contributes to a frame's parse.
struct ParseInstanceSpec {
  int local_id = 0;
  int box_index = 0;
};

struct ParseRegionSpec {
  int local_id = 0;
  std::string text;
  std::vector<int> members;  // local instance ids
};

struct FrameSpec {
  std::string frame_id;
  gsmap::Pose pose;
  std::vector<ParseInstanceSpec> instances;
  std::vector<ParseRegionSpec> regions;
};

struct RenderedFrame {
  gsmap::Image16 depth;                  // millimeters
  gsmap::ImageRgb8 color;
  std::vector<gsmap::BinaryMask> masks;  // one per scene box, first-hit pixels
};

/// Analytic ray casting: exact ray/box and ray/floor intersections, depth
/// quantized to millimeters, flat per-surface colors.
RenderedFrame render_frame(const Scene& scene, const gsmap::CameraIntrinsics& intrinsics,
                           const gsmap::Pose& pose);

/// Level camera pitched down by `pitch` radians, looking along +x.
gsmap::Pose looking_east_down(const Eigen::Vector3d& position, double pitch);

/// Writes a dataset directory: manifest.json, poses.txt, frames/, parses/,
/// masks/.  Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const Scene& scene,
                                    const gsmap::CameraIntrinsics& intrinsics,
                                    const std::vector<FrameSpec>& frames);

struct GeneratedScene {
  Scene scene;
  gsmap::CameraIntrinsics intrinsics;
  std::vector<FrameSpec> frames;
};

/// The bundled fixture: a static camera watching a red box and a blue crate
/// on a gray floor while the detector reports progressively more structure.
/// Frame 0 parses only the red box; frames 1 and 2 add the crate and the
/// "storage corner area" region, frame 2 under fresh local ids.
GeneratedScene fixture_scene();

/// Camera dollying sideways across the same two-box scene, full parse every
/// frame.
GeneratedScene sweep_scene(int frame_count);

/// One 640x480 frame with five labeled boxes.
GeneratedScene perf_scene();

}  // namespace scenegen
