#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/map.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gsmap {

struct FrameEntry {
  std::string frame_id;
  std::filesystem::path color_path;
  std::filesystem::path depth_path;
  std::filesystem::path parse_path;
  Pose pose;  // camera-to-world
};

struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<FrameEntry> frames;
};

/// Reads a manifest JSON ({"intrinsics": ..., "poses": "poses.txt",
/// "frames": [{"id", "color", "depth", "parse"}, ...]}) plus its pose file:
/// one row-major 3x4 camera-to-world matrix (12 numbers) per line, one line
/// per frame, in frame order.  Relative paths resolve against the manifest's
/// directory.  Duplicate frame ids, count mismatches, and non-orthonormal
/// rotations are data errors naming the offending frame.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Loads one frame's images, parse, and masks; pixel dimensions must match
/// the dataset intrinsics.
FrameInput load_frame(const Dataset& dataset, std::size_t index);

void write_pose_file(const std::filesystem::path& path, const std::vector<Pose>& poses);

}  // namespace gsmap
