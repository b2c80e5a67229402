#include "gsmap/dataset.hpp"

#include "gsmap/errors.hpp"
#include "gsmap/image_io.hpp"
#include "gsmap/semantics.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace gsmap {

namespace {

CameraIntrinsics parse_intrinsics(const nlohmann::json& j) {
  CameraIntrinsics intr;
  intr.fx = j.at("fx").get<double>();
  intr.fy = j.at("fy").get<double>();
  intr.cx = j.at("cx").get<double>();
  intr.cy = j.at("cy").get<double>();
  intr.width = j.at("width").get<int>();
  intr.height = j.at("height").get<int>();
  if (!intr.valid()) throw DataError("manifest: invalid intrinsics");
  return intr;
}

std::vector<Pose> load_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("poses: cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    double m[12];
    std::size_t got = 0;
    while (got < 12 && (ls >> m[got])) ++got;
    if (got == 0) continue;  // blank line
    if (got != 12) {
      throw DataError("poses: " + path.string() + ": line " + std::to_string(line_no) +
                      " has " + std::to_string(got) + " numbers, expected 12");
    }
    double extra;
    if (ls >> extra) {
      throw DataError("poses: " + path.string() + ": line " + std::to_string(line_no) +
                      " has more than 12 numbers");
    }
    Pose pose;
    pose.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    pose.translation << m[3], m[7], m[11];
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("manifest: cannot open " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest: " + manifest_path.string() + ": " + e.what());
  }

  const std::filesystem::path root = manifest_path.parent_path();
  Dataset dataset;
  std::vector<Pose> poses;
  try {
    dataset.intrinsics = parse_intrinsics(j.at("intrinsics"));
    poses = load_pose_file(root / j.at("poses").get<std::string>());

    std::set<std::string> seen;
    for (const auto& jf : j.at("frames")) {
      FrameEntry entry;
      entry.frame_id = jf.at("id").get<std::string>();
      if (!seen.insert(entry.frame_id).second) {
        throw DataError("manifest: duplicate frame id " + entry.frame_id);
      }
      entry.color_path = root / jf.at("color").get<std::string>();
      entry.depth_path = root / jf.at("depth").get<std::string>();
      entry.parse_path = root / jf.at("parse").get<std::string>();
      dataset.frames.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest: " + manifest_path.string() + ": " + e.what());
  }

  if (poses.size() != dataset.frames.size()) {
    throw DataError("manifest: " + std::to_string(dataset.frames.size()) + " frames but " +
                    std::to_string(poses.size()) + " poses");
  }
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    if (!poses[i].orthonormal()) {
      throw DataError("poses: frame " + dataset.frames[i].frame_id +
                      ": rotation is not orthonormal");
    }
    dataset.frames[i].pose = poses[i];
  }
  return dataset;
}

FrameInput load_frame(const Dataset& dataset, std::size_t index) {
  if (index >= dataset.frames.size()) {
    throw std::invalid_argument("load_frame: index out of range");
  }
  const FrameEntry& entry = dataset.frames[index];

  FrameInput frame;
  const Image16 depth_image = read_png16(entry.depth_path);
  if (depth_image.width != dataset.intrinsics.width ||
      depth_image.height != dataset.intrinsics.height) {
    throw DataError("frame " + entry.frame_id + ": depth image is " +
                    std::to_string(depth_image.width) + "x" + std::to_string(depth_image.height) +
                    ", expected " + std::to_string(dataset.intrinsics.width) + "x" +
                    std::to_string(dataset.intrinsics.height));
  }
  frame.depth = depth_from_millimeters(depth_image);
  frame.depth.intrinsics = dataset.intrinsics;
  frame.depth.pose = entry.pose;

  const ImageRgb8 color_image = read_png_rgb8(entry.color_path);
  if (color_image.width != dataset.intrinsics.width ||
      color_image.height != dataset.intrinsics.height) {
    throw DataError("frame " + entry.frame_id + ": color image size mismatch");
  }
  frame.color = color_from_rgb8(color_image);

  frame.parse = load_parse(entry.parse_path);
  if (frame.parse.frame_id != entry.frame_id) {
    throw DataError("frame " + entry.frame_id + ": parse file is for frame " +
                    frame.parse.frame_id);
  }
  const std::filesystem::path parse_dir = entry.parse_path.parent_path();
  for (const auto& inst : frame.parse.instances) {
    BinaryMask mask = read_mask_png(parse_dir / inst.mask_path);
    if (mask.width != dataset.intrinsics.width || mask.height != dataset.intrinsics.height) {
      throw DataError("frame " + entry.frame_id + ": mask for instance " +
                      std::to_string(inst.local_id) + " has mismatched size");
    }
    frame.masks.emplace(inst.local_id, std::move(mask));
  }
  return frame;
}

void write_pose_file(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw DataError("poses: cannot open " + path.string() + " for writing");
  out.precision(17);
  for (const auto& pose : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << pose.rotation(r, c) << " ";
      out << pose.translation(r);
      out << (r == 2 ? "\n" : " ");
    }
  }
  if (!out) throw DataError("poses: failed to write " + path.string());
}

}  // namespace gsmap
