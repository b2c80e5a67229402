#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <vector>

namespace gsmap {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
};

/// Camera-to-world rigid transform. +z is the viewing direction, image
/// origin top-left (x right, y down in camera frame).
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  bool orthonormal(double tol = 1e-6) const;

  Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam) const {
    return rotation * p_cam + translation;
  }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }

  static Pose identity() { return Pose{}; }
};

/// Depth in meters; 0 or NaN marks an invalid measurement.
struct DepthFrame {
  std::vector<float> values;  // row-major height*width
  CameraIntrinsics intrinsics;
  Pose pose;

  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * intrinsics.width + u]; }
};

struct ColorFrame {
  std::vector<Eigen::Vector3f> pixels;  // row-major, channels in [0,1]
  int width = 0;
  int height = 0;

  const Eigen::Vector3f& at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

struct BinaryMask {
  std::vector<std::uint8_t> bits;  // row-major, nonzero = selected
  int width = 0;
  int height = 0;

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  static BinaryMask full(int width, int height) {
    return BinaryMask{std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1), width, height};
  }
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;   // world frame, meters
  std::vector<Eigen::Vector3f> colors;   // parallel, RGB in [0,1]

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Back-projects every masked pixel with valid depth into a world-frame
/// colored point cloud. Throws std::invalid_argument on dimension mismatch.
PointCloud back_project(const DepthFrame& depth, const ColorFrame& color, const BinaryMask& mask);

struct PixelDepth {
  Eigen::Vector2d pixel;
  double depth = 0.0;
};

/// Projects a world point through the camera; empty when the point is behind
/// the camera or lands outside the image bounds.
std::optional<PixelDepth> project(const Eigen::Vector3d& point, const CameraIntrinsics& intrinsics,
                                  const Pose& pose);

}  // namespace gsmap
