#include "gsmap/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace gsmap {

bool Pose::orthonormal(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation.transpose() * rotation;
  if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

PointCloud back_project(const DepthFrame& depth, const ColorFrame& color, const BinaryMask& mask) {
  const CameraIntrinsics& in = depth.intrinsics;
  if (!in.valid()) {
    throw std::invalid_argument("back_project: invalid intrinsics");
  }
  if (color.width != in.width || color.height != in.height || mask.width != in.width ||
      mask.height != in.height ||
      depth.values.size() != static_cast<std::size_t>(in.width) * in.height) {
    throw std::invalid_argument("back_project: frame/mask dimension mismatch");
  }

  PointCloud cloud;
  for (int v = 0; v < in.height; ++v) {
    for (int u = 0; u < in.width; ++u) {
      if (!mask.at(u, v)) continue;
      const float d = depth.at(u, v);
      if (!(d > 0.0f) || !std::isfinite(d)) continue;  // 0 and NaN are invalid
      const Eigen::Vector3d ray((u - in.cx) / in.fx, (v - in.cy) / in.fy, 1.0);
      cloud.points.push_back(depth.pose.to_world(static_cast<double>(d) * ray));
      cloud.colors.push_back(color.at(u, v));
    }
  }
  return cloud;
}

std::optional<PixelDepth> project(const Eigen::Vector3d& point, const CameraIntrinsics& intrinsics,
                                  const Pose& pose) {
  const Eigen::Vector3d p_cam = pose.to_camera(point);
  if (p_cam.z() <= 0.0) return std::nullopt;
  const double u = intrinsics.fx * p_cam.x() / p_cam.z() + intrinsics.cx;
  const double v = intrinsics.fy * p_cam.y() / p_cam.z() + intrinsics.cy;
  if (u < 0.0 || u >= intrinsics.width || v < 0.0 || v >= intrinsics.height) {
    return std::nullopt;
  }
  return PixelDepth{Eigen::Vector2d(u, v), p_cam.z()};
}

}  // namespace gsmap
