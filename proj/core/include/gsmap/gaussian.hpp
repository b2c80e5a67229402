#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace gsmap {

/// One anisotropic colored splat plus the number of source points behind it.
struct Gaussian3D {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();          // meters
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();  // m^2, SPD
  Eigen::Vector3d color = Eigen::Vector3d::Zero();          // RGB in [0,1]
  double opacity = 1.0;                                      // (0,1]
  std::uint64_t support = 1;

  bool bitwise_equal(const Gaussian3D& other) const {
    return (mean.array() == other.mean.array()).all() &&
           (covariance.array() == other.covariance.array()).all() &&
           (color.array() == other.color.array()).all() && opacity == other.opacity &&
           support == other.support;
  }
};

using GaussianSet = std::vector<Gaussian3D>;

inline std::uint64_t total_support(const GaussianSet& set) {
  std::uint64_t sum = 0;
  for (const auto& g : set) sum += g.support;
  return sum;
}

}  // namespace gsmap
