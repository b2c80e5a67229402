#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/gaussian.hpp"

#include <filesystem>

namespace gsmap {

/// Reads an ASCII or binary_little_endian PLY vertex cloud.  Requires x/y/z
/// (float or double); picks up red/green/blue (uchar or float) when present.
PointCloud read_point_cloud_ply(const std::filesystem::path& path);

void write_point_cloud_ply(const std::filesystem::path& path, const PointCloud& cloud,
                           bool binary = true);

/// Splat export: binary_little_endian vertices carrying position, the six
/// unique covariance entries (xx xy xz yy yz zz), color, opacity, support.
void write_splat_ply(const std::filesystem::path& path, const GaussianSet& gaussians);

}  // namespace gsmap
