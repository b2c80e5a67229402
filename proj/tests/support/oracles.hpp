#pragma once

#include <gsmap/camera.hpp>
#include <gsmap/gaussian.hpp>
#include <gsmap/grid.hpp>
#include <gsmap/image.hpp>
#include <gsmap/query.hpp>
#include <gsmap/renderer.hpp>

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <vector>

/// Deliberately naive re-implementations of the numeric contracts, written
/// against the definitions rather than the production code, so the two can
/// disagree only when one of them is wrong.
namespace oracle {

using VoxelKey = std::array<std::int64_t, 3>;

VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size);

struct VoxelFit {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  std::size_t count = 0;
};

/// Per-occupied-voxel fit over the 27-cell neighborhood, computed from raw
/// second moments (E[xx^T] - mu mu^T) instead of centered scatter.
std::map<VoxelKey, VoxelFit> voxel_fits(const gsmap::PointCloud& cloud, double voxel_size,
                                        double epsilon);

struct Moments {
  std::uint64_t support = 0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();    // support-weighted mean
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();  // weighted E[xx^T] of the mixture
};

Moments mixture_moments(const gsmap::GaussianSet& set);

/// Direct cells-times-units sum of the anchored-kernel field, without
/// normalization.  Row-major, y rows then x columns.
std::vector<double> value_field(const std::vector<gsmap::ScoredUnit>& units,
                                const gsmap::CellCoord& origin, std::int64_t width,
                                std::int64_t height, double cell_size, double sigma);

/// Brute-force frontier scan: free cells with any of 8 neighbors unexplored.
std::vector<gsmap::CellCoord> frontier_scan(const gsmap::IndexGrid& grid);

/// Frontier cells grouped by flood fill; one representative per group
/// (nearest the centroid, ties lowest row-major), groups ordered by their
/// lowest row-major member.
std::vector<gsmap::CellCoord> frontier_representatives(const gsmap::IndexGrid& grid);

/// Full-image per-pixel rasterizer: no tiles, every pixel tests every splat.
gsmap::ImageBuffer render_reference(const gsmap::GaussianSet& gaussians,
                                    const gsmap::RenderCamera& camera,
                                    const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

/// Naive visible-mean count with a dense splat depth buffer.
int visibility_reference(const gsmap::GaussianSet& gaussians, const gsmap::RenderCamera& camera,
                         double delta_occ);

}  // namespace oracle
