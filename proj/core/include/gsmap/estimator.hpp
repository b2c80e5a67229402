#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/gaussian.hpp"

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace gsmap {

enum class MergeMode { Verbatim, Flatness };

struct EstimatorConfig {
  double voxel_size = 0.01;     // meters
  double epsilon = 1e-6;        // covariance regularizer, m^2
  double lambda_sigma = 0.6;    // covariance term weight in the distance
  double lambda_color = 0.4;    // color term weight in the distance
  double tau = 1.0;             // curvature modulation strength
  double base_threshold = 0.02; // meters, merge acceptance scale
  double opacity = 0.8;
  MergeMode merge_mode = MergeMode::Verbatim;
  int max_merge_passes = 8;

  /// Defaults that track the voxel size unless overridden explicitly.
  static EstimatorConfig with_voxel_size(double voxel) {
    EstimatorConfig cfg;
    cfg.voxel_size = voxel;
    cfg.epsilon = (voxel / 10.0) * (voxel / 10.0);
    cfg.base_threshold = 2.0 * voxel;
    return cfg;
  }
};

struct VoxelCoord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  auto operator<=>(const VoxelCoord&) const = default;
};

VoxelCoord voxel_of(const Eigen::Vector3d& p, double voxel_size);

/// Occupied-voxel index: voxel coordinate -> indices into the source cloud,
/// in cloud order.  Ordered container so traversal is reproducible.
struct VoxelGrid {
  double voxel_size = 0.01;
  std::map<VoxelCoord, std::vector<std::uint32_t>> occupied;
};

VoxelGrid voxelize(const PointCloud& cloud, double voxel_size);

/// Point indices from the 3x3x3 block centered on `center`, stencil cells in
/// lexicographic offset order, indices within a cell in cloud order.
std::vector<std::uint32_t> gather_neighborhood(const VoxelGrid& grid, const VoxelCoord& center);

/// Mean / biased covariance (+ epsilon * I) / mean color over the given points.
/// Throws std::invalid_argument on an empty selection.
Gaussian3D fit_voxel_gaussian(const PointCloud& cloud, const std::vector<std::uint32_t>& indices,
                              const EstimatorConfig& config);

/// Per-voxel fits for every occupied voxel, keyed and ordered by voxel
/// coordinate.  This is the pre-merge stage of estimate().
std::vector<std::pair<VoxelCoord, Gaussian3D>> fit_occupied(const PointCloud& cloud,
                                                            const EstimatorConfig& config);

/// lambda_min / trace of the covariance; in [0, 1/3].  0 = perfectly flat,
/// 1/3 = isotropic.
double curvature_proxy(const Eigen::Matrix3d& covariance);

/// Mean L2 + weighted covariance Frobenius + weighted color L2.
double gaussian_distance(const Gaussian3D& a, const Gaussian3D& b, const EstimatorConfig& config);

/// Acceptance threshold for a pair with the given curvature proxies.
double merge_threshold(double kappa_a, double kappa_b, const EstimatorConfig& config);

bool mergeable(const Gaussian3D& a, const Gaussian3D& b, const EstimatorConfig& config);

/// Support-weighted moment matching.  Conserves the mixture's first and
/// second moments and total support exactly; symmetric in its arguments.
Gaussian3D merge_pair(const Gaussian3D& a, const Gaussian3D& b);

/// Raise eigenvalues below `epsilon` up to it.  Leaves the matrix untouched
/// (bit-exact) when none are below.
Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& covariance, double epsilon);

/// Iterative greedy pairwise merging.  Each pass pairs spatially adjacent
/// candidates in ascending distance order, at most one merge per Gaussian per
/// pass; stops after a pass with no merges or after max_merge_passes.
GaussianSet merge_set(GaussianSet gaussians, const EstimatorConfig& config);

/// Full pipeline: voxelize, fit each occupied voxel from its 27-cell
/// neighborhood, then merge.  Empty cloud -> empty set.
GaussianSet estimate(const PointCloud& cloud, const EstimatorConfig& config);

}  // namespace gsmap
