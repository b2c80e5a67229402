#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/gaussian.hpp"
#include "gsmap/grid.hpp"
#include "gsmap/image.hpp"

#include <Eigen/Core>

#include <optional>

namespace gsmap {

struct RenderCamera {
  CameraIntrinsics intrinsics;
  Pose pose;  // camera-to-world
  double near = 0.05;
  double far = 20.0;
};

/// A 3D Gaussian flattened onto the image plane.
struct SplatProjection {
  Eigen::Vector2d center;    // pixel coordinates
  Eigen::Matrix2d cov2d;     // pixel^2
  double depth = 0.0;        // camera-frame z, meters
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double opacity = 1.0;
};

/// Perspective projection of mean and covariance (affine approximation via
/// the pinhole Jacobian at the mean).  Returns nothing when the mean falls
/// outside (near, far) or the 3-sigma extent misses the image entirely.
std::optional<SplatProjection> project_gaussian(const Gaussian3D& gaussian,
                                                const RenderCamera& camera);

/// Front-to-back alpha compositing over per-pixel depth-sorted splats.
/// Output alpha is the accumulated coverage; the background shows through
/// with the remaining transmittance.
ImageBuffer render(const GaussianSet& gaussians, const RenderCamera& camera,
                   const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

/// Number of Gaussians whose mean projects inside the image with depth in
/// (near, far) and is not occluded: its depth may exceed the closest splat
/// covering that pixel by at most delta_occ.
int visibility_score(const GaussianSet& gaussians, const RenderCamera& camera, double delta_occ);

struct ViewpointConfig {
  double radius_min = 0.5;   // candidate annulus around the target, meters
  double radius_max = 2.5;
  double delta_occ = 0.1;    // occlusion depth tolerance, meters
  double agent_height = 0.88;
  int max_candidates = 64;   // stride-subsample candidate cells above this
  double near = 0.05;
  double far = 20.0;
};

/// Camera pose at standing height on a free cell looking at the set's
/// support-weighted centroid, chosen to maximize the visibility score.
/// Falls back to all free cells when the annulus holds none; throws
/// DataError when the grid has no free cells at all.
RenderCamera select_viewpoint(const GaussianSet& gaussians, const IndexGrid& grid,
                              const CameraIntrinsics& intrinsics, const ViewpointConfig& config);

/// Level (zero pitch/roll) camera-to-world pose at `position` with the given
/// yaw: 0 looks along +x (east), pi/2 along +y (north).
Pose make_level_pose(const Eigen::Vector3d& position, double yaw);

}  // namespace gsmap
