#include "gsmap/renderer.hpp"

#include "gsmap/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

namespace gsmap {

namespace {

constexpr double kTransmittanceCutoff = 1e-4;
constexpr double kMahalanobisCutoff = 9.0;  // (3 sigma)^2
constexpr int kTileSize = 16;

struct PreparedSplat {
  SplatProjection proj;
  Eigen::Matrix2d inv_cov;
  int min_px, max_px, min_py, max_py;  // inclusive pixel bounds
};

/// Total order over every projected field so compositing order never depends
/// on input order.
bool projection_less(const SplatProjection& a, const SplatProjection& b) {
  return std::make_tuple(a.depth, a.center.x(), a.center.y(), a.cov2d(0, 0), a.cov2d(0, 1),
                         a.cov2d(1, 1), a.color.x(), a.color.y(), a.color.z(), a.opacity) <
         std::make_tuple(b.depth, b.center.x(), b.center.y(), b.cov2d(0, 0), b.cov2d(0, 1),
                         b.cov2d(1, 1), b.color.x(), b.color.y(), b.color.z(), b.opacity);
}

double max_eigenvalue_2d(const Eigen::Matrix2d& m) {
  const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(std::max(half_trace * half_trace - det, 0.0));
  return half_trace + disc;
}

std::optional<PreparedSplat> prepare(const SplatProjection& proj, int width, int height) {
  const double det = proj.cov2d(0, 0) * proj.cov2d(1, 1) - proj.cov2d(0, 1) * proj.cov2d(1, 0);
  if (!(det > 0.0) || !std::isfinite(det)) return std::nullopt;

  PreparedSplat s;
  s.proj = proj;
  s.inv_cov << proj.cov2d(1, 1) / det, -proj.cov2d(0, 1) / det, -proj.cov2d(1, 0) / det,
      proj.cov2d(0, 0) / det;

  const double radius = 3.0 * std::sqrt(std::max(max_eigenvalue_2d(proj.cov2d), 0.0));
  s.min_px = std::max(0, static_cast<int>(std::floor(proj.center.x() - radius)));
  s.max_px = std::min(width - 1, static_cast<int>(std::ceil(proj.center.x() + radius)));
  s.min_py = std::max(0, static_cast<int>(std::floor(proj.center.y() - radius)));
  s.max_py = std::min(height - 1, static_cast<int>(std::ceil(proj.center.y() + radius)));
  if (s.min_px > s.max_px || s.min_py > s.max_py) return std::nullopt;
  return s;
}

std::vector<PreparedSplat> prepare_sorted(const GaussianSet& gaussians,
                                          const RenderCamera& camera) {
  std::vector<SplatProjection> projections;
  projections.reserve(gaussians.size());
  for (const auto& g : gaussians) {
    if (auto p = project_gaussian(g, camera)) projections.push_back(*p);
  }
  std::sort(projections.begin(), projections.end(), projection_less);

  std::vector<PreparedSplat> prepared;
  prepared.reserve(projections.size());
  const int w = camera.intrinsics.width;
  const int h = camera.intrinsics.height;
  for (const auto& p : projections) {
    if (auto s = prepare(p, w, h)) prepared.push_back(*s);
  }
  return prepared;
}

}  // namespace

std::optional<SplatProjection> project_gaussian(const Gaussian3D& gaussian,
                                                const RenderCamera& camera) {
  const auto& intr = camera.intrinsics;
  if (!intr.valid()) throw std::invalid_argument("project_gaussian: invalid intrinsics");

  const Eigen::Vector3d p = camera.pose.to_camera(gaussian.mean);
  const double z = p.z();
  if (!(z > camera.near) || !(z < camera.far)) return std::nullopt;

  SplatProjection proj;
  proj.center = Eigen::Vector2d(intr.fx * p.x() / z + intr.cx, intr.fy * p.y() / z + intr.cy);
  proj.depth = z;
  proj.color = gaussian.color;
  proj.opacity = gaussian.opacity;

  Eigen::Matrix<double, 2, 3> jacobian;
  jacobian << intr.fx / z, 0.0, -intr.fx * p.x() / (z * z), 0.0, intr.fy / z,
      -intr.fy * p.y() / (z * z);
  const Eigen::Matrix<double, 2, 3> a = jacobian * camera.pose.rotation.transpose();
  Eigen::Matrix2d cov2d = a * gaussian.covariance * a.transpose();
  proj.cov2d = 0.5 * (cov2d + cov2d.transpose());

  const double radius = 3.0 * std::sqrt(std::max(max_eigenvalue_2d(proj.cov2d), 0.0));
  if (proj.center.x() + radius < 0.0 || proj.center.x() - radius > intr.width - 1 ||
      proj.center.y() + radius < 0.0 || proj.center.y() - radius > intr.height - 1) {
    return std::nullopt;
  }
  return proj;
}

ImageBuffer render(const GaussianSet& gaussians, const RenderCamera& camera,
                   const Eigen::Vector3d& background) {
  const int width = camera.intrinsics.width;
  const int height = camera.intrinsics.height;
  const auto splats = prepare_sorted(gaussians, camera);

  const int tiles_x = (width + kTileSize - 1) / kTileSize;
  const int tiles_y = (height + kTileSize - 1) / kTileSize;
  std::vector<std::vector<std::uint32_t>> bins(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::uint32_t i = 0; i < splats.size(); ++i) {
    const auto& s = splats[i];
    for (int ty = s.min_py / kTileSize; ty <= s.max_py / kTileSize; ++ty) {
      for (int tx = s.min_px / kTileSize; tx <= s.max_px / kTileSize; ++tx) {
        bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(i);
      }
    }
  }

  ImageBuffer image = ImageBuffer::filled(width, height, Eigen::Vector4f::Zero());
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      const auto& bin = bins[static_cast<std::size_t>(ty) * tiles_x + tx];
      const int px_end = std::min(width, (tx + 1) * kTileSize);
      const int py_end = std::min(height, (ty + 1) * kTileSize);
      for (int py = ty * kTileSize; py < py_end; ++py) {
        for (int px = tx * kTileSize; px < px_end; ++px) {
          Eigen::Vector3d accum = Eigen::Vector3d::Zero();
          double transmittance = 1.0;
          for (std::uint32_t idx : bin) {
            const auto& s = splats[idx];
            if (px < s.min_px || px > s.max_px || py < s.min_py || py > s.max_py) continue;
            const Eigen::Vector2d d(px - s.proj.center.x(), py - s.proj.center.y());
            const double q = d.dot(s.inv_cov * d);
            if (!(q <= kMahalanobisCutoff)) continue;
            const double weight = s.proj.opacity * std::exp(-0.5 * q);
            if (!(weight > 0.0)) continue;
            accum += transmittance * weight * s.proj.color;
            transmittance *= 1.0 - weight;
            if (transmittance < kTransmittanceCutoff) break;
          }
          const Eigen::Vector3d rgb = accum + transmittance * background;
          image.at(px, py) = Eigen::Vector4f(static_cast<float>(rgb.x()),
                                             static_cast<float>(rgb.y()),
                                             static_cast<float>(rgb.z()),
                                             static_cast<float>(1.0 - transmittance));
        }
      }
    }
  }
  return image;
}

int visibility_score(const GaussianSet& gaussians, const RenderCamera& camera, double delta_occ) {
  const int width = camera.intrinsics.width;
  const int height = camera.intrinsics.height;
  const auto splats = prepare_sorted(gaussians, camera);

  std::vector<double> zbuf(static_cast<std::size_t>(width) * height,
                           std::numeric_limits<double>::infinity());
  for (const auto& s : splats) {
    for (int py = s.min_py; py <= s.max_py; ++py) {
      for (int px = s.min_px; px <= s.max_px; ++px) {
        const Eigen::Vector2d d(px - s.proj.center.x(), py - s.proj.center.y());
        if (!(d.dot(s.inv_cov * d) <= kMahalanobisCutoff)) continue;
        double& z = zbuf[static_cast<std::size_t>(py) * width + px];
        z = std::min(z, s.proj.depth);
      }
    }
  }

  const auto& intr = camera.intrinsics;
  int visible = 0;
  for (const auto& g : gaussians) {
    const Eigen::Vector3d p = camera.pose.to_camera(g.mean);
    const double z = p.z();
    if (!(z > camera.near) || !(z < camera.far)) continue;
    const double px = intr.fx * p.x() / z + intr.cx;
    const double py = intr.fy * p.y() / z + intr.cy;
    if (!(px >= 0.0) || !(px < intr.width) || !(py >= 0.0) || !(py < intr.height)) continue;
    const int u = static_cast<int>(std::floor(px));
    const int v = static_cast<int>(std::floor(py));
    if (z <= zbuf[static_cast<std::size_t>(v) * width + u] + delta_occ) ++visible;
  }
  return visible;
}

Pose make_level_pose(const Eigen::Vector3d& position, double yaw) {
  const Eigen::Vector3d view(std::cos(yaw), std::sin(yaw), 0.0);
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  const Eigen::Vector3d right = down.cross(view);
  Pose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = view;
  pose.translation = position;
  return pose;
}

RenderCamera select_viewpoint(const GaussianSet& gaussians, const IndexGrid& grid,
                              const CameraIntrinsics& intrinsics, const ViewpointConfig& config) {
  if (gaussians.empty()) throw std::invalid_argument("select_viewpoint: empty Gaussian set");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double total = 0.0;
  for (const auto& g : gaussians) {
    centroid += static_cast<double>(g.support) * g.mean;
    total += static_cast<double>(g.support);
  }
  centroid /= total;

  std::vector<CellCoord> free_cells;
  for (const auto& [coord, cell] : grid.cells) {
    if (cell.state == CellState::Free) free_cells.push_back(coord);
  }
  if (free_cells.empty()) throw DataError("select_viewpoint: map has no free cells");

  std::vector<CellCoord> candidates;
  for (const auto& c : free_cells) {
    const Eigen::Vector2d center = grid.cell_center(c);
    const double dist = (center - centroid.head<2>()).norm();
    if (dist >= config.radius_min && dist <= config.radius_max) candidates.push_back(c);
  }
  if (candidates.empty()) candidates = free_cells;

  if (static_cast<int>(candidates.size()) > config.max_candidates) {
    const std::size_t stride =
        (candidates.size() + config.max_candidates - 1) / config.max_candidates;
    std::vector<CellCoord> strided;
    for (std::size_t i = 0; i < candidates.size(); i += stride) strided.push_back(candidates[i]);
    candidates = std::move(strided);
  }

  bool have_best = false;
  int best_score = -1;
  double best_dist = 0.0;
  CellCoord best_cell;
  RenderCamera best_camera;
  for (const auto& c : candidates) {
    const Eigen::Vector2d center = grid.cell_center(c);
    const double yaw = std::atan2(centroid.y() - center.y(), centroid.x() - center.x());

    RenderCamera camera;
    camera.intrinsics = intrinsics;
    camera.pose = make_level_pose(
        Eigen::Vector3d(center.x(), center.y(), config.agent_height), yaw);
    camera.near = config.near;
    camera.far = config.far;

    const int score = visibility_score(gaussians, camera, config.delta_occ);
    const double dist = (center - centroid.head<2>()).norm();
    const bool better =
        !have_best || score > best_score ||
        (score == best_score &&
         (dist < best_dist || (dist == best_dist && row_major_less(c, best_cell))));
    if (better) {
      have_best = true;
      best_score = score;
      best_dist = dist;
      best_cell = c;
      best_camera = camera;
    }
  }
  return best_camera;
}

}  // namespace gsmap
