#include "gsmap/estimator.hpp"

#include "gsmap/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace gsmap {

namespace {

struct VoxelCoordHash {
  std::size_t operator()(const VoxelCoord& v) const {
    auto mix = [](std::uint64_t x) {
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdULL;
      x ^= x >> 33;
      return x;
    };
    std::uint64_t h = mix(static_cast<std::uint64_t>(v.x));
    h = mix(h ^ static_cast<std::uint64_t>(v.y) * 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ static_cast<std::uint64_t>(v.z) * 0xc2b2ae3d27d4eb4fULL);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

VoxelCoord voxel_of(const Eigen::Vector3d& p, double voxel_size) {
  return VoxelCoord{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                    static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                    static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

VoxelGrid voxelize(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxelize: voxel_size must be positive");
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    grid.occupied[voxel_of(cloud.points[i], voxel_size)].push_back(i);
  }
  return grid;
}

std::vector<std::uint32_t> gather_neighborhood(const VoxelGrid& grid, const VoxelCoord& center) {
  std::vector<std::uint32_t> out;
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        auto it = grid.occupied.find(VoxelCoord{center.x + dx, center.y + dy, center.z + dz});
        if (it == grid.occupied.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
  }
  return out;
}

Gaussian3D fit_voxel_gaussian(const PointCloud& cloud, const std::vector<std::uint32_t>& indices,
                              const EstimatorConfig& config) {
  if (indices.empty()) throw std::invalid_argument("fit_voxel_gaussian: empty point selection");
  const double n = static_cast<double>(indices.size());

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  for (std::uint32_t i : indices) {
    mean += cloud.points[i];
    if (!cloud.colors.empty()) color += cloud.colors[i].cast<double>();
  }
  mean /= n;
  color /= n;

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (std::uint32_t i : indices) {
    const Eigen::Vector3d d = cloud.points[i] - mean;
    scatter += d * d.transpose();
  }

  Gaussian3D g;
  g.mean = mean;
  g.covariance = scatter / n + config.epsilon * Eigen::Matrix3d::Identity();
  g.color = color;
  g.opacity = config.opacity;
  g.support = indices.size();
  return g;
}

std::vector<std::pair<VoxelCoord, Gaussian3D>> fit_occupied(const PointCloud& cloud,
                                                            const EstimatorConfig& config) {
  const VoxelGrid grid = voxelize(cloud, config.voxel_size);
  std::vector<std::pair<VoxelCoord, Gaussian3D>> out;
  out.reserve(grid.occupied.size());
  for (const auto& [coord, indices] : grid.occupied) {
    (void)indices;
    out.emplace_back(coord, fit_voxel_gaussian(cloud, gather_neighborhood(grid, coord), config));
  }
  return out;
}

double curvature_proxy(const Eigen::Matrix3d& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(covariance, Eigen::EigenvaluesOnly);
  const double trace = covariance.trace();
  if (!(trace > 0.0)) return 0.0;
  const double lambda_min = std::max(solver.eigenvalues()(0), 0.0);
  return lambda_min / trace;
}

double gaussian_distance(const Gaussian3D& a, const Gaussian3D& b, const EstimatorConfig& config) {
  return (a.mean - b.mean).norm() + config.lambda_sigma * (a.covariance - b.covariance).norm() +
         config.lambda_color * (a.color - b.color).norm();
}

double merge_threshold(double kappa_a, double kappa_b, const EstimatorConfig& config) {
  if (config.merge_mode == MergeMode::Verbatim) {
    return config.base_threshold * (1.0 + config.tau * (kappa_a + kappa_b));
  }
  const double flat = (1.0 / 3.0 - kappa_a) + (1.0 / 3.0 - kappa_b);
  return config.base_threshold * (1.0 + config.tau * flat * 3.0);
}

bool mergeable(const Gaussian3D& a, const Gaussian3D& b, const EstimatorConfig& config) {
  return gaussian_distance(a, b, config) <
         merge_threshold(curvature_proxy(a.covariance), curvature_proxy(b.covariance), config);
}

Gaussian3D merge_pair(const Gaussian3D& a, const Gaussian3D& b) {
  if (a.support == 0 || b.support == 0) throw InvariantError("merge_pair: zero support");
  const double na = static_cast<double>(a.support);
  const double nb = static_cast<double>(b.support);
  const double wa = na / (na + nb);
  const double wb = nb / (na + nb);

  Gaussian3D out;
  out.mean = wa * a.mean + wb * b.mean;
  const Eigen::Vector3d d = a.mean - b.mean;
  out.covariance = wa * a.covariance + wb * b.covariance + (wa * wb) * (d * d.transpose());
  out.color = wa * a.color + wb * b.color;
  out.opacity = wa * a.opacity + wb * b.opacity;
  out.support = a.support + b.support;
  return out;
}

Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& covariance, double epsilon) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(covariance);
  if (solver.eigenvalues()(0) >= epsilon) return covariance;
  Eigen::Vector3d lifted = solver.eigenvalues().cwiseMax(epsilon);
  return solver.eigenvectors() * lifted.asDiagonal() * solver.eigenvectors().transpose();
}

namespace {

struct MergeCandidate {
  double distance;
  VoxelCoord low_cell;  // cell of the lower-indexed Gaussian
  std::uint32_t i;
  std::uint32_t j;

  bool operator<(const MergeCandidate& other) const {
    return std::tie(distance, low_cell, i, j) <
           std::tie(other.distance, other.low_cell, other.i, other.j);
  }
};

}  // namespace

GaussianSet merge_set(GaussianSet gaussians, const EstimatorConfig& config) {
  for (int pass = 0; pass < config.max_merge_passes; ++pass) {
    const std::size_t n = gaussians.size();
    if (n < 2) break;

    std::vector<VoxelCoord> cells(n);
    std::vector<double> kappas(n);
    std::unordered_map<VoxelCoord, std::vector<std::uint32_t>, VoxelCoordHash> hash;
    for (std::uint32_t i = 0; i < n; ++i) {
      cells[i] = voxel_of(gaussians[i].mean, config.voxel_size);
      kappas[i] = curvature_proxy(gaussians[i].covariance);
      hash[cells[i]].push_back(i);
    }

    std::vector<MergeCandidate> candidates;
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = hash.find(VoxelCoord{cells[i].x + dx, cells[i].y + dy, cells[i].z + dz});
            if (it == hash.end()) continue;
            for (std::uint32_t j : it->second) {
              if (j <= i) continue;
              const double dist = gaussian_distance(gaussians[i], gaussians[j], config);
              if (dist < merge_threshold(kappas[i], kappas[j], config)) {
                candidates.push_back(MergeCandidate{dist, cells[i], i, j});
              }
            }
          }
        }
      }
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end());

    std::vector<char> consumed(n, 0);
    std::vector<char> dead(n, 0);
    bool any = false;
    for (const auto& c : candidates) {
      if (consumed[c.i] || consumed[c.j]) continue;
      consumed[c.i] = consumed[c.j] = 1;
      Gaussian3D merged = merge_pair(gaussians[c.i], gaussians[c.j]);
      merged.covariance = floor_covariance(merged.covariance, config.epsilon);
      gaussians[c.i] = merged;
      dead[c.j] = 1;
      any = true;
    }
    if (!any) break;

    GaussianSet next;
    next.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!dead[i]) next.push_back(std::move(gaussians[i]));
    }
    gaussians = std::move(next);
  }
  return gaussians;
}

GaussianSet estimate(const PointCloud& cloud, const EstimatorConfig& config) {
  if (cloud.empty()) return {};
  GaussianSet fits;
  for (auto& [coord, g] : fit_occupied(cloud, config)) {
    (void)coord;
    fits.push_back(std::move(g));
  }
  return merge_set(std::move(fits), config);
}

}  // namespace gsmap
