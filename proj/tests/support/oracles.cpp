#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace oracle {

VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size) {
  return VoxelKey{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

std::map<VoxelKey, VoxelFit> voxel_fits(const gsmap::PointCloud& cloud, double voxel_size,
                                        double epsilon) {
  std::map<VoxelKey, std::vector<std::uint32_t>> by_voxel;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    by_voxel[voxel_key(cloud.points[i], voxel_size)].push_back(i);
  }

  std::map<VoxelKey, VoxelFit> fits;
  for (const auto& [key, own] : by_voxel) {
    (void)own;
    std::vector<std::uint32_t> members;
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          auto it = by_voxel.find(VoxelKey{key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == by_voxel.end()) continue;
          members.insert(members.end(), it->second.begin(), it->second.end());
        }
      }
    }

    VoxelFit fit;
    fit.count = members.size();
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d raw = Eigen::Matrix3d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    for (std::uint32_t i : members) {
      const Eigen::Vector3d& p = cloud.points[i];
      sum += p;
      raw += p * p.transpose();
      color += cloud.colors[i].cast<double>();
    }
    const double n = static_cast<double>(members.size());
    fit.mean = sum / n;
    fit.covariance =
        raw / n - fit.mean * fit.mean.transpose() + epsilon * Eigen::Matrix3d::Identity();
    fit.color = color / n;
    fits.emplace(key, fit);
  }
  return fits;
}

Moments mixture_moments(const gsmap::GaussianSet& set) {
  Moments m;
  double total = 0.0;
  Eigen::Vector3d mean_acc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second_acc = Eigen::Matrix3d::Zero();
  for (const auto& g : set) {
    const double w = static_cast<double>(g.support);
    m.support += g.support;
    total += w;
    mean_acc += w * g.mean;
    second_acc += w * (g.covariance + g.mean * g.mean.transpose());
  }
  if (total > 0.0) {
    m.mean = mean_acc / total;
    m.second = second_acc / total;
  }
  return m;
}

std::vector<double> value_field(const std::vector<gsmap::ScoredUnit>& units,
                                const gsmap::CellCoord& origin, std::int64_t width,
                                std::int64_t height, double cell_size, double sigma) {
  std::vector<double> field(static_cast<std::size_t>(width * height), 0.0);
  const double cutoff = 9.0 * sigma * sigma;
  for (std::int64_t row = 0; row < height; ++row) {
    for (std::int64_t col = 0; col < width; ++col) {
      double sum = 0.0;
      for (const auto& u : units) {
        const double dx = static_cast<double>(origin.x + col - u.anchor.x) * cell_size;
        const double dy = static_cast<double>(origin.y + row - u.anchor.y) * cell_size;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= cutoff) sum += u.score * std::exp(-d2 / (2.0 * sigma * sigma));
      }
      field[static_cast<std::size_t>(row * width + col)] = sum;
    }
  }
  return field;
}

std::vector<gsmap::CellCoord> frontier_scan(const gsmap::IndexGrid& grid) {
  std::vector<gsmap::CellCoord> out;
  for (const auto& [c, cell] : grid.cells) {
    if (cell.state != gsmap::CellState::Free) continue;
    bool adjacent_unknown = false;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        auto it = grid.cells.find(gsmap::CellCoord{c.x + dx, c.y + dy});
        if (it == grid.cells.end() || it->second.state == gsmap::CellState::Unexplored) {
          adjacent_unknown = true;
        }
      }
    }
    if (adjacent_unknown) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<gsmap::CellCoord> frontier_representatives(const gsmap::IndexGrid& grid) {
  const std::vector<gsmap::CellCoord> cells = frontier_scan(grid);
  std::set<gsmap::CellCoord> pending(cells.begin(), cells.end());

  // Scan row-major so group discovery order is the order of each group's
  // lowest row-major member.
  std::vector<gsmap::CellCoord> scan(cells);
  std::sort(scan.begin(), scan.end(), gsmap::row_major_less);

  std::vector<gsmap::CellCoord> reps;
  for (const auto& seed : scan) {
    if (!pending.count(seed)) continue;
    std::vector<gsmap::CellCoord> group;
    std::vector<gsmap::CellCoord> stack{seed};
    pending.erase(seed);
    while (!stack.empty()) {
      const gsmap::CellCoord c = stack.back();
      stack.pop_back();
      group.push_back(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const gsmap::CellCoord n{c.x + dx, c.y + dy};
          if (pending.erase(n)) stack.push_back(n);
        }
      }
    }

    double cx = 0.0;
    double cy = 0.0;
    for (const auto& c : group) {
      cx += static_cast<double>(c.x);
      cy += static_cast<double>(c.y);
    }
    cx /= static_cast<double>(group.size());
    cy /= static_cast<double>(group.size());

    gsmap::CellCoord best{};
    double best_d = std::numeric_limits<double>::infinity();
    bool have = false;
    for (const auto& c : group) {
      const double dx = static_cast<double>(c.x) - cx;
      const double dy = static_cast<double>(c.y) - cy;
      const double d = dx * dx + dy * dy;
      if (!have || d < best_d || (d == best_d && gsmap::row_major_less(c, best))) {
        have = true;
        best_d = d;
        best = c;
      }
    }
    reps.push_back(best);
  }
  return reps;
}

namespace {

struct FlatSplat {
  Eigen::Vector2d center;
  Eigen::Matrix2d cov;
  Eigen::Matrix2d inv;
  double depth = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double opacity = 1.0;
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;  // inclusive pixel bounds
};

/// Projects every splat to the image plane, culls against the frustum and
/// image bounds, and depth-sorts with the same total order the contract
/// prescribes.
std::vector<FlatSplat> flatten(const gsmap::GaussianSet& gaussians,
                               const gsmap::RenderCamera& camera) {
  const auto& intr = camera.intrinsics;
  std::vector<FlatSplat> flats;
  for (const auto& g : gaussians) {
    const Eigen::Vector3d p = camera.pose.rotation.transpose() * (g.mean - camera.pose.translation);
    if (!(p.z() > camera.near && p.z() < camera.far)) continue;

    FlatSplat s;
    s.depth = p.z();
    s.center = Eigen::Vector2d(intr.fx * p.x() / p.z() + intr.cx,
                               intr.fy * p.y() / p.z() + intr.cy);
    Eigen::Matrix<double, 2, 3> jac;
    jac << intr.fx / p.z(), 0.0, -intr.fx * p.x() / (p.z() * p.z()),
        0.0, intr.fy / p.z(), -intr.fy * p.y() / (p.z() * p.z());
    const Eigen::Matrix<double, 2, 3> a = jac * camera.pose.rotation.transpose();
    const Eigen::Matrix2d cov = a * g.covariance * a.transpose();
    s.cov = 0.5 * (cov + cov.transpose());
    s.color = g.color;
    s.opacity = g.opacity;

    const double half_tr = 0.5 * (s.cov(0, 0) + s.cov(1, 1));
    const double det = s.cov(0, 0) * s.cov(1, 1) - s.cov(0, 1) * s.cov(1, 0);
    const double lam_max = half_tr + std::sqrt(std::max(half_tr * half_tr - det, 0.0));
    const double radius = 3.0 * std::sqrt(std::max(lam_max, 0.0));
    if (s.center.x() + radius < 0.0 || s.center.x() - radius > intr.width - 1 ||
        s.center.y() + radius < 0.0 || s.center.y() - radius > intr.height - 1) {
      continue;
    }
    if (!(det > 0.0) || !std::isfinite(det)) continue;
    s.inv = s.cov.inverse();
    s.min_x = std::max(0, static_cast<int>(std::floor(s.center.x() - radius)));
    s.max_x = std::min(intr.width - 1, static_cast<int>(std::ceil(s.center.x() + radius)));
    s.min_y = std::max(0, static_cast<int>(std::floor(s.center.y() - radius)));
    s.max_y = std::min(intr.height - 1, static_cast<int>(std::ceil(s.center.y() + radius)));
    if (s.min_x > s.max_x || s.min_y > s.max_y) continue;
    flats.push_back(s);
  }
  std::sort(flats.begin(), flats.end(), [](const FlatSplat& a, const FlatSplat& b) {
    return std::make_tuple(a.depth, a.center.x(), a.center.y(), a.cov(0, 0), a.cov(0, 1),
                           a.cov(1, 1), a.color.x(), a.color.y(), a.color.z(), a.opacity) <
           std::make_tuple(b.depth, b.center.x(), b.center.y(), b.cov(0, 0), b.cov(0, 1),
                           b.cov(1, 1), b.color.x(), b.color.y(), b.color.z(), b.opacity);
  });
  return flats;
}

}  // namespace

gsmap::ImageBuffer render_reference(const gsmap::GaussianSet& gaussians,
                                    const gsmap::RenderCamera& camera,
                                    const Eigen::Vector3d& background) {
  const auto& intr = camera.intrinsics;
  const std::vector<FlatSplat> flats = flatten(gaussians, camera);

  gsmap::ImageBuffer image =
      gsmap::ImageBuffer::filled(intr.width, intr.height, Eigen::Vector4f::Zero());
  for (int py = 0; py < intr.height; ++py) {
    for (int px = 0; px < intr.width; ++px) {
      Eigen::Vector3d accum = Eigen::Vector3d::Zero();
      double transmittance = 1.0;
      for (const auto& s : flats) {
        if (px < s.min_x || px > s.max_x || py < s.min_y || py > s.max_y) continue;
        const Eigen::Vector2d d(px - s.center.x(), py - s.center.y());
        const double q = d.dot(s.inv * d);
        if (!(q <= 9.0)) continue;
        const double w = s.opacity * std::exp(-0.5 * q);
        if (!(w > 0.0)) continue;
        accum += transmittance * w * s.color;
        transmittance *= 1.0 - w;
        if (transmittance < 1e-4) break;
      }
      const Eigen::Vector3d rgb = accum + transmittance * background;
      image.at(px, py) =
          Eigen::Vector4f(static_cast<float>(rgb.x()), static_cast<float>(rgb.y()),
                          static_cast<float>(rgb.z()), static_cast<float>(1.0 - transmittance));
    }
  }
  return image;
}

int visibility_reference(const gsmap::GaussianSet& gaussians, const gsmap::RenderCamera& camera,
                         double delta_occ) {
  const auto& intr = camera.intrinsics;
  std::vector<double> zbuf(static_cast<std::size_t>(intr.width) * intr.height,
                           std::numeric_limits<double>::infinity());
  for (const auto& s : flatten(gaussians, camera)) {
    for (int py = s.min_y; py <= s.max_y; ++py) {
      for (int px = s.min_x; px <= s.max_x; ++px) {
        const Eigen::Vector2d d(px - s.center.x(), py - s.center.y());
        if (!(d.dot(s.inv * d) <= 9.0)) continue;
        double& z = zbuf[static_cast<std::size_t>(py) * intr.width + px];
        z = std::min(z, s.depth);
      }
    }
  }

  int visible = 0;
  for (const auto& g : gaussians) {
    const Eigen::Vector3d p = camera.pose.rotation.transpose() * (g.mean - camera.pose.translation);
    if (!(p.z() > camera.near && p.z() < camera.far)) continue;
    const double px = intr.fx * p.x() / p.z() + intr.cx;
    const double py = intr.fy * p.y() / p.z() + intr.cy;
    if (!(px >= 0.0 && px < intr.width && py >= 0.0 && py < intr.height)) continue;
    const int u = static_cast<int>(std::floor(px));
    const int v = static_cast<int>(std::floor(py));
    if (p.z() <= zbuf[static_cast<std::size_t>(v) * intr.width + u] + delta_occ) ++visible;
  }
  return visible;
}

}  // namespace oracle
