#pragma once

#include <gsmap/camera.hpp>
#include <gsmap/gaussian.hpp>
#include <gsmap/grid.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testutil {

/// Uniform points on a flat axis-aligned square at z = 0.
inline gsmap::PointCloud plane_cloud(int n, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  gsmap::PointCloud cloud;
  cloud.points.reserve(n);
  cloud.colors.reserve(n);
  for (int i = 0; i < n; ++i) {
    cloud.points.emplace_back(u(rng), u(rng), 0.0);
    cloud.colors.emplace_back(0.5f, 0.5f, 0.5f);
  }
  return cloud;
}

/// Uniform points inside a solid ball (cbrt-scaled radius for uniform
/// volume density).
inline gsmap::PointCloud ball_cloud(int n, double radius, const Eigen::Vector3d& center,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gsmap::PointCloud cloud;
  cloud.points.reserve(n);
  cloud.colors.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d dir(g(rng), g(rng), g(rng));
    dir.normalize();
    cloud.points.emplace_back(dir * radius * std::cbrt(u(rng)) + center);
    cloud.colors.emplace_back(0.5f, 0.5f, 0.5f);
  }
  return cloud;
}

/// Scattered blobs with varied colors; exercises sparse + dense voxels.
inline gsmap::PointCloud blob_cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_int_distribution<int> pick(0, 4);
  std::normal_distribution<double> g(0.0, 0.03);
  std::uniform_real_distribution<float> uc(0.0f, 1.0f);
  std::vector<Eigen::Vector3d> centers;
  for (int i = 0; i < 5; ++i) centers.emplace_back(u(rng), u(rng), u(rng));
  gsmap::PointCloud cloud;
  cloud.points.reserve(n);
  cloud.colors.reserve(n);
  for (int i = 0; i < n; ++i) {
    cloud.points.push_back(centers[pick(rng)] + Eigen::Vector3d(g(rng), g(rng), g(rng)));
    cloud.colors.emplace_back(uc(rng), uc(rng), uc(rng));
  }
  return cloud;
}

/// A mixed bag of geometries keyed on the seed, for oracle sweeps.
inline gsmap::PointCloud random_cloud(int n, std::uint64_t seed) {
  switch (seed % 3) {
    case 0: return plane_cloud(n, 0.4, seed);
    case 1: return ball_cloud(n, 0.06, Eigen::Vector3d(0.4, -0.3, 0.2), seed);
    default: return blob_cloud(n, seed);
  }
}

inline gsmap::Gaussian3D make_gaussian(
    const Eigen::Vector3d& mean,
    const Eigen::Matrix3d& covariance = Eigen::Matrix3d::Identity() * 1e-4,
    const Eigen::Vector3d& color = Eigen::Vector3d(0.5, 0.5, 0.5), double opacity = 0.8,
    std::uint64_t support = 1) {
  gsmap::Gaussian3D g;
  g.mean = mean;
  g.covariance = covariance;
  g.color = color;
  g.opacity = opacity;
  g.support = support;
  return g;
}

/// Random well-conditioned SPD matrix with eigenvalues in [lo, hi].
inline Eigen::Matrix3d random_spd(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = g(rng);
  const Eigen::Matrix3d q = Eigen::Matrix3d(m.householderQr().householderQ());
  std::uniform_real_distribution<double> ev(lo, hi);
  const Eigen::Vector3d lambda(ev(rng), ev(rng), ev(rng));
  return q * lambda.asDiagonal() * q.transpose();
}

inline gsmap::GaussianSet random_gaussians(int n, std::uint64_t seed, double spread = 0.08) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> up(-spread, spread);
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> us(1, 40);
  gsmap::GaussianSet set;
  set.reserve(n);
  for (int i = 0; i < n; ++i) {
    set.push_back(make_gaussian(Eigen::Vector3d(up(rng), up(rng), up(rng)),
                                random_spd(rng, 1e-6, 4e-4),
                                Eigen::Vector3d(uc(rng), uc(rng), uc(rng)),
                                0.2 + 0.8 * uc(rng), us(rng)));
  }
  return set;
}

/// Random sparse occupancy grid over roughly [0,w) x [0,h) with holes.
inline gsmap::IndexGrid random_grid(std::uint64_t seed, int w = 24, int h = 18) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> state(0, 3);  // 0: missing, 1..3 states
  gsmap::IndexGrid grid;
  grid.cell_size = 0.05;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int s = state(rng);
      if (s == 0) continue;  // cell never stored: implicit unexplored
      gsmap::GridCell cell;
      cell.state = static_cast<gsmap::CellState>(s - 1);
      grid.cells.emplace(gsmap::CellCoord{x, y}, cell);
    }
  }
  return grid;
}

/// Unique scratch directory under the system temp dir, removed on scope
/// exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "gsmap-test") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
