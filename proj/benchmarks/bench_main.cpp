#include <gsmap/estimator.hpp>
#include <gsmap/query.hpp>
#include <gsmap/renderer.hpp>

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace {

using namespace gsmap;

PointCloud blob_cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> spread(0.0, 0.3);
  std::uniform_real_distribution<double> shade(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.colors.reserve(n);
  for (int i = 0; i < n; ++i) {
    cloud.points.emplace_back(spread(rng), spread(rng), spread(rng));
    cloud.colors.emplace_back(static_cast<float>(shade(rng)), static_cast<float>(shade(rng)),
                              static_cast<float>(shade(rng)));
  }
  return cloud;
}

GaussianSet random_splats(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-0.4, 0.4);
  std::uniform_real_distribution<double> scale(1e-5, 4e-4);
  std::uniform_real_distribution<double> shade(0.0, 1.0);
  GaussianSet set;
  set.reserve(n);
  for (int i = 0; i < n; ++i) {
    Gaussian3D g;
    g.mean = Eigen::Vector3d(offset(rng), offset(rng), 1.5 + offset(rng));
    g.covariance = Eigen::Vector3d(scale(rng), scale(rng), scale(rng)).asDiagonal();
    g.color = Eigen::Vector3d(shade(rng), shade(rng), shade(rng));
    g.opacity = 0.3 + 0.7 * shade(rng);
    g.support = 1 + static_cast<std::uint64_t>(shade(rng) * 40.0);
    set.push_back(g);
  }
  return set;
}

RenderCamera vga_camera() {
  RenderCamera camera;
  camera.intrinsics.fx = camera.intrinsics.fy = 320.0;
  camera.intrinsics.cx = 160.0;
  camera.intrinsics.cy = 120.0;
  camera.intrinsics.width = 320;
  camera.intrinsics.height = 240;
  return camera;
}

void BM_Estimate(benchmark::State& state) {
  const PointCloud cloud = blob_cloud(static_cast<int>(state.range(0)), 11);
  const EstimatorConfig cfg = EstimatorConfig::with_voxel_size(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate(cloud, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Estimate)->Arg(10000)->Arg(50000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Render(benchmark::State& state) {
  const GaussianSet set = random_splats(static_cast<int>(state.range(0)), 23);
  const RenderCamera camera = vga_camera();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(set, camera));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Render)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ValueMap(benchmark::State& state) {
  IndexGrid grid;
  grid.cell_size = 0.05;
  for (std::int64_t y = 0; y < 200; ++y) {
    for (std::int64_t x = 0; x < 200; ++x) {
      grid.cells[{x, y}].state = CellState::Free;
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> coord(0, 199);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<ScoredUnit> units;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    units.push_back({UnitKind::Instance, static_cast<std::uint32_t>(i), score(rng),
                     {coord(rng), coord(rng)}});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_value_map(units, grid, 0.5));
  }
}
BENCHMARK(BM_ValueMap)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Frontiers(benchmark::State& state) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> cell_state(0, 3);
  IndexGrid grid;
  grid.cell_size = 0.05;
  for (std::int64_t y = 0; y < state.range(0); ++y) {
    for (std::int64_t x = 0; x < state.range(0); ++x) {
      const int s = cell_state(rng);
      if (s == 0) continue;  // leave a hole: unexplored by absence
      grid.cells[{x, y}].state = static_cast<CellState>(s - 1);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_frontiers(grid));
  }
}
BENCHMARK(BM_Frontiers)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
