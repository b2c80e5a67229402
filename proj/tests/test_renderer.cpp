#include <gsmap/errors.hpp>
#include <gsmap/renderer.hpp>

#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace gsmap;

namespace {

RenderCamera axis_camera() {
  RenderCamera camera;
  camera.intrinsics = CameraIntrinsics{100.0, 100.0, 16.0, 12.0, 32, 24};
  return camera;  // identity pose looking along +z
}

/// Camera a little west of the origin looking east, at typical scene height.
RenderCamera east_camera(int width, int height) {
  RenderCamera camera;
  camera.intrinsics = CameraIntrinsics{100.0, 100.0, width / 2.0, height / 2.0, width, height};
  camera.pose.rotation.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);
  camera.pose.rotation.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  camera.pose.rotation.col(2) = Eigen::Vector3d(1.0, 0.0, 0.0);
  camera.pose.translation = Eigen::Vector3d(-1.2, 0.0, 0.0);
  return camera;
}

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  Pose pose;
  pose.rotation = q.toRotationMatrix();
  pose.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return pose;
}

double max_pixel_difference(const ImageBuffer& a, const ImageBuffer& b) {
  REQUIRE(a.width == b.width);
  REQUIRE(a.height == b.height);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    worst = std::max(worst, static_cast<double>((a.pixels[i] - b.pixels[i]).cwiseAbs().maxCoeff()));
  }
  return worst;
}

int lit_pixels(const ImageBuffer& image) {
  int n = 0;
  for (const auto& p : image.pixels) {
    if (p.w() > 0.0f) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("projection reproduces the pinhole image of the mean") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 1e-4, 2e-4, 4e-4;
  const Gaussian3D g =
      testutil::make_gaussian(Eigen::Vector3d(0.1, -0.05, 2.0), cov, Eigen::Vector3d(1, 0, 0));

  const auto proj = project_gaussian(g, camera);
  REQUIRE(proj.has_value());
  CHECK(proj->center.x() == doctest::Approx(100.0 * 0.1 / 2.0 + 16.0));
  CHECK(proj->center.y() == doctest::Approx(100.0 * -0.05 / 2.0 + 12.0));
  CHECK(proj->depth == 2.0);
  CHECK(proj->color == g.color);
  CHECK(proj->opacity == g.opacity);
}

TEST_CASE("projected covariance follows the affine pushforward under any pose") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> off(-0.15, 0.15);
  std::uniform_real_distribution<double> depth(0.5, 3.0);

  RenderCamera camera;
  camera.intrinsics = CameraIntrinsics{60.0, 60.0, 32.0, 24.0, 64, 48};
  for (int trial = 0; trial < 25; ++trial) {
    camera.pose = random_pose(rng);
    Gaussian3D g;
    g.mean = camera.pose.to_world(Eigen::Vector3d(off(rng), off(rng), depth(rng)));
    g.covariance = testutil::random_spd(rng, 1e-6, 4e-4);

    const auto proj = project_gaussian(g, camera);
    REQUIRE(proj.has_value());

    const Eigen::Vector3d p = camera.pose.to_camera(g.mean);
    const double z = p.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << 60.0 / z, 0.0, -60.0 * p.x() / (z * z), 0.0, 60.0 / z, -60.0 * p.y() / (z * z);
    const Eigen::Matrix<double, 2, 3> a = jac * camera.pose.rotation.transpose();
    Eigen::Matrix2d expected = a * g.covariance * a.transpose();
    expected = 0.5 * (expected + expected.transpose());

    CHECK(proj->depth == doctest::Approx(z).epsilon(1e-12));
    CHECK(proj->center.x() == doctest::Approx(60.0 * p.x() / z + 32.0).epsilon(1e-12));
    CHECK(proj->center.y() == doctest::Approx(60.0 * p.y() / z + 24.0).epsilon(1e-12));
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        CHECK(proj->cov2d(r, c) == doctest::Approx(expected(r, c)).epsilon(1e-9));
      }
    }
    CHECK(proj->cov2d(0, 1) == proj->cov2d(1, 0));
  }
}

TEST_CASE("projection culls what the camera cannot see") {
  RenderCamera camera = axis_camera();
  const Eigen::Matrix3d cov = Eigen::Matrix3d::Identity() * 1e-6;

  CHECK_FALSE(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, -1), cov), camera)
                  .has_value());
  CHECK_FALSE(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, 0.05), cov), camera)
                  .has_value());  // exactly at the near plane
  CHECK_FALSE(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, 25.0), cov), camera)
                  .has_value());
  CHECK_FALSE(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, 20.0), cov), camera)
                  .has_value());  // exactly at the far plane
  // Far off the left edge: the 3-sigma extent never reaches the image.
  CHECK_FALSE(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(-0.5, 0, 1.0), cov), camera)
                  .has_value());
  // Just inside stays visible.
  CHECK(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, 1.0), cov), camera)
            .has_value());

  RenderCamera bad = camera;
  bad.intrinsics.width = 0;
  CHECK_THROWS_AS(project_gaussian(testutil::make_gaussian(Eigen::Vector3d(0, 0, 1), cov), bad),
                  std::invalid_argument);
}

TEST_CASE("a lone splat composites its exact opacity at its center") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 4e-4, 4e-4, 1e-9;  // projects from z=2 to the identity in pixel^2
  const Gaussian3D g = testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 2.0), cov,
                                               Eigen::Vector3d(0.25, 0.5, 0.75), 0.6);

  const ImageBuffer image = render({g}, camera);
  const Eigen::Vector4f center = image.at(16, 12);
  CHECK(center.x() == doctest::Approx(0.6 * 0.25));
  CHECK(center.y() == doctest::Approx(0.6 * 0.5));
  CHECK(center.z() == doctest::Approx(0.6 * 0.75));
  CHECK(center.w() == doctest::Approx(0.6));

  // Three pixels out lies exactly on the 3-sigma boundary, which still counts.
  const double boundary = 0.6 * std::exp(-4.5);
  CHECK(image.at(19, 12).w() == doctest::Approx(boundary));
  // Four pixels out is past the cutoff: untouched background.
  CHECK(image.at(20, 12).w() == 0.0f);
  CHECK(image.at(20, 12).x() == 0.0f);
}

TEST_CASE("two stacked splats follow the front-to-back recurrence") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 1e-4, 1e-4, 1e-9;
  const Gaussian3D front = testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 1.0), cov,
                                                   Eigen::Vector3d(1, 0, 0), 0.7);
  const Gaussian3D back = testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 2.0), cov,
                                                  Eigen::Vector3d(0, 0, 1), 0.5);

  for (const GaussianSet& order : {GaussianSet{front, back}, GaussianSet{back, front}}) {
    const ImageBuffer image = render(order, camera);
    const Eigen::Vector4f center = image.at(16, 12);
    CHECK(center.x() == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(center.y() == doctest::Approx(0.0));
    CHECK(center.z() == doctest::Approx(0.3 * 0.5).epsilon(1e-6));
    CHECK(center.w() == doctest::Approx(1.0 - 0.3 * 0.5).epsilon(1e-6));
  }
}

TEST_CASE("compositing stops once transmittance is spent") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 1e-4, 1e-4, 1e-9;
  const Gaussian3D wall = testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 1.0), cov,
                                                  Eigen::Vector3d(1, 0, 0), 0.99995);
  const Gaussian3D hidden = testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 2.0), cov,
                                                    Eigen::Vector3d(0, 0, 1), 0.9);

  const ImageBuffer image = render({hidden, wall}, camera);
  const Eigen::Vector4f center = image.at(16, 12);
  CHECK(center.x() == doctest::Approx(0.99995));
  CHECK(center.z() == 0.0f);  // the hidden splat never reached the pixel
}

TEST_CASE("splats with degenerate projected covariance vanish") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 1e-4, 0.0, 1e-6;  // flat in y: projected determinant is zero
  const ImageBuffer image =
      render({testutil::make_gaussian(Eigen::Vector3d(0.0, 0.0, 2.0), cov)}, camera);
  CHECK(lit_pixels(image) == 0);
}

TEST_CASE("tiled rendering agrees with the per-pixel reference") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u, 6u}) {
    const GaussianSet set = testutil::random_gaussians(40 + 30 * static_cast<int>(seed % 3),
                                                       seed, 0.25);
    const RenderCamera camera = east_camera(seed % 2 == 0 ? 32 : 33, seed % 2 == 0 ? 24 : 17);
    const Eigen::Vector3d background =
        seed % 3 == 0 ? Eigen::Vector3d(0.1, 0.2, 0.3) : Eigen::Vector3d::Zero();

    const ImageBuffer ours = render(set, camera, background);
    const ImageBuffer reference = oracle::render_reference(set, camera, background);
    CHECK(lit_pixels(ours) > 0);
    CHECK(max_pixel_difference(ours, reference) < 1e-6);
  }
}

TEST_CASE("rendering is invariant to input order, bit for bit") {
  const GaussianSet set = testutil::random_gaussians(120, 77, 0.25);
  const RenderCamera camera = east_camera(48, 36);
  const ImageBuffer base = render(set, camera);
  REQUIRE(lit_pixels(base) > 0);

  std::mt19937_64 rng(5);
  GaussianSet shuffled = set;
  for (int round = 0; round < 3; ++round) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const ImageBuffer image = render(shuffled, camera);
    REQUIRE(image.pixels.size() == base.pixels.size());
    CHECK(std::memcmp(image.pixels.data(), base.pixels.data(),
                      base.pixels.size() * sizeof(Eigen::Vector4f)) == 0);
  }
}

TEST_CASE("visibility counts unoccluded in-frustum means") {
  RenderCamera camera = axis_camera();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.diagonal() << 1e-4, 1e-4, 1e-9;
  const Gaussian3D near_splat = testutil::make_gaussian(Eigen::Vector3d(0, 0, 1.0), cov);
  const Gaussian3D far_splat = testutil::make_gaussian(Eigen::Vector3d(0, 0, 3.0), cov);

  CHECK(visibility_score({near_splat, far_splat}, camera, 0.1) == 1);
  CHECK(visibility_score({near_splat, far_splat}, camera, 2.5) == 2);
  CHECK(visibility_score({far_splat}, camera, 0.1) == 1);
  // Out of the frustum or off the image: never counted.
  CHECK(visibility_score({testutil::make_gaussian(Eigen::Vector3d(0, 0, 25.0), cov)}, camera,
                         0.1) == 0);
  CHECK(visibility_score({testutil::make_gaussian(Eigen::Vector3d(5.0, 0, 1.0), cov)}, camera,
                         0.1) == 0);
}

TEST_CASE("visibility agrees with the dense reference") {
  for (unsigned seed : {21u, 22u, 23u, 24u, 25u}) {
    const GaussianSet set = testutil::random_gaussians(60, seed, 0.3);
    const RenderCamera camera = east_camera(40, 30);
    for (double delta : {0.02, 0.1, 0.5}) {
      CHECK(visibility_score(set, camera, delta) ==
            oracle::visibility_reference(set, camera, delta));
    }
  }
}

TEST_CASE("level poses look along the requested heading") {
  for (double yaw : {0.0, 0.3, M_PI / 2.0, M_PI, -M_PI / 2.0}) {
    const Eigen::Vector3d position(1.5, -0.5, 0.88);
    const Pose pose = make_level_pose(position, yaw);
    CHECK(pose.orthonormal());
    CHECK(pose.translation == position);
    CHECK(pose.rotation.col(2).x() == doctest::Approx(std::cos(yaw)));
    CHECK(pose.rotation.col(2).y() == doctest::Approx(std::sin(yaw)));
    CHECK(pose.rotation.col(2).z() == 0.0);
    CHECK(pose.rotation.col(1).isApprox(Eigen::Vector3d(0, 0, -1), 1e-12));
    CHECK(pose.rotation.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("viewpoint selection stands on a free cell facing the mass") {
  IndexGrid grid;
  grid.cell_size = 0.05;
  grid.cells[CellCoord{0, 0}].state = CellState::Free;
  const GaussianSet target = {testutil::make_gaussian(Eigen::Vector3d(1.025, 0.025, 0.3))};
  const CameraIntrinsics intr{100.0, 100.0, 16.0, 12.0, 32, 24};
  const ViewpointConfig config;

  const RenderCamera camera = select_viewpoint(target, grid, intr, config);
  CHECK(camera.pose.translation.x() == doctest::Approx(0.025));
  CHECK(camera.pose.translation.y() == doctest::Approx(0.025));
  CHECK(camera.pose.translation.z() == config.agent_height);
  CHECK(camera.near == config.near);
  CHECK(camera.far == config.far);
  // Looking straight east, toward the support centroid.
  CHECK(camera.pose.rotation.col(2).isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  CHECK(camera.pose.orthonormal());
}

TEST_CASE("viewpoint selection respects the annulus and falls back gracefully") {
  const CameraIntrinsics intr{100.0, 100.0, 16.0, 12.0, 32, 24};
  const ViewpointConfig config;
  const GaussianSet target = {testutil::make_gaussian(Eigen::Vector3d(1.025, 1.025, 0.3))};

  IndexGrid grid;
  grid.cell_size = 0.05;
  grid.cells[CellCoord{20, 20}].state = CellState::Free;  // right under the target
  grid.cells[CellCoord{40, 20}].state = CellState::Free;  // a meter east: inside the annulus

  // The cell under the target is closer but too close; the annulus keeps
  // only the distant one.
  const RenderCamera in_ring = select_viewpoint(target, grid, intr, config);
  CHECK(in_ring.pose.translation.x() == doctest::Approx(2.025));
  CHECK(in_ring.pose.translation.y() == doctest::Approx(1.025));

  // With no cell in the annulus at all, every free cell is a candidate.
  IndexGrid only_near;
  only_near.cell_size = 0.05;
  only_near.cells[CellCoord{20, 20}].state = CellState::Free;
  const RenderCamera fallback = select_viewpoint(target, only_near, intr, config);
  CHECK(fallback.pose.translation.x() == doctest::Approx(1.025));

  IndexGrid no_free;
  no_free.cell_size = 0.05;
  no_free.cells[CellCoord{0, 0}].state = CellState::Occupied;
  CHECK_THROWS_AS(select_viewpoint(target, no_free, intr, config), DataError);
  CHECK_THROWS_AS(select_viewpoint({}, grid, intr, config), std::invalid_argument);
}

TEST_CASE("viewpoint ties settle on the lowest cell in row-major order") {
  const CameraIntrinsics intr{100.0, 100.0, 16.0, 12.0, 32, 24};
  const ViewpointConfig config;

  IndexGrid grid;
  grid.cell_size = 0.25;  // exact binary centers: 0.125 and 0.375
  grid.cells[CellCoord{0, 0}].state = CellState::Free;
  grid.cells[CellCoord{1, 0}].state = CellState::Free;
  // Target centered between the two cells, hovering far overhead so neither
  // viewpoint can see it: identical scores, identical distances.
  const GaussianSet target = {testutil::make_gaussian(Eigen::Vector3d(0.25, 0.125, 5.0))};

  const RenderCamera camera = select_viewpoint(target, grid, intr, config);
  CHECK(camera.pose.translation.x() == 0.125);
  CHECK(camera.pose.translation.y() == 0.125);
}

TEST_CASE("viewpoint search subsamples very large candidate sets") {
  const CameraIntrinsics intr{100.0, 100.0, 16.0, 12.0, 32, 24};
  const ViewpointConfig config;

  IndexGrid grid;
  grid.cell_size = 0.05;
  for (int x = 0; x < 200; ++x) grid.cells[CellCoord{x, 0}].state = CellState::Free;
  const GaussianSet target = {testutil::make_gaussian(Eigen::Vector3d(5.0, 0.025, 0.3))};

  const RenderCamera camera = select_viewpoint(target, grid, intr, config);
  CHECK(camera.pose.translation.z() == config.agent_height);
  CHECK(camera.pose.orthonormal());
}
