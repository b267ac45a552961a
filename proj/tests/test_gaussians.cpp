#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <thread>

#include "support.hpp"

using namespace covtest;

namespace {

struct ConstantField {
  double p;
  double query(const Vec3&) const { return p; }
};

GaussianProxySet manual_set(std::vector<Vec3> centers, std::vector<double> radii, std::vector<double> opacities) {
  GaussianProxySet s;
  s.centers = std::move(centers);
  s.radii = std::move(radii);
  s.opacities = std::move(opacities);
  s.generation = 1;
  return s;
}

// Odd resolution so the middle pixel's ray is the optical axis.
RenderConfig axis_config() {
  RenderConfig rc;
  rc.cam = CameraModel{}.with_resolution(65, 37);
  rc.cam.far = 20.0;
  return rc;
}

}  // namespace

TEST(BuildGaussians, PairGetsHalfDistance) {
  const auto b = build_gaussians(ConstantField{0.4}, {Vec3(0, 0, 0), Vec3(1, 0, 0)});
  EXPECT_DOUBLE_EQ(b.set.radii[0], 0.5);
  EXPECT_DOUBLE_EQ(b.set.radii[1], 0.5);
  EXPECT_DOUBLE_EQ(b.set.opacities[0], 0.4);
  EXPECT_EQ(b.set.generation, 1u);
  EXPECT_EQ(b.overlay.count(), 2u);
  EXPECT_EQ(b.overlay.generation(), 1u);
}

TEST(BuildGaussians, RegularGridGetsHalfSpacing) {
  std::vector<Vec3> pts;
  const double s = 0.3;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 4; ++k) pts.emplace_back(i * s, j * s, k * s);
  const auto b = build_gaussians(ConstantField{0.3}, pts, 4);
  EXPECT_EQ(b.set.generation, 5u);
  for (double r : b.set.radii) EXPECT_NEAR(r, s / 2, 1e-12);
}

TEST(BuildGaussians, RadiiMatchBruteForceNearestNeighbor) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec3> pts(1000);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.5 * u(rng));
  OccupancyField f(Aabb{{-2, -2, -1}, {2, 2, 1}}, 0.25, 0.3);
  for (std::size_t i = 0; i < f.voxel_count(); ++i) f.set_value(i, (i % 7) / 7.0);
  const auto b = build_gaussians(f, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) best = std::min(best, (pts[i] - pts[j]).norm());
    ASSERT_NEAR(b.set.radii[i], 0.5 * best, 1e-6);
    ASSERT_NEAR(b.set.opacities[i], f.query(pts[i]), 1e-6);
    ASSERT_GT(b.set.radii[i], 0.0);
  }
}

TEST(BuildGaussians, RejectsTooFewOrDuplicatePoints) {
  EXPECT_THROW(build_gaussians(ConstantField{0.3}, {Vec3::Zero()}), Error);
  EXPECT_THROW(build_gaussians(ConstantField{0.3}, {Vec3::Zero(), Vec3::Zero(), Vec3::Ones()}), Error);
}

TEST(MarkObserved, GaussianOnAxisAtThreeMeters) {
  const RenderConfig rc = axis_config();
  const auto set = manual_set({Vec3(0, 0, 3)}, {0.1}, {1.0});
  NoveltyOverlay ov(1, 1);
  const NoveltyRender r = render_novelty(set, ov, Pose(), rc);
  EXPECT_NEAR(r.depth[18 * 65 + 32], 3.0, 1e-12);
  EXPECT_EQ(mark_observed(set, ov, Pose(), rc.cam, r.depth_image(), 0.2), 1u);
  EXPECT_FALSE(ov.test(0));
}

TEST(MarkObserved, OccludedGaussianKeepsItsBit) {
  const RenderConfig rc = axis_config();
  const auto set = manual_set({Vec3(0, 0, 3), Vec3(0, 0, 1)}, {0.1, 0.1}, {1.0, 1.0});
  NoveltyOverlay ov(1, 2);
  const NoveltyRender r = render_novelty(set, ov, Pose(), rc);
  EXPECT_NEAR(r.depth[18 * 65 + 32], 1.0, 1e-9);
  EXPECT_EQ(mark_observed(set, ov, Pose(), rc.cam, r.depth_image(), 0.2), 1u);
  EXPECT_TRUE(ov.test(0));
  EXPECT_FALSE(ov.test(1));
}

TEST(MarkObserved, BehindCameraIsUntouched) {
  const RenderConfig rc = axis_config();
  const auto set = manual_set({Vec3(0, 0, -3), Vec3(0, 0, 3)}, {0.1, 0.1}, {1.0, 1.0});
  NoveltyOverlay ov(1, 2);
  DepthImage d(65, 37);
  for (double& v : d.values) v = 3.0;
  EXPECT_EQ(mark_observed(set, ov, Pose(), rc.cam, d, 0.2), 1u);
  EXPECT_TRUE(ov.test(0));
}

TEST(MarkObserved, IsIdempotentAndMassNonIncreasing) {
  const OracleScene s = make_oracle_scene(1);
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  NoveltyOverlay ov(s.set.generation, s.set.size());
  double mass = ov.mass(s.set.opacities);
  for (const Pose& p : oracle_poses(s.bounds, 6, 3, 2.5, 5.0)) {
    const DepthImage d = render_novelty(s.set, ov, p, rc).depth_image();
    mark_observed(s.set, ov, p, rc.cam, d, 0.15);
    const NoveltyOverlay once = ov;
    EXPECT_EQ(mark_observed(s.set, ov, p, rc.cam, d, 0.15), 0u);
    EXPECT_EQ(ov, once);
    const double m = ov.mass(s.set.opacities);
    EXPECT_LE(m, mass);
    mass = m;
  }
}

TEST(MarkObserved, StaleOverlayIsRejected) {
  const auto set = manual_set({Vec3(0, 0, 3), Vec3(0, 0, 1)}, {0.1, 0.1}, {1.0, 1.0});
  NoveltyOverlay ov(2, 2);
  const RenderConfig rc = axis_config();
  EXPECT_THROW(mark_observed(set, ov, Pose(), rc.cam, DepthImage(65, 37), 0.2), Error);
}

TEST(Refresh, OpacityFollowsCarvedField) {
  OccupancyField f(Aabb{{-1, -1, -1}, {5, 1, 1}}, 0.2, 0.3);
  auto b = build_gaussians(f, {Vec3(1.0, 0.05, 0.05), Vec3(1.5, 0.05, 0.05), Vec3(0.0, 0.9, 0.9)});
  EXPECT_DOUBLE_EQ(b.set.opacities[0], 0.3);
  const SceneModel wall = wall_x(4.0, 10.0);
  CameraModel cam;
  cam.far = 20.0;
  const Pose pose = Pose::look(Vec3(0.0, 0.05, 0.05), 0.0, 0.0);
  const DepthImage d = render_depth_gt(wall, pose, cam);
  SurfaceCloud cloud;
  integrate_observation(f, cloud, d, pose, cam);
  const NoveltyOverlay before = b.overlay;
  refresh_after_observation(b.set, b.overlay, f, pose, cam, d, 0.4);
  for (std::size_t i = 0; i < b.set.size(); ++i) EXPECT_NEAR(b.set.opacities[i], f.query(b.set.centers[i]), 1e-12);
  EXPECT_LT(b.set.opacities[0], 0.1);
  // None of these centers sit on the observed surface.
  EXPECT_EQ(b.overlay, before);
  EXPECT_DOUBLE_EQ(b.set.radii[0], 0.25);
}

TEST(Refresh, OutsideFrustumKeepsNovelty) {
  const OracleScene s = make_oracle_scene(0);
  GaussianProxySet set = s.set;
  NoveltyOverlay ov(set.generation, set.size());
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const Pose away = Pose::look(Vec3(5, 0, 0), 0.0, 0.0);
  const DepthImage d = render_novelty(set, ov, away, rc).depth_image();
  EXPECT_EQ(refresh_after_observation(set, ov, s.field, away, rc.cam, d, 0.2), 0u);
  EXPECT_EQ(ov.count(), set.size());
}

TEST(Refresh, DomeSweepConsumesNoveltyMass) {
  const OracleScene s = make_oracle_scene(0);
  GaussianProxySet set = s.set;
  NoveltyOverlay ov(set.generation, set.size());
  const double initial = ov.mass(set.opacities);
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const Vec3 c = s.bounds.center();
  for (double el : {-60.0, -30.0, 0.0, 30.0, 60.0, 89.0, -89.0})
    for (int k = 0; k < 12; ++k) {
      const double yaw = deg2rad(30.0 * k), e = deg2rad(el);
      const Vec3 p = c + 4.0 * Vec3(std::cos(e) * std::cos(yaw), std::cos(e) * std::sin(yaw), std::sin(e));
      const Pose pose = Pose::look(p, yaw + M_PI, -e);
      const DepthImage d = render_novelty(set, ov, pose, rc).depth_image();
      refresh_after_observation(set, ov, s.field, pose, rc.cam, d, 0.2);
    }
  EXPECT_LE(ov.mass(set.opacities), 0.05 * initial);
}

TEST(Overlay, ForkIsolation) {
  NoveltyOverlay ov(3, 100);
  NoveltyOverlay copy = fork_overlay(ov);
  copy.clear(5);
  EXPECT_TRUE(ov.test(5));
  EXPECT_FALSE(copy.test(5));
  const NoveltyOverlay zeros(3, 70, false);
  const NoveltyOverlay zc = fork_overlay(zeros);
  EXPECT_EQ(zc.count(), 0u);
  EXPECT_EQ(zc, zeros);
}

TEST(Overlay, ConcurrentForksLeaveOriginalUnchanged) {
  const NoveltyOverlay ov(1, 5000);
  std::vector<std::thread> workers;
  std::vector<std::size_t> counts(10);
  for (int w = 0; w < 10; ++w)
    workers.emplace_back([&, w] {
      NoveltyOverlay mine = fork_overlay(ov);
      for (std::size_t i = w; i < mine.size(); i += 3) mine.consume(i);
      counts[w] = mine.count();
    });
  for (auto& t : workers) t.join();
  EXPECT_EQ(ov.count(), 5000u);
  for (std::size_t c : counts) EXPECT_LT(c, 5000u);
}

TEST(Overlay, CountMassAndTrim) {
  NoveltyOverlay ov(1, 65);
  EXPECT_EQ(ov.count(), 65u);
  EXPECT_TRUE(ov.consume(64));
  EXPECT_FALSE(ov.consume(64));
  const std::vector<double> op(65, 0.5);
  EXPECT_DOUBLE_EQ(ov.mass(op), 32.0);
}

TEST(Rebuild, InheritsObservedSurface) {
  SurfaceCloud cloud(0.01);
  cloud.add({1, 0, 0}, 0);
  const auto b = build_gaussians(ConstantField{0.5}, {Vec3(1.05, 0, 0), Vec3(2, 0, 0)});
  NoveltyOverlay ov = b.overlay;
  EXPECT_EQ(inherit_observed_surface(b.set, ov, cloud, 0.1), 1u);
  EXPECT_FALSE(ov.test(0));
  EXPECT_TRUE(ov.test(1));
}

TEST(Dump, OneLinePerGaussian) {
  const auto b = build_gaussians(ConstantField{0.25}, {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0)});
  NoveltyOverlay ov = b.overlay;
  ov.clear(1);
  std::ostringstream out;
  write_gaussian_dump(out, b.set, &ov);
  const std::string s = out.str();
  EXPECT_NE(s.find("count=3"), std::string::npos);
  EXPECT_NE(s.find("1.000000 0.000000 0.000000 0.500000 0.250000 0\n"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
