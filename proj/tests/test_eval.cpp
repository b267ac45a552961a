#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace covtest;

namespace {

CameraModel small_cam() {
  CameraModel cam = CameraModel{}.with_resolution(32, 18);
  cam.far = 10.0;
  return cam;
}

double variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

}  // namespace

TEST(Auc, HandCases) {
  const std::vector<double> constant(7, 0.5);
  EXPECT_DOUBLE_EQ(auc(constant), 0.5);
  std::vector<double> ramp(11);
  for (int i = 0; i <= 10; ++i) ramp[i] = i / 10.0;
  EXPECT_NEAR(auc(ramp), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.0, 1.0, 1.0}), 0.75);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.42}), 0.42);
  EXPECT_THROW(auc(std::vector<double>{}), Error);
}

TEST(Auc, ReportBoundsForNonDecreasingCurves) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> c{u(rng)};
    for (int i = 0; i < 30; ++i) c.push_back(std::min(1.0, c.back() + u(rng)));
    const CoverageReport r = make_report(c);
    EXPECT_EQ(r.final_coverage, c.back());
    EXPECT_GE(r.auc, c.front());
    EXPECT_LE(r.auc, r.final_coverage);
  }
}

TEST(GtCloud, BoxRoomPointsLieOnInteriorFaces) {
  const Vec3 lo(0, 0, 0), hi(4, 3, 2.5);
  const SceneModel room = box_room(lo, hi);
  GtCloudOptions opt;
  opt.n_views = 200;
  opt.merge_radius = 0.05;
  const GroundTruthCloud gt = build_gt_cloud(room, small_cam(), Vec3(2, 1.5, 1.2), opt);
  ASSERT_GT(gt.points.size(), 500u);
  EXPECT_EQ(gt.poses.size(), 200u);
  for (const Vec3& p : gt.points) {
    double face = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) face = std::min({face, std::abs(p[a] - lo[a]), std::abs(p[a] - hi[a])});
    ASSERT_LE(face, 1e-3);
    ASSERT_TRUE(Aabb(lo, hi).expanded(1e-3).contains(p));
  }
}

TEST(GtCloud, SingleViewIsDeduplicatedBackprojection) {
  const SceneModel room = box_room();
  GtCloudOptions opt;
  opt.n_views = 1;
  opt.seed = 3;
  opt.merge_radius = 0.1;
  const CameraModel cam = small_cam();
  const GroundTruthCloud gt = build_gt_cloud(room, cam, Vec3(2, 1.5, 1.2), opt);
  ASSERT_EQ(gt.poses.size(), 1u);
  std::vector<Vec3> kept;
  for (const Vec3& p : backproject(render_depth_gt(room, gt.poses[0], cam), gt.poses[0], cam)) {
    bool dup = false;
    for (const Vec3& q : kept) dup = dup || (p - q).norm() <= opt.merge_radius;
    if (!dup) kept.push_back(p);
  }
  ASSERT_EQ(gt.points.size(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_EQ(gt.points[i], kept[i]);
}

TEST(GtCloud, DeterministicForSeed) {
  const GeneratedScene g = generate_scene(SceneKind::RoomWithPillars, 0);
  GtCloudOptions opt;
  opt.n_views = 40;
  opt.seed = 11;
  const auto a = build_gt_cloud(g.scene, small_cam(), g.start.position, opt);
  const auto b = build_gt_cloud(g.scene, small_cam(), g.start.position, opt);
  EXPECT_EQ(a.points, b.points);
  EXPECT_THROW(build_gt_cloud(g.scene, small_cam(), g.start.position, GtCloudOptions{0}), Error);
}

TEST(Coverage, GenerationPosesCoverEverything) {
  const GeneratedScene g = generate_scene(SceneKind::RoomWithPillars, 0);
  const CameraModel cam = small_cam();
  GtCloudOptions opt;
  opt.n_views = 60;
  const auto gt = build_gt_cloud(g.scene, cam, g.start.position, opt);
  EXPECT_DOUBLE_EQ(coverage_fraction(gt, gt.poses, g.scene, cam, 2 * opt.merge_radius), 1.0);
  EXPECT_EQ(coverage_fraction(gt, std::span<const Pose>{}, g.scene, cam, 0.1), 0.0);
}

TEST(Coverage, SingleViewMatchesBruteForceVisibility) {
  const SceneModel room = box_room();
  const CameraModel cam = small_cam();
  GtCloudOptions opt;
  opt.n_views = 80;
  const auto gt = build_gt_cloud(room, cam, Vec3(2, 1.5, 1.2), opt);
  const Pose pose = Pose::look(Vec3(1.0, 1.5, 1.2), 0.0, 0.0);
  const double eps = 0.1;
  std::size_t visible = 0;
  for (const Vec3& x : gt.points) {
    const Vec3 c = pose.to_camera(x);
    if (c.z() <= 0.0) continue;
    const double px = cam.fx() * c.x() / c.z() + cam.cx(), py = cam.fy() * c.y() / c.z() + cam.cy();
    if (px < 0 || py < 0 || px >= cam.width || py >= cam.height) continue;
    const Vec3 rel = x - pose.position;
    const double d = rel.norm();
    if (d < cam.near || d > cam.far) continue;
    const auto t = brute_force_hit(room.triangles(), pose.position, rel / d, cam.near, cam.far);
    if (t && std::abs(*t - d) <= eps) ++visible;
  }
  const Pose one[] = {pose};
  EXPECT_GT(visible, 0u);
  EXPECT_DOUBLE_EQ(coverage_fraction(gt, one, room, cam, eps), static_cast<double>(visible) / gt.points.size());
}

TEST(Coverage, SupersetNeverCoversLess) {
  const GeneratedScene g = generate_scene(SceneKind::TwoRoomCorridor, 0);
  const CameraModel cam = small_cam();
  GtCloudOptions opt;
  opt.n_views = 60;
  const auto gt = build_gt_cloud(g.scene, cam, g.start.position, opt);
  const AccessibleGrid grid(g.scene, g.start.position, 0.25, 0.15);
  std::mt19937_64 rng(2);
  std::vector<Pose> poses;
  double prev = 0.0;
  for (int i = 0; i < 12; ++i) {
    poses.push_back(grid.random_pose(rng, 60.0));
    const double f = coverage_fraction(gt, poses, g.scene, cam, 0.1);
    EXPECT_GE(f, prev);
    prev = f;
  }
  CoverageTracker t(gt, g.scene, cam, 0.1);
  for (const Pose& p : poses) t.add(p);
  EXPECT_DOUBLE_EQ(t.fraction(), prev);
}

TEST(McOracle, ZeroNoveltyIsZero) {
  const OracleScene s = make_oracle_scene(2);
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const auto none = [](const Vec3&) { return 0.0; };
  for (const Pose& p : oracle_poses(s.bounds, 3, 4, 2.5, 5.0)) EXPECT_EQ(mc_gain_oracle(s.field, none, p, rc, 20000, 1), 0.0);
  EXPECT_THROW(mc_gain_oracle(s.field, none, Pose(), rc, 0, 1), Error);
}

TEST(McOracle, FullFrustumWallGivesPixelCount) {
  SolidField f;
  f.boxes.push_back(Aabb{{3.0, -100, -100}, {4.0, 100, 100}});
  RenderConfig rc;
  rc.cam = oracle_camera();
  rc.cam.far = 12.0;
  rc.r_target = std::pow(rc.cam.focal() / 2.0, 2);  // d_th = 2 m, the wall is at >= 3 m
  ASSERT_NEAR(rc.d_th(), 2.0, 1e-9);
  const auto all = [](const Vec3&) { return 1.0; };
  const double g = mc_gain_oracle(f, all, Pose::look(Vec3::Zero(), 0.0, 0.0), rc, 100000, 3);
  const double wh = rc.cam.width * rc.cam.height;
  EXPECT_NEAR(g, wh, 0.1 * wh);
}

TEST(McOracle, VarianceShrinksWithSamples) {
  const OracleScene s = make_oracle_scene(1);
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const GaussianNoveltyLookup lookup(s.set, s.overlay);
  const Pose pose = oracle_poses(s.bounds, 1, 6, 3.0, 4.0)[0];
  // 2x2 and 4x4 rays per pixel.
  std::vector<double> lo, hi;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    lo.push_back(mc_gain_oracle(s.field, lookup, pose, rc, 400000, seed));
    hi.push_back(mc_gain_oracle(s.field, lookup, pose, rc, 1600000, seed + 100));
  }
  ASSERT_GT(variance(lo), 0.0);
  EXPECT_LT(variance(hi), 0.5 * variance(lo));
}

TEST(Speed, RatioIsPositive) {
  const OracleScene s = make_oracle_scene(0);
  const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const auto poses = oracle_poses(s.bounds, 10, 9, 2.5, 5.0);
  const SpeedReport r = benchmark_gain_speed(s.set, s.overlay, s.field, poses, rc, 5000);
  EXPECT_GT(r.splat_seconds, 0.0);
  EXPECT_GT(r.oracle_seconds, 0.0);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_THROW(benchmark_gain_speed(s.set, s.overlay, s.field, std::span(poses).first(9), rc, 100), Error);
}

TEST(Spearman, HandCases) {
  const std::vector<double> a{1, 2, 3, 4, 5}, r{5, 4, 3, 2, 1}, sq{1, 4, 9, 16, 25};
  EXPECT_NEAR(spearman(a, sq), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, r), -1.0, 1e-12);
  // Ties take the average rank: (4.5) / sqrt(4.5 * 5).
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 3, 4}), 0.9486832980505138, 1e-12);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
}
