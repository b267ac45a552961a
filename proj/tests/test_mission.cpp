#include <gtest/gtest.h>

#include <map>
#include <random>

#include "support.hpp"

using namespace covtest;

namespace {

// A small mission world: a scene, its GT cloud and a cheap setup.
struct World {
  SceneModel scene;
  GroundTruthCloud gt;
  MissionSetup ms;

  World(SceneModel s, const Pose& start, ActionSpace actions) : scene(std::move(s)) {
    CameraModel sensor = CameraModel{}.with_resolution(48, 27);
    sensor.far = scene.bounds().diagonal();
    GtCloudOptions g;
    g.n_views = 40;
    g.merge_radius = scene.bounds().diagonal() / 100.0;
    gt = build_gt_cloud(scene, sensor, start.position, g);
    ms.scene = &scene;
    ms.gt = &gt;
    ms.start = start;
    ms.sensor = sensor;
    ms.render = RenderConfig::for_scene(sensor.with_resolution(32, 18), scene.bounds());
    ms.actions = actions;
    ms.planner.n_beams = 3;
    ms.planner.horizon = 3;
    ms.proxies.n_proxy = 600;
    ms.eps_gt = 2.0 * g.merge_radius;
  }
  World(const World&) = delete;
};

World pillars_world() {
  GeneratedScene g = generate_scene(SceneKind::RoomWithPillars, 0);
  const ActionSpace a = ActionSpace::drone_for(g.scene.bounds());
  return World(std::move(g.scene), g.start, a);
}

// Box room with a thin partition at x = 1 right behind the start.
World partition_world() {
  const Vec3 lo(0, 0, 0), hi(4, 3, 2.5);
  std::vector<Triangle> tris = box_room(lo, hi).triangles();
  const Vec3 a0(1, 0, 0), a1(1, 3, 0), a2(1, 3, 2.5), a3(1, 0, 2.5);
  tris.push_back({a0, a1, a2});
  tris.push_back({a0, a2, a3});
  ActionSpace a;
  a.translation_step = 0.14;
  return World(SceneModel(std::move(tris), Aabb{lo, hi}), Pose::look(Vec3(1.4, 1.5, 1.2), 0.0, 0.0), a);
}

MissionConfig steps(int n, Policy p, std::uint64_t seed = 0) {
  MissionConfig mc;
  mc.total_steps = n;
  mc.policy = p;
  mc.seed = seed;
  mc.rebuild_every = 4;
  return mc;
}

}  // namespace

TEST(PoseNoise, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(1);
  const Pose p = Pose::look(Vec3(1, 2, 3), 0.4, -0.2);
  const Pose q = inject_pose_noise(p, 0.0, 0.0, rng);
  EXPECT_EQ(q.position, p.position);
  EXPECT_EQ(q.orientation.coeffs(), p.orientation.coeffs());
  EXPECT_THROW(inject_pose_noise(p, -0.1, 0.0, rng), Error);
  EXPECT_THROW(inject_pose_noise(p, 0.0, -1.0, rng), Error);
}

TEST(PoseNoise, MatchesRequestedSigmas) {
  std::mt19937_64 rng(7);
  const Pose p = Pose::look(Vec3(1, 2, 3), 0.4, -0.2);
  const double st = 0.1, sr = 3.0;
  const int n = 20000;
  Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
  double ang_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Pose q = inject_pose_noise(p, st, sr, rng);
    ASSERT_NEAR(q.orientation.norm(), 1.0, 1e-12);
    const Vec3 d = q.position - p.position;
    sum += d;
    sq += d.cwiseProduct(d);
    const double a = Eigen::AngleAxisd(q.orientation * p.orientation.conjugate()).angle();
    ang_sq += a * a;
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(sum[k] / n, 0.0, 0.005);
    EXPECT_NEAR(std::sqrt(sq[k] / n), st, 0.03 * st);
  }
  EXPECT_NEAR(std::sqrt(ang_sq / n), deg2rad(sr), 0.03 * deg2rad(sr));
}

TEST(MissionConfig, ValidateRejectsBadValues) {
  MissionConfig mc;
  mc.total_steps = 0;
  EXPECT_THROW(mc.validate(), Error);
  mc = MissionConfig{};
  mc.rebuild_every = 0;
  EXPECT_THROW(mc.validate(), Error);
  mc = MissionConfig{};
  mc.noise_rotation = -1.0;
  EXPECT_THROW(mc.validate(), Error);
  EXPECT_EQ(parse_policy("random"), Policy::RandomWalk);
  EXPECT_FALSE(parse_policy("macarons"));
}

TEST(Mission, SingleStep) {
  const World w = pillars_world();
  const MissionLog log = run_mission(w.ms, steps(1, Policy::Magician));
  ASSERT_EQ(log.steps.size(), 1u);
  EXPECT_EQ(log.steps[0].step, 1);
  EXPECT_EQ(log.plan_calls, 1u);
  EXPECT_GE(log.steps[0].coverage, log.initial_coverage);
}

TEST(Mission, DeterministicAndCurveNonDecreasing) {
  const World w = pillars_world();
  const MissionLog a = run_mission(w.ms, steps(15, Policy::Magician, 3));
  const MissionLog b = run_mission(w.ms, steps(15, Policy::Magician, 3));
  ASSERT_EQ(a.steps.size(), 15u);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  double prev = a.initial_coverage;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].pose.position, b.steps[i].pose.position);
    EXPECT_EQ(a.steps[i].action, b.steps[i].action);
    EXPECT_EQ(a.steps[i].coverage, b.steps[i].coverage);
    EXPECT_GE(a.steps[i].coverage, prev);
    prev = a.steps[i].coverage;
  }
  EXPECT_EQ(a.novelty_violations, 0u);
  EXPECT_GT(a.curve().back(), a.initial_coverage);
}

TEST(Mission, ExecutesWholeHorizonPerCycle) {
  World w = pillars_world();
  w.ms.planner.execute = 3;
  const MissionLog log = run_mission(w.ms, steps(12, Policy::Magician));
  std::map<int, int> per_cycle;
  bool bumped = false;
  for (const auto& s : log.steps) {
    ++per_cycle[s.cycle];
    bumped = bumped || s.bumped;
  }
  EXPECT_EQ(log.plan_calls, per_cycle.size());
  if (!bumped) {
    EXPECT_EQ(per_cycle.size(), 4u);
    for (const auto& [c, n] : per_cycle) EXPECT_EQ(n, 3);
  }
}

TEST(Mission, GreedyAndRandomExecuteOneStepPerCycle) {
  const World w = pillars_world();
  for (Policy p : {Policy::Greedy, Policy::RandomWalk}) {
    const MissionLog log = run_mission(w.ms, steps(6, p, 1));
    ASSERT_EQ(log.steps.size(), 6u);
    for (std::size_t i = 0; i < log.steps.size(); ++i) EXPECT_EQ(log.steps[i].cycle, static_cast<int>(i));
  }
  EXPECT_EQ(run_mission(w.ms, steps(6, Policy::RandomWalk, 1)).plan_calls, 0u);
}

TEST(Mission, StartInCollisionThrows) {
  World w = pillars_world();
  w.ms.start = Pose::look(w.scene.bounds().max + Vec3::Ones(), 0.0, 0.0);
  EXPECT_THROW(run_mission(w.ms, steps(2, Policy::Magician)), Error);
  const Triangle& t = w.scene.triangles().front();
  w.ms.start = Pose::look((t.a + t.b + t.c) / 3.0, 0.0, 0.0);
  EXPECT_THROW(run_mission(w.ms, steps(2, Policy::Magician)), Error);
}

TEST(Mission, RandomFreeStartIsSeededAndFree) {
  const World w = pillars_world();
  MissionConfig mc = steps(1, Policy::RandomWalk, 4);
  mc.start = StartPolicy::RandomFree;
  const MissionLog a = run_mission(w.ms, mc), b = run_mission(w.ms, mc);
  EXPECT_EQ(a.steps[0].pose.position, b.steps[0].pose.position);
  mc.seed = 5;
  const MissionLog c = run_mission(w.ms, mc);
  EXPECT_NE(a.steps[0].pose.position, c.steps[0].pose.position);
}

TEST(Mission, BlockedMoveStaysInPlaceAndEndsBurst) {
  const World w = partition_world();
  int bumps = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const MissionLog log = run_mission(w.ms, steps(40, Policy::RandomWalk, seed));
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
      const auto& s = log.steps[i];
      EXPECT_GT(s.pose.position.x(), 1.0);
      if (!s.bumped) continue;
      ++bumps;
      EXPECT_TRUE(is_translation(w.ms.actions.kind, s.action));
      const Vec3 before = i == 0 ? w.ms.start.position : log.steps[i - 1].pose.position;
      EXPECT_EQ(s.pose.position, before);
      if (i + 1 < log.steps.size()) EXPECT_NE(log.steps[i + 1].cycle, s.cycle);
    }
  }
  EXPECT_GT(bumps, 0);
}

TEST(Mission, WheeledStaysLevelAtFixedHeight) {
  GeneratedScene g = generate_scene(SceneKind::RoomWithPillars, 0);
  const ActionSpace a = ActionSpace::wheeled(1.25);
  const Pose start = Pose::look({g.start.position.x(), g.start.position.y(), 1.25}, g.start.yaw(), 0.0);
  const World w(std::move(g.scene), start, a);
  const MissionLog log = run_mission(w.ms, steps(10, Policy::Magician));
  ASSERT_EQ(log.steps.size(), 10u);
  for (const auto& s : log.steps) {
    EXPECT_NEAR(s.pose.position.z(), 1.25, 1e-12);
    EXPECT_NEAR(s.pose.pitch(), 0.0, 1e-9);
  }
}

TEST(Mission, HooksSeeEveryStep) {
  const World w = pillars_world();
  int seen = 0, finished = 0;
  MissionHooks h;
  h.on_step = [&](const StepRecord& r, const GaussianProxySet& set, const NoveltyOverlay& ov) {
    ++seen;
    EXPECT_EQ(r.step, seen);
    EXPECT_EQ(ov.size(), set.size());
  };
  h.on_finish = [&](const OccupancyField&) { ++finished; };
  run_mission(w.ms, steps(5, Policy::Magician), h);
  EXPECT_EQ(seen, 5);
  EXPECT_EQ(finished, 1);
}
