#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace covtest;

TEST(LoadScene, UnitCubeHasTwelveTrianglesAndUnitBounds) {
  const auto path = std::filesystem::temp_directory_path() / "covplan_cube.obj";
  std::ofstream(path) << unit_cube_obj();
  const SceneModel s = load_scene(path.string());
  EXPECT_EQ(s.triangle_count(), 12u);
  EXPECT_TRUE(s.bounds().min.isApprox(Vec3::Zero()));
  EXPECT_TRUE(s.bounds().max.isApprox(Vec3::Ones()));
  std::filesystem::remove(path);
}

TEST(LoadScene, ZeroAreaFaceIsRejectedByIndex) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n");
  try {
    SceneModel s(parse_obj(in));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("face 1"), std::string::npos) << e.what();
  }
}

TEST(LoadScene, ParseErrorsCarryTheLineNumber) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  try {
    parse_obj(in, "mesh.obj");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("mesh.obj:4"), std::string::npos);
  }
}

TEST(LoadScene, EmptyMeshIsAnError) {
  std::istringstream in("# nothing\n");
  EXPECT_THROW(SceneModel(parse_obj(in)), Error);
}

TEST(LoadScene, GeneratedSceneRoundTripsThroughObj) {
  const SceneModel s = generate_scene(SceneKind::RoomWithPillars, 3).scene;
  std::stringstream buf;
  write_obj(buf, s);
  const SceneModel r(parse_obj(buf));
  ASSERT_EQ(r.triangle_count(), s.triangle_count());
  for (std::size_t i = 0; i < s.triangle_count(); ++i) {
    EXPECT_EQ(r.triangles()[i].a, s.triangles()[i].a);
    EXPECT_EQ(r.triangles()[i].c, s.triangles()[i].c);
  }
}

TEST(GenerateScene, DeterministicPerSeed) {
  for (auto kind : {SceneKind::RoomWithPillars, SceneKind::Courtyard, SceneKind::TwoRoomCorridor}) {
    const auto a = generate_scene(kind, 0).scene, b = generate_scene(kind, 0).scene;
    ASSERT_EQ(a.triangle_count(), b.triangle_count());
    for (std::size_t i = 0; i < a.triangle_count(); ++i) {
      EXPECT_EQ(a.triangles()[i].a, b.triangles()[i].a);
      EXPECT_EQ(a.triangles()[i].b, b.triangles()[i].b);
      EXPECT_EQ(a.triangles()[i].c, b.triangles()[i].c);
    }
  }
  EXPECT_NE(generate_scene(SceneKind::RoomWithPillars, 0).scene.triangles().back().a,
            generate_scene(SceneKind::RoomWithPillars, 1).scene.triangles().back().a);
}

TEST(GenerateScene, CourtyardFacesStayInsideDeclaredBounds) {
  const SceneModel s = generate_scene(SceneKind::Courtyard, 0).scene;
  for (const auto& t : s.triangles())
    for (const Vec3* v : {&t.a, &t.b, &t.c}) EXPECT_TRUE(s.bounds().contains(*v, -1e-9));
}

// Coarse free-space grid, flood-filled from the start: the far room is
// reachable, and becomes unreachable once the corridor cells are removed.
TEST(GenerateScene, TwoRoomCorridorRoomsJoinOnlyThroughTheCorridor) {
  const GeneratedScene g = generate_scene(SceneKind::TwoRoomCorridor, 1);
  ASSERT_EQ(g.rooms.size(), 2u);
  ASSERT_EQ(g.corridors.size(), 1u);
  const SceneModel& s = g.scene;
  const double cell = 0.2;
  const Aabb& b = s.bounds();
  const Eigen::Vector3i dims = (b.extent() / cell).array().floor().cast<int>();
  auto coords = [&](const Vec3& p) -> Eigen::Vector3i { return ((p - b.min) / cell).array().floor().cast<int>(); };
  auto idx = [&](const Eigen::Vector3i& c) { return (static_cast<std::size_t>(c.z()) * dims.y() + c.y()) * dims.x() + c.x(); };
  auto center = [&](const Eigen::Vector3i& c) -> Vec3 { return b.min + (c.cast<double>().array() + 0.5).matrix() * cell; };

  auto reachable = [&](bool drop_corridor) {
    std::vector<char> seen(static_cast<std::size_t>(dims.prod()), 0);
    auto open = [&](const Eigen::Vector3i& c) {
      const Vec3 x = center(c);
      if (drop_corridor && g.corridors[0].contains(x)) return false;
      return s.closest_distance(x) > 0.75 * cell;
    };
    const Eigen::Vector3i s0 = coords(g.start.position);
    std::deque<Eigen::Vector3i> q{s0};
    seen[idx(s0)] = 1;
    while (!q.empty()) {
      const Eigen::Vector3i c = q.front();
      q.pop_front();
      for (int a = 0; a < 3; ++a)
        for (int d : {-1, 1}) {
          Eigen::Vector3i nc = c;
          nc[a] += d;
          if (nc[a] < 0 || nc[a] >= dims[a] || seen[idx(nc)] || !open(nc)) continue;
          seen[idx(nc)] = 1;
          q.push_back(nc);
        }
    }
    return static_cast<bool>(seen[idx(coords(g.rooms[1].center()))]);
  };
  EXPECT_GT(s.closest_distance(g.rooms[1].center()), 0.3);
  EXPECT_TRUE(g.rooms[0].contains(g.start.position));
  EXPECT_TRUE(reachable(false));
  EXPECT_FALSE(reachable(true));
}

TEST(RenderDepth, PerpendicularWallAtTwoMeters) {
  const SceneModel s = wall_x(2.0, 50.0);
  CameraModel cam;
  cam.far = 20.0;
  const DepthImage d = render_depth_gt(s, Pose::look(Vec3::Zero(), 0.0, 0.0), cam);
  // 64 x 36: the four central pixels straddle the axis; check via geometry.
  const Vec3 ray = cam.pixel_ray(32, 18);
  EXPECT_NEAR(d.at(32, 18), 2.0 / ray.z(), 1e-9);
  CameraModel odd = cam.with_resolution(65, 37);
  const DepthImage c = render_depth_gt(s, Pose::look(Vec3::Zero(), 0.0, 0.0), odd);
  EXPECT_NEAR(c.at(32, 18), 2.0, 1e-4);
  EXPECT_EQ(c.valid_count(), odd.pixel_count());
}

TEST(RenderDepth, OpenSkyInCourtyardLeavesSentinels) {
  const GeneratedScene g = generate_scene(SceneKind::Courtyard, 0);
  CameraModel cam;
  cam.far = g.scene.bounds().diagonal();
  const DepthImage d = render_depth_gt(g.scene, Pose::look({4.0, 9.0, 1.5}, 0.3, deg2rad(60.0)), cam);
  EXPECT_LT(d.valid_count(), cam.pixel_count());
}

TEST(RenderDepth, MatchesBruteForceIntersectionExactly) {
  const GeneratedScene g = generate_scene(SceneKind::RoomWithPillars, 0);
  CameraModel cam;
  cam.far = g.scene.bounds().diagonal();
  for (const Pose& pose : {g.start, Pose::look({3.0, 1.0, 1.8}, 1.9, -0.3)}) {
    const DepthImage d = render_depth_gt(g.scene, pose, cam);
    const Mat3 r = pose.rotation();
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) {
        const auto bf = brute_force_hit(g.scene.triangles(), pose.position, r * cam.pixel_ray(u, v), cam.near, cam.far);
        ASSERT_EQ(bf.has_value(), d.valid(u, v));
        if (bf) ASSERT_EQ(*bf, d.at(u, v)) << u << "," << v;
      }
  }
}

TEST(RenderDepth, IndependentOfTriangleOrder) {
  const GeneratedScene g = generate_scene(SceneKind::TwoRoomCorridor, 0);
  auto tris = g.scene.triangles();
  std::mt19937_64 rng(5);
  std::shuffle(tris.begin(), tris.end(), rng);
  const SceneModel shuffled(tris, g.scene.bounds());
  CameraModel cam;
  cam.far = 20.0;
  const DepthImage a = render_depth_gt(g.scene, g.start, cam), b = render_depth_gt(shuffled, g.start, cam);
  EXPECT_EQ(a.values, b.values);
}

TEST(RenderDepth, BitIdenticalOnRepeat) {
  const GeneratedScene g = generate_scene(SceneKind::Courtyard, 2);
  CameraModel cam;
  cam.far = 20.0;
  EXPECT_EQ(render_depth_gt(g.scene, g.start, cam).values, render_depth_gt(g.scene, g.start, cam).values);
}

TEST(Backproject, CenterPixelLiesOnOpticalAxis) {
  CameraModel cam = CameraModel{}.with_resolution(5, 3);
  DepthImage d(5, 3);
  d.at(2, 1) = 3.5;
  const auto pts = backproject(d, Pose(), cam);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_TRUE(pts[0].isApprox(Vec3(0, 0, 3.5), 1e-12));
}

TEST(Backproject, AllSentinelGivesNoPoints) {
  EXPECT_TRUE(backproject(DepthImage(8, 4), Pose(), CameraModel{}.with_resolution(8, 4)).empty());
}

TEST(Backproject, PointsLieOnTheMesh) {
  for (auto kind : {SceneKind::RoomWithPillars, SceneKind::Courtyard, SceneKind::TwoRoomCorridor}) {
    const GeneratedScene g = generate_scene(kind, 0);
    CameraModel cam;
    cam.far = g.scene.bounds().diagonal();
    std::mt19937_64 rng(11);
    const AccessibleGrid grid(g.scene, g.start.position, 0.3, 0.15);
    for (int i = 0; i < 3; ++i) {
      const Pose p = grid.random_pose(rng, 60.0);
      for (const Vec3& x : backproject(render_depth_gt(g.scene, p, cam), p, cam))
        ASSERT_LE(brute_force_distance(g.scene.triangles(), x), 1e-3);
    }
  }
}

TEST(Bvh, ClosestDistanceMatchesBruteForce) {
  const SceneModel s = generate_scene(SceneKind::RoomWithPillars, 1).scene;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-1, 7), uy(-1, 6), uz(-1, 3.5);
  for (int i = 0; i < 300; ++i) {
    const Vec3 p(ux(rng), uy(rng), uz(rng));
    EXPECT_NEAR(s.closest_distance(p), brute_force_distance(s.triangles(), p), 1e-12);
  }
}

TEST(Pose, LookBuildsOrthonormalLevelFrames) {
  const Pose p = Pose::look({1, 2, 3}, 0.7, -0.4);
  EXPECT_NEAR(p.yaw(), 0.7, 1e-12);
  EXPECT_NEAR(p.pitch(), -0.4, 1e-12);
  EXPECT_NEAR((p.orientation * Vec3::UnitX()).z(), 0.0, 1e-12);  // no roll
  EXPECT_TRUE((p.inverse() * p).position.isZero(1e-12));
}
