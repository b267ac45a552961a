// Runs one exploration mission in a procedural scene and prints the coverage
// curve every ten steps.
//
//   explore_room [scene] [seed] [policy]

#include <chrono>
#include <cstdio>
#include <string>

#include "covplan/covplan.hpp"

int main(int argc, char** argv) {
  using namespace covplan;
  const std::string scene_name = argc > 1 ? argv[1] : "room-with-pillars";
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 0;
  const auto policy = parse_policy(argc > 3 ? argv[3] : "magician");
  const auto kind = parse_scene_kind(scene_name);
  if (!kind || !policy) {
    std::fprintf(stderr, "usage: explore_room [scene] [seed] [magician|greedy|random]\n");
    return 1;
  }

  const GeneratedScene gs = generate_scene(*kind, 0);
  CameraModel sensor = CameraModel{}.with_resolution(128, 72);
  sensor.far = gs.scene.bounds().diagonal();

  auto t0 = std::chrono::steady_clock::now();
  GtCloudOptions gopt;
  gopt.merge_radius = gs.scene.bounds().diagonal() / 100.0;
  const GroundTruthCloud gt = build_gt_cloud(gs.scene, sensor, gs.start.position, gopt);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("gt cloud: %zu points in %.2fs\n", gt.points.size(), std::chrono::duration<double>(t1 - t0).count());

  MissionSetup ms;
  ms.scene = &gs.scene;
  ms.start = gs.start;
  ms.sensor = sensor;
  ms.render = RenderConfig::for_scene(sensor.with_resolution(64, 36), gs.scene.bounds());
  ms.actions = ActionSpace::drone_for(gs.scene.bounds());
  ms.gt = &gt;
  ms.eps_gt = 2.0 * gopt.merge_radius;

  MissionConfig mc;
  mc.seed = seed;
  mc.policy = *policy;
  const MissionLog log = run_mission(ms, mc);
  auto t2 = std::chrono::steady_clock::now();
  for (const auto& s : log.steps)
    if (s.step % 10 == 0) std::printf("step %3d  coverage %.3f\n", s.step, s.coverage);
  const auto rep = make_report(log.curve());
  std::printf("final %.3f  auc %.3f  renders %zu  time %.1fs%s\n", rep.final_coverage, rep.auc, log.renders,
              std::chrono::duration<double>(t2 - t1).count(), log.trapped ? "  (trapped)" : "");
  return 0;
}
