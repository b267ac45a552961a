#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "covplan/eval.hpp"
#include "covplan/gaussians.hpp"
#include "covplan/geometry.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/planner.hpp"
#include "covplan/scene.hpp"
#include "covplan/sensor.hpp"
#include "covplan/splat.hpp"

namespace covplan {

// Isotropic Gaussian translation offset (per-component std sigma_t) and a
// rotation about a uniformly random axis by a Gaussian angle (std sigma_r_deg).
inline Pose inject_pose_noise(const Pose& pose, double sigma_t, double sigma_r_deg, std::mt19937_64& rng) {
  if (!(sigma_t >= 0.0) || !(sigma_r_deg >= 0.0)) throw Error("pose noise sigma must be >= 0");
  if (sigma_t == 0.0 && sigma_r_deg == 0.0) return pose;
  std::normal_distribution<double> n01(0.0, 1.0);
  const Vec3 dt(n01(rng), n01(rng), n01(rng));
  Vec3 axis(n01(rng), n01(rng), n01(rng));
  const double angle = deg2rad(sigma_r_deg) * n01(rng);
  if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
  const Quat dq(Eigen::AngleAxisd(angle, axis.normalized()));
  return Pose(pose.position + sigma_t * dt, dq * pose.orientation);
}

enum class Policy { Magician, Greedy, RandomWalk };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::Magician: return "magician";
    case Policy::Greedy: return "greedy";
    case Policy::RandomWalk: return "random";
  }
  return "?";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "magician") return Policy::Magician;
  if (s == "greedy") return Policy::Greedy;
  if (s == "random") return Policy::RandomWalk;
  return std::nullopt;
}

enum class StartPolicy { Fixed, RandomFree };

enum class PredictorKind { Carving, SurfaceShell };

struct OccupancyConfig {
  double resolution = 0.0;  // 0: scene diagonal / 128
  double prior = 0.3;
  LogOddsParams log_odds;
  PredictorKind predictor = PredictorKind::SurfaceShell;
  double shell = 0.0;  // 0: eps_d
  double shell_back = 1.0;
  // Surface inheritance radius in units of eps_d at rebuilds and refreshes; 0 skips refreshes.
  double inherit_rebuild = 1.0;
  double inherit_refresh = 0.0;

  double resolution_for(const Aabb& b) const { return resolution > 0.0 ? resolution : b.diagonal() / 128.0; }
};

struct ProxyConfig {
  std::size_t n_proxy = 3000;
  double density = 1.0;  // multiplier on n_proxy
  double interior_fraction = 0.9;
  double margin = 0.0;  // 0: 4 voxels
  // Spacing of extra proxies placed on the observed surface; 0 disables them.
  double surface_spacing = 0.0;

  std::size_t count() const {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(static_cast<double>(n_proxy) * density)));
  }
};

struct MissionConfig {
  int total_steps = 100;
  int rebuild_every = 10;
  double noise_translation = 0.0;  // meters
  double noise_rotation = 0.0;     // degrees
  std::uint64_t seed = 0;
  StartPolicy start = StartPolicy::Fixed;
  Policy policy = Policy::Magician;

  void validate() const {
    if (total_steps < 1) throw Error("mission: total_steps must be >= 1");
    if (rebuild_every < 1) throw Error("mission: rebuild_every must be >= 1");
    if (!(noise_translation >= 0.0) || !(noise_rotation >= 0.0)) throw Error("mission: noise sigma must be >= 0");
  }
};

// Everything shared by the missions of one scene.
struct MissionSetup {
  const SceneModel* scene = nullptr;
  Pose start;
  CameraModel sensor;    // sensing and coverage camera
  RenderConfig render;   // planning renderer
  ActionSpace actions;
  PlannerConfig planner;
  OccupancyConfig occupancy;
  ProxyConfig proxies;
  const GroundTruthCloud* gt = nullptr;
  double eps_gt = 0.1;
};

struct StepRecord {
  int step = 0;  // 1-based
  int cycle = 0;
  Pose pose;
  int action = -1;
  double planned_gain = 0.0;
  double coverage = 0.0;
  bool bumped = false;
};

struct CycleTiming {
  int cycle = 0;
  double refresh_seconds = 0.0;
  double plan_seconds = 0.0;
  double execute_seconds = 0.0;
  bool rebuilt = false;
};

struct MissionLog {
  std::vector<StepRecord> steps;
  std::vector<CycleTiming> timings;
  bool trapped = false;
  double initial_coverage = 0.0;
  std::size_t novelty_violations = 0;
  std::size_t plan_calls = 0;
  std::size_t renders = 0;

  std::vector<double> curve() const {
    std::vector<double> c;
    c.reserve(steps.size());
    for (const auto& s : steps) c.push_back(s.coverage);
    return c;
  }
};

struct MissionHooks {
  std::function<void(int cycle, const PlanTraceRecord&)> trace;
  // Called after every executed step with the current Gaussian state.
  std::function<void(const StepRecord&, const GaussianProxySet&, const NoveltyOverlay&)> on_step;
  // Called once with the final occupancy field.
  std::function<void(const OccupancyField&)> on_finish;
};

// Observe, integrate, refresh/rebuild the Gaussians, plan, execute the first
// N_f moves with sensing after each, until total_steps moves were executed.
inline MissionLog run_mission(const MissionSetup& ms, const MissionConfig& mc, const MissionHooks& hooks = {}) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  if (!ms.scene || !ms.gt) throw Error("mission: scene and ground-truth cloud are required");
  mc.validate();
  ms.planner.validate();
  ms.actions.validate();
  ms.render.validate();
  const SceneModel& scene = *ms.scene;

  const PlannerConfig& pcfg = ms.planner;

  std::mt19937_64 rng(mc.seed);
  std::mt19937_64 noise_rng(mc.seed ^ 0xA5A5A5A5DEADBEEFull);
  std::mt19937_64 walk_rng(mc.seed ^ 0x5851F42D4C957F2Dull);

  Pose pose = ms.start;
  if (mc.start == StartPolicy::RandomFree) {
    const AccessibleGrid grid(scene, ms.start.position, std::max(0.25, 2.0 * pcfg.agent_radius), pcfg.agent_radius);
    const Pose p = grid.random_pose(rng, 0.0);
    pose = ms.actions.kind == ActionKind::Wheeled
               ? Pose::look({p.position.x(), p.position.y(), ms.actions.fixed_height}, p.yaw(), 0.0)
               : p;
  }
  if (!scene.bounds().contains(pose.position) || scene.closest_distance(pose.position) < pcfg.agent_radius)
    throw Error("mission: start pose is in collision");

  const Aabb& bounds = scene.bounds();
  OccupancyField field(bounds, ms.occupancy.resolution_for(bounds), ms.occupancy.prior, ms.occupancy.log_odds);
  SurfaceCloud cloud(0.5 * field.resolution());
  const double eps_d = pcfg.eps_d_for(field);
  const double margin = ms.proxies.margin > 0.0 ? ms.proxies.margin : 4.0 * field.resolution();
  CoverageTracker tracker(*ms.gt, scene, ms.sensor, ms.eps_gt);
  std::unique_ptr<OccupancyPredictor> predictor;
  if (ms.occupancy.predictor == PredictorKind::SurfaceShell)
    predictor = std::make_unique<SurfaceShellPredictor>(
        field, ms.occupancy.shell > 0.0 ? ms.occupancy.shell : eps_d, ms.occupancy.log_odds.p_max,
        ms.occupancy.shell_back);
  else
    predictor = std::make_unique<CarvingPredictor>(field);
  const PredictorQuery occupancy(*predictor, cloud, {});

  std::uint32_t obs_index = 0;
  auto sense = [&](const Pose& p) {
    DepthImage depth = render_depth_gt(scene, p, ms.sensor);
    const Pose mapped = inject_pose_noise(p, mc.noise_translation, mc.noise_rotation, noise_rng);
    integrate_observation(field, cloud, depth, mapped, ms.sensor, obs_index++);
    return depth;
  };

  MissionLog log;
  DepthImage last_depth = sense(pose);
  log.initial_coverage = tracker.add(pose);

  GaussianProxySet set;
  NoveltyOverlay overlay;
  std::uint64_t generation = 0;
  auto rebuild = [&](int cycle) {
    auto proxies = sample_proxy_points(field, ms.proxies.count(), ms.proxies.interior_fraction,
                                       mc.seed * 1000003ull + static_cast<std::uint64_t>(cycle), margin);
    if (ms.proxies.surface_spacing > 0.0)
      for (const Vec3& p : surface_proxy_points(cloud, ms.proxies.surface_spacing)) proxies.push_back(p);
    auto built = build_gaussians(occupancy, std::move(proxies), generation);
    generation = built.set.generation;
    set = std::move(built.set);
    overlay = std::move(built.overlay);
    if (ms.occupancy.inherit_rebuild > 0.0)
      inherit_observed_surface(set, overlay, cloud, ms.occupancy.inherit_rebuild * eps_d);
    mark_observed(set, overlay, pose, ms.sensor, last_depth, eps_d);
  };
  if (mc.policy != Policy::RandomWalk) rebuild(0);

  int step = 0;
  for (int cycle = 0; step < mc.total_steps; ++cycle) {
    CycleTiming timing;
    timing.cycle = cycle;
    auto t0 = clock::now();
    if (mc.policy != Policy::RandomWalk && cycle > 0) {
      if (cycle % mc.rebuild_every == 0) {
        rebuild(cycle);
        timing.rebuilt = true;
      } else {
        refresh_opacities(set, occupancy);
        if (ms.occupancy.inherit_refresh > 0.0)
          inherit_observed_surface(set, overlay, cloud, ms.occupancy.inherit_refresh * eps_d);
      }
    }
    auto t1 = clock::now();

    std::vector<Pose> moves;
    std::vector<int> actions;
    std::vector<double> gains;
    try {
      if (mc.policy == Policy::RandomWalk) {
        const Candidate c = random_walk_baseline(ms.actions, field, pose, pcfg, walk_rng);
        moves.push_back(c.pose);
        actions.push_back(c.action);
        gains.push_back(0.0);
      } else {
        std::function<void(const PlanTraceRecord&)> tr;
        if (hooks.trace) tr = [&](const PlanTraceRecord& r) { hooks.trace(cycle, r); };
        PlanResult pr = mc.policy == Policy::Greedy
                             ? greedy_baseline(set, overlay, field, pose, ms.actions, pcfg, ms.render)
                             : plan(set, overlay, field, pose, ms.actions, pcfg, ms.render, tr);
        log.novelty_violations += pr.novelty_violations;
        log.renders += pr.renders;
        ++log.plan_calls;
        const int execute = mc.policy == Policy::Greedy ? 1 : pcfg.execute;
        const std::size_t n = std::min<std::size_t>(pr.poses.size(), static_cast<std::size_t>(execute));
        moves.assign(pr.poses.begin(), pr.poses.begin() + static_cast<std::ptrdiff_t>(n));
        actions.assign(pr.actions.begin(), pr.actions.begin() + static_cast<std::ptrdiff_t>(n));
        gains.assign(pr.gains.begin(), pr.gains.begin() + static_cast<std::ptrdiff_t>(n));
      }
    } catch (const TrappedError&) {
      log.trapped = true;
      timing.refresh_seconds = secs(t0, t1);
      log.timings.push_back(timing);
      break;
    }
    auto t2 = clock::now();

    for (std::size_t i = 0; i < moves.size() && step < mc.total_steps; ++i) {
      StepRecord rec;
      rec.step = ++step;
      rec.cycle = cycle;
      rec.action = actions[i];
      rec.planned_gain = gains[i];
      Pose target = moves[i];
      // Moves through real geometry the map did not know about are stopped;
      // the contact is recorded in the map as an occupied voxel.
      if (is_translation(ms.actions.kind, actions[i]) &&
          scene.segment_blocked(pose.position, target.position, pcfg.agent_radius)) {
        rec.bumped = true;
        if (const auto v = field.voxel_containing(target.position))
          field.update(field.index(v->x(), v->y(), v->z()), field.params().hit);
        target = Pose(pose.position, target.orientation);
      }
      pose = target;
      last_depth = sense(pose);
      if (mc.policy != Policy::RandomWalk) mark_observed(set, overlay, pose, ms.sensor, last_depth, eps_d);
      rec.pose = pose;
      rec.coverage = tracker.add(pose);
      log.steps.push_back(rec);
      if (hooks.on_step) hooks.on_step(rec, set, overlay);
      if (rec.bumped) break;
    }
    auto t3 = clock::now();
    timing.refresh_seconds = secs(t0, t1);
    timing.plan_seconds = secs(t1, t2);
    timing.execute_seconds = secs(t2, t3);
    log.timings.push_back(timing);
  }
  if (hooks.on_finish) hooks.on_finish(field);
  return log;
}

}  // namespace covplan
