#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "covplan/eval.hpp"
#include "covplan/gaussians.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/planner.hpp"
#include "covplan/splat.hpp"

namespace covplan {

// Camera used with the synthetic Gaussian scenes.
inline CameraModel oracle_camera() {
  CameraModel cam;
  cam.width = 64;
  cam.height = 36;
  cam.near = 0.1;
  cam.far = 12.0;
  return cam;
}

struct OracleAgreement {
  std::vector<double> splat;
  std::vector<double> oracle;
  // sum |splat - oracle| / sum oracle, i.e. the oracle-weighted mean of the
  // per-pose relative errors.
  double weighted_relative = 0.0;
  double max_relative = 0.0;  // over poses with a positive oracle gain
  double spearman = 0.0;
};

inline OracleAgreement oracle_agreement(int scene, std::size_t n_poses, std::size_t n_samples, std::uint64_t seed) {
  const OracleScene s = make_oracle_scene(scene);
  const RenderConfig rcfg = RenderConfig::for_scene(oracle_camera(), s.bounds);
  const auto poses = oracle_poses(s.bounds, n_poses, seed, 2.5, 6.0);
  const GaussianNoveltyLookup lookup(s.set, s.overlay);
  OracleAgreement r;
  double abs_sum = 0.0, oracle_sum = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double g = gain_for_pose(s.set, s.overlay, poses[i], rcfg).gain;
    const double o = mc_gain_oracle(s.field, lookup, poses[i], rcfg, n_samples, seed * 7919 + i);
    r.splat.push_back(g);
    r.oracle.push_back(o);
    abs_sum += std::abs(g - o);
    oracle_sum += o;
    if (o > 0.0) r.max_relative = std::max(r.max_relative, std::abs(g - o) / o);
  }
  r.weighted_relative = oracle_sum > 0.0 ? abs_sum / oracle_sum : std::numeric_limits<double>::infinity();
  r.spearman = poses.size() >= 2 ? spearman(r.splat, r.oracle) : 0.0;
  return r;
}

// A small planning problem over a synthetic Gaussian scene: free space
// everywhere, a 3-action wheeled agent circling the objects.
struct ToyInstance {
  OracleScene scene;
  OccupancyField field;
  ActionSpace space;
  Pose start;
  RenderConfig rcfg;
  PlannerConfig cfg;
};

inline ToyInstance make_toy_instance(std::uint64_t seed) {
  ToyInstance t;
  t.scene = make_oracle_scene(static_cast<int>(seed % 3));
  Aabb b = t.scene.bounds;
  b.min -= Vec3::Constant(6.0);
  b.max += Vec3::Constant(6.0);
  t.field = OccupancyField(b, 0.5, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Vec3 c = t.scene.bounds.center();
  const double ang = 2.0 * M_PI * uni(rng);
  const double r = 3.0 + 1.5 * uni(rng);
  const Vec3 p = c + Vec3(r * std::cos(ang), r * std::sin(ang), 0.3 * (uni(rng) - 0.5));
  const Vec3 to = c - p;
  t.start = Pose::look(p, std::atan2(to.y(), to.x()) + deg2rad(60.0 * (uni(rng) - 0.5)), 0.0);
  t.space = ActionSpace::wheeled(p.z());
  t.space.translation_step = 0.6;
  t.space.yaw_step = 25.0;
  CameraModel cam = oracle_camera().with_resolution(48, 27);
  t.rcfg = RenderConfig::for_scene(cam, t.scene.bounds);
  t.cfg.agent_radius = 0.1;
  t.cfg.eps_d = 0.1;
  return t;
}

struct ExhaustiveResult {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<int> actions;
};

// Scores every action sequence of length `depth`; each step renders with the
// sequence's own overlay, then consumes novelty from that render's depth.
inline ExhaustiveResult exhaustive_plan(const ToyInstance& t, int depth) {
  ExhaustiveResult best;
  std::vector<int> seq;
  std::function<void(const Pose&, const NoveltyOverlay&, double)> rec = [&](const Pose& from,
                                                                             const NoveltyOverlay& ov, double score) {
    if (static_cast<int>(seq.size()) == depth) {
      if (score > best.score) {
        best.score = score;
        best.actions = seq;
      }
      return;
    }
    for (const auto& c : enumerate_actions(t.space, from)) {
      if (!move_allowed(t.field, t.space, from, c, t.cfg)) continue;
      const PoseGain pg = gain_for_pose(t.scene.set, ov, c.pose, t.rcfg);
      NoveltyOverlay next = fork_overlay(ov);
      mark_observed(t.scene.set, next, c.pose, t.rcfg.cam, pg.render.depth_image(), t.cfg.eps_d_for(t.field));
      seq.push_back(c.action);
      rec(c.pose, next, score + pg.gain);
      seq.pop_back();
    }
  };
  rec(t.start, t.scene.overlay, 0.0);
  return best;
}

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace detail

inline PropertyResult check_depth_weight() {
  const CameraModel cam = oracle_camera();
  RenderConfig rc;
  rc.cam = cam;
  rc.r_target = 2.5;
  const double d = rc.d_th();
  const double w_half = depth_weight(0.5 * d, d), w_one = depth_weight(d, d), w_two = depth_weight(2.0 * d, d);
  const bool ok = std::abs(w_half - 0.25) <= 1e-12 && std::abs(w_one - 1.0) <= 1e-12 &&
                  std::abs(w_two - 1.0) <= 1e-12 && std::abs(d - cam.focal() / std::sqrt(2.5)) <= 1e-6;
  return {"depth_weight_exactness", ok, detail::fmt("w(d/2)=%.6g w(d)=%.6g w(2d)=%.6g", w_half, w_one, w_two)};
}

inline PropertyResult check_splat_invariants() {
  std::size_t bad = 0, total = 0;
  for (int s = 0; s < 3; ++s) {
    const OracleScene sc = make_oracle_scene(s);
    const RenderConfig rc = RenderConfig::for_scene(oracle_camera(), sc.bounds);
    for (const Pose& p : oracle_poses(sc.bounds, 8, 17 + s, 2.0, 6.0)) {
      const PoseGain pg = gain_for_pose(sc.set, sc.overlay, p, rc);
      ++total;
      bool ok = pg.gain >= 0.0;
      for (std::size_t i = 0; i < pg.render.novelty.size(); ++i) {
        const double a = pg.render.acc_alpha[i];
        ok = ok && pg.render.novelty[i] >= 0.0 && pg.render.novelty[i] <= a + 1e-12 && a <= 1.0 + 1e-12 &&
             (a >= rc.valid_alpha) == pg.render.depth_valid(i);
      }
      bad += ok ? 0 : 1;
    }
  }
  return {"splat_render_invariants", bad == 0, detail::fmt("%g of %g renders violate", double(bad), double(total))};
}

inline PropertyResult check_oracle_agreement(std::size_t n_poses = 12, std::size_t n_samples = 200000) {
  double worst_rel = 0.0, worst_rho = 1.0;
  for (int s = 0; s < 3; ++s) {
    const OracleAgreement a = oracle_agreement(s, n_poses, n_samples, 1000 + s);
    worst_rel = std::max(worst_rel, a.weighted_relative);
    worst_rho = std::min(worst_rho, a.spearman);
  }
  return {"splat_oracle_agreement", worst_rel <= 0.15 && worst_rho >= 0.9,
          detail::fmt("worst relative error %.4f, worst spearman %.4f", worst_rel, worst_rho)};
}

inline PropertyResult check_beam_degeneracy(int instances = 6) {
  int mismatches = 0;
  for (int i = 0; i < instances; ++i) {
    const ToyInstance t = make_toy_instance(100 + i);
    PlannerConfig cfg = t.cfg;
    cfg.n_beams = 1;
    cfg.horizon = 1;
    cfg.execute = 1;
    const PlanResult a = plan(t.scene.set, t.scene.overlay, t.field, t.start, t.space, cfg, t.rcfg);
    const PlanResult b = greedy_baseline(t.scene.set, t.scene.overlay, t.field, t.start, t.space, cfg, t.rcfg);
    if (a.actions != b.actions || !a.poses.front().position.isApprox(b.poses.front().position, 0.0)) ++mismatches;
  }
  return {"beam_degeneracy", mismatches == 0, detail::fmt("%g of %g instances differ", mismatches, instances)};
}

inline PropertyResult check_exhaustive_optimality(int instances = 6) {
  int mismatches = 0;
  for (int i = 0; i < instances; ++i) {
    const ToyInstance t = make_toy_instance(200 + i);
    PlannerConfig cfg = t.cfg;
    cfg.n_beams = 27;
    cfg.horizon = 3;
    const PlanResult r = plan(t.scene.set, t.scene.overlay, t.field, t.start, t.space, cfg, t.rcfg);
    const ExhaustiveResult e = exhaustive_plan(t, 3);
    if (r.score != e.score) ++mismatches;
  }
  return {"exhaustive_optimality", mismatches == 0, detail::fmt("%g of %g instances differ", mismatches, instances)};
}

inline PropertyResult check_novelty_monotonicity(int instances = 4) {
  std::size_t violations = 0;
  for (int i = 0; i < instances; ++i) {
    const ToyInstance t = make_toy_instance(300 + i);
    PlannerConfig cfg = t.cfg;
    cfg.n_beams = 3;
    cfg.horizon = 5;
    violations += plan(t.scene.set, t.scene.overlay, t.field, t.start, t.space, cfg, t.rcfg).novelty_violations;
  }
  return {"novelty_monotonicity", violations == 0, detail::fmt("%g violations", double(violations))};
}

inline PropertyResult check_auc_cases() {
  const std::vector<double> constant(11, 0.5), steps{0.0, 1.0, 1.0};
  std::vector<double> ramp(11);
  for (int i = 0; i <= 10; ++i) ramp[i] = i / 10.0;
  const double a = auc(constant), b = auc(ramp), c = auc(steps);
  return {"auc_unit_cases", a == 0.5 && std::abs(b - 0.5) <= 1e-12 && c == 0.75,
          detail::fmt("constant %.6g ramp %.6g steps %.6g", a, b, c)};
}

// The fast property suite behind `covplan verify`.
inline std::vector<PropertyResult> verify_all() {
  std::vector<PropertyResult> out;
  std::vector<std::function<PropertyResult()>> checks{
      [] { return check_depth_weight(); },         [] { return check_auc_cases(); },
      [] { return check_splat_invariants(); },     [] { return check_oracle_agreement(); },
      [] { return check_beam_degeneracy(); },      [] { return check_exhaustive_optimality(); },
      [] { return check_novelty_monotonicity(); },
  };
  const char* names[] = {"depth_weight_exactness", "auc_unit_cases",       "splat_render_invariants",
                         "splat_oracle_agreement", "beam_degeneracy",      "exhaustive_optimality",
                         "novelty_monotonicity"};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      out.push_back(checks[i]());
    } catch (const std::exception& e) {
      out.push_back({names[i], false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

}  // namespace covplan
