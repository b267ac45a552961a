#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "covplan/gaussians.hpp"
#include "covplan/geometry.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/parallel.hpp"
#include "covplan/splat.hpp"

namespace covplan {

enum class ActionKind { Drone6Dof, Wheeled };

inline const char* to_string(ActionKind k) { return k == ActionKind::Drone6Dof ? "drone-6dof" : "wheeled"; }

// Discrete motion primitives. Drone actions, in index order:
// +x, -x, +y, -y, +z, -z (world-frame translations), yaw+, yaw-, pitch+, pitch-.
// Wheeled actions: forward, yaw+, yaw-.
struct ActionSpace {
  ActionKind kind = ActionKind::Drone6Dof;
  double translation_step = 0.2;  // meters
  double yaw_step = 15.0;         // degrees
  double pitch_step = 15.0;       // degrees, drone only
  double fixed_height = 1.25;     // meters, wheeled only
  double pitch_limit = 60.0;      // degrees, symmetric

  static ActionSpace drone_for(const Aabb& scene_bounds) {
    ActionSpace s;
    s.translation_step = scene_bounds.diagonal() / 40.0;
    return s;
  }

  static ActionSpace wheeled(double height = 1.25) {
    ActionSpace s;
    s.kind = ActionKind::Wheeled;
    s.translation_step = 0.065;
    s.yaw_step = 10.0;
    s.pitch_step = 0.0;
    s.fixed_height = height;
    return s;
  }

  int action_count() const { return kind == ActionKind::Drone6Dof ? 10 : 3; }

  void validate() const {
    if (!(translation_step > 0.0)) throw Error("action space: translation_step must be positive");
    if (!(yaw_step > 0.0 && yaw_step < 180.0)) throw Error("action space: yaw_step must lie in (0, 180)");
    if (kind == ActionKind::Drone6Dof && !(pitch_step > 0.0 && pitch_step < 90.0))
      throw Error("action space: pitch_step must lie in (0, 90)");
    if (!(pitch_limit >= 0.0 && pitch_limit < 90.0)) throw Error("action space: pitch_limit must lie in [0, 90)");
  }
};

inline const char* action_name(ActionKind k, int a) {
  static const char* drone[] = {"+x", "-x", "+y", "-y", "+z", "-z", "yaw+", "yaw-", "pitch+", "pitch-"};
  static const char* wheeled[] = {"forward", "yaw+", "yaw-"};
  return k == ActionKind::Drone6Dof ? drone[a] : wheeled[a];
}

inline bool is_translation(ActionKind k, int a) { return k == ActionKind::Drone6Dof ? a < 6 : a == 0; }

// Result of applying action `a`; nullopt when a pitch move would pass the limit.
inline std::optional<Pose> apply_action(const ActionSpace& s, const Pose& from, int a) {
  const auto yaw_by = [&](double deg) {
    return Pose(from.position, Quat(Eigen::AngleAxisd(deg2rad(deg), Vec3::UnitZ())) * from.orientation);
  };
  if (s.kind == ActionKind::Wheeled) {
    // Every wheeled result is level and at the fixed height.
    const double yaw = from.yaw();
    Vec3 p = from.position;
    p.z() = s.fixed_height;
    switch (a) {
      case 0: return Pose::look(p + s.translation_step * Vec3(std::cos(yaw), std::sin(yaw), 0.0), yaw, 0.0);
      case 1: return Pose::look(p, yaw + deg2rad(s.yaw_step), 0.0);
      case 2: return Pose::look(p, yaw - deg2rad(s.yaw_step), 0.0);
      default: throw Error("wheeled action index out of range");
    }
  }
  if (a >= 0 && a < 6) {
    Vec3 d = Vec3::Zero();
    d[a / 2] = (a % 2 == 0) ? s.translation_step : -s.translation_step;
    return Pose(from.position + d, from.orientation);
  }
  switch (a) {
    case 6: return yaw_by(s.yaw_step);
    case 7: return yaw_by(-s.yaw_step);
    case 8:
    case 9: {
      const double target = rad2deg(from.pitch()) + (a == 8 ? s.pitch_step : -s.pitch_step);
      if (std::abs(target) > s.pitch_limit + 1e-6) return std::nullopt;
      return Pose::look(from.position, from.yaw(), deg2rad(target));
    }
    default: throw Error("drone action index out of range");
  }
}

struct Candidate {
  int action;
  Pose pose;
};

// Every legal successor of `from`, in action-index order.
inline std::vector<Candidate> enumerate_actions(const ActionSpace& s, const Pose& from) {
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(s.action_count()));
  for (int a = 0; a < s.action_count(); ++a)
    if (auto p = apply_action(s, from, a)) out.push_back({a, *p});
  return out;
}

struct PlannerConfig {
  int n_beams = 10;
  int horizon = 10;
  int execute = 1;
  double collision_threshold = 0.5;
  double agent_radius = 0.15;
  double tie_epsilon = 1e-9;
  // Novelty-marking tolerance; 0 means twice the field resolution.
  double eps_d = 0.0;

  double eps_d_for(const OccupancyField& f) const { return eps_d > 0.0 ? eps_d : 2.0 * f.resolution(); }

  void validate() const {
    if (n_beams < 1) throw Error("planner: n_beams must be >= 1");
    if (horizon < 1) throw Error("planner: horizon must be >= 1");
    if (execute < 1 || execute > horizon) throw Error("planner: execute must lie in [1, horizon]");
    if (!(collision_threshold > 0.0 && collision_threshold <= 1.0))
      throw Error("planner: collision_threshold must lie in (0, 1]");
    if (!(agent_radius >= 0.0)) throw Error("planner: agent_radius must be >= 0");
    if (!(tie_epsilon >= 0.0)) throw Error("planner: tie_epsilon must be >= 0");
  }
};

class TrappedError : public Error {
 public:
  TrappedError() : Error("trapped: no collision-free action from the start pose") {}
};

// Collision rule for one move: rotations are always free; translations need a
// free swept segment in the field and an endpoint inside the workspace.
inline bool move_allowed(const OccupancyField& field, const ActionSpace& s, const Pose& from, const Candidate& c,
                         const PlannerConfig& cfg) {
  if (!is_translation(s.kind, c.action)) return true;
  const Aabb& b = field.bounds();
  const Vec3 pad = Vec3::Constant(cfg.agent_radius);
  if (!((c.pose.position.array() >= (b.min + pad).array()).all() &&
        (c.pose.position.array() <= (b.max - pad).array()).all()))
    return false;
  return is_path_free(field, from, c.pose, cfg.agent_radius, cfg.collision_threshold);
}

struct Beam {
  std::vector<Pose> poses;
  std::vector<int> actions;
  std::vector<double> gains;
  double score = 0.0;
  NoveltyOverlay overlay;
};

struct PlanTraceRecord {
  int iteration;
  int beam;    // rank among survivors, -1 when pruned
  int parent;  // rank of the parent beam in the previous iteration
  int action;
  double gain;
  double score;
};

struct PlanResult {
  std::vector<Pose> poses;
  std::vector<int> actions;
  std::vector<double> gains;
  double score = 0.0;
  // Iterations where some beam's novelty mass increased (must stay 0).
  std::size_t novelty_violations = 0;
  std::size_t renders = 0;
};

namespace detail {

// Indices of the top `k` scores. A later entry replaces the running best only
// when it wins by more than `eps`, so near-ties keep the earlier entry.
inline std::vector<std::size_t> select_top(const std::vector<double>& scores, std::size_t k, double eps) {
  std::vector<char> taken(scores.size(), 0);
  std::vector<std::size_t> out;
  k = std::min(k, scores.size());
  while (out.size() < k) {
    std::size_t best = scores.size();
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (taken[j]) continue;
      if (best == scores.size() || scores[j] > scores[best] + eps) best = j;
    }
    taken[best] = 1;
    out.push_back(best);
  }
  return out;
}

}  // namespace detail

// Beam search over N_d future moves maximizing the summed rendered gain.
// Each beam carries its own novelty overlay, consumed by mark_observed on the
// beam's own rendered depth after every move.
inline PlanResult plan(const GaussianProxySet& set, const NoveltyOverlay& canonical, const OccupancyField& field,
                       const Pose& start, const ActionSpace& space, const PlannerConfig& cfg, const RenderConfig& rcfg,
                       const std::function<void(const PlanTraceRecord&)>& trace = {}) {
  cfg.validate();
  if (canonical.generation() != set.generation || canonical.size() != set.size())
    throw Error("plan: canonical overlay generation does not match the Gaussian set");
  const double eps_d = cfg.eps_d_for(field);

  std::vector<Beam> beams(1);
  beams[0].overlay = fork_overlay(canonical);
  PlanResult result;

  struct Expansion {
    std::size_t parent;
    Candidate cand;
    double gain = 0.0;
    NoveltyRender render;
  };

  for (int it = 0; it < cfg.horizon; ++it) {
    std::vector<Expansion> exp;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const Pose& from = beams[b].poses.empty() ? start : beams[b].poses.back();
      for (auto& c : enumerate_actions(space, from))
        if (move_allowed(field, space, from, c, cfg)) exp.push_back({b, std::move(c), 0.0, {}});
    }
    if (exp.empty()) {
      if (it == 0) throw TrappedError();
      break;
    }

    global_pool().parallel_for(exp.size(), [&](std::size_t i) {
      auto pg = gain_for_pose(set, beams[exp[i].parent].overlay, exp[i].cand.pose, rcfg);
      exp[i].gain = pg.gain;
      exp[i].render = std::move(pg.render);
    });
    result.renders += exp.size();

    std::vector<double> scores(exp.size());
    for (std::size_t i = 0; i < exp.size(); ++i) scores[i] = beams[exp[i].parent].score + exp[i].gain;
    const auto keep = detail::select_top(scores, static_cast<std::size_t>(cfg.n_beams), cfg.tie_epsilon);

    std::vector<Beam> next(keep.size());
    std::vector<char> violated(keep.size(), 0);
    global_pool().parallel_for(keep.size(), [&](std::size_t k) {
      const Expansion& e = exp[keep[k]];
      const Beam& parent = beams[e.parent];
      Beam nb;
      nb.poses = parent.poses;
      nb.actions = parent.actions;
      nb.gains = parent.gains;
      nb.poses.push_back(e.cand.pose);
      nb.actions.push_back(e.cand.action);
      nb.gains.push_back(e.gain);
      nb.score = scores[keep[k]];
      nb.overlay = fork_overlay(parent.overlay);
      const double before = nb.overlay.mass(set.opacities);
      mark_observed(set, nb.overlay, e.cand.pose, rcfg.cam, e.render.depth_image(), eps_d);
      if (nb.overlay.mass(set.opacities) > before + 1e-9) violated[k] = 1;
      next[k] = std::move(nb);
    });
    for (char v : violated) result.novelty_violations += v ? 1 : 0;

    if (trace) {
      std::vector<int> rank(exp.size(), -1);
      for (std::size_t k = 0; k < keep.size(); ++k) rank[keep[k]] = static_cast<int>(k);
      for (std::size_t i = 0; i < exp.size(); ++i)
        trace({it, rank[i], static_cast<int>(exp[i].parent), exp[i].cand.action, exp[i].gain, scores[i]});
    }
    beams = std::move(next);
  }

  Beam& best = beams.front();
  result.poses = std::move(best.poses);
  result.actions = std::move(best.actions);
  result.gains = std::move(best.gains);
  result.score = best.score;
  return result;
}

// Single-step argmax of rendered gain over the collision-free actions. A later
// action displaces the running best only when it wins by more than tie_epsilon.
inline PlanResult greedy_baseline(const GaussianProxySet& set, const NoveltyOverlay& canonical,
                                  const OccupancyField& field, const Pose& start, const ActionSpace& space,
                                  const PlannerConfig& cfg, const RenderConfig& rcfg) {
  if (canonical.generation() != set.generation || canonical.size() != set.size())
    throw Error("greedy: canonical overlay generation does not match the Gaussian set");
  std::vector<Candidate> free;
  for (auto& c : enumerate_actions(space, start))
    if (move_allowed(field, space, start, c, cfg)) free.push_back(std::move(c));
  if (free.empty()) throw TrappedError();
  std::vector<double> gains(free.size());
  global_pool().parallel_for(free.size(),
                             [&](std::size_t i) { gains[i] = gain_for_pose(set, canonical, free[i].pose, rcfg).gain; });
  std::size_t best = 0;
  for (std::size_t i = 1; i < free.size(); ++i)
    if (gains[i] > gains[best] + cfg.tie_epsilon) best = i;
  PlanResult r;
  r.poses = {free[best].pose};
  r.actions = {free[best].action};
  r.gains = {gains[best]};
  r.score = gains[best];
  r.renders = free.size();
  return r;
}

// Uniform choice among collision-free actions.
inline Candidate random_walk_baseline(const ActionSpace& space, const OccupancyField& field, const Pose& from,
                                      const PlannerConfig& cfg, std::mt19937_64& rng) {
  std::vector<Candidate> free;
  for (auto& c : enumerate_actions(space, from))
    if (move_allowed(field, space, from, c, cfg)) free.push_back(std::move(c));
  if (free.empty()) throw TrappedError();
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  return free[pick(rng)];
}

}  // namespace covplan
