#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covplan/eval.hpp"
#include "covplan/mission.hpp"
#include "covplan/planner.hpp"
#include "covplan/scene.hpp"
#include "covplan/splat.hpp"

namespace covplan {

// Configuration problems; `field` is the dotted key at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config: " + field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline constexpr int kSchemaVersion = 1;

// Fully resolved run configuration. Zero-valued "auto" fields are replaced
// with scene-derived defaults by resolve().
struct RunConfig {
  // scene
  std::optional<SceneKind> scene_kind = SceneKind::RoomWithPillars;
  std::string scene_file;
  std::uint64_t scene_seed = 0;
  std::optional<Vec3> start_position;
  double start_yaw_deg = 0.0;

  CameraModel camera = CameraModel{}.with_resolution(128, 72);
  bool far_auto = true;

  int render_width = 64;
  int render_height = 36;
  double alpha_cutoff = 1.0 / 255.0;
  double t_min = 1e-3;
  double valid_alpha = 0.5;
  double r_target = 0.0;  // 0: threshold depth at half the scene diagonal

  ActionSpace actions;
  bool translation_auto = true;

  PlannerConfig planner;
  OccupancyConfig occupancy;
  ProxyConfig proxies;

  MissionConfig mission;
  std::vector<std::uint64_t> seeds{0};

  std::size_t gt_views = 300;
  std::uint64_t gt_seed = 0;
  double gt_merge_radius = 0.0;  // 0: scene diagonal / 100
  double eps_gt = 0.0;           // 0: 2 x merge radius

  std::string output_dir = "covplan-out";
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!ok.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key \"" + k + "\"");
  }
}

template <typename T>
void read(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key, "has the wrong type");
  }
}

}  // namespace detail

// Parses a JSON config. Unknown keys and type errors raise ConfigError naming
// the offending field.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read;
  check_keys(j, "", {"schema_version", "scene", "camera", "render", "actions", "planner", "occupancy", "gaussians",
                     "mission", "eval", "output"});
  if (!j.contains("schema_version")) throw ConfigError("schema_version", "missing");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");

  RunConfig c;
  if (j.contains("scene")) {
    const auto& s = j["scene"];
    check_keys(s, "scene", {"kind", "file", "seed", "start", "start_yaw_deg"});
    if (s.contains("kind") && s.contains("file")) throw ConfigError("scene", "give either kind or file, not both");
    if (s.contains("kind")) {
      std::string k;
      read(s, "kind", "scene", k);
      c.scene_kind = parse_scene_kind(k);
      if (!c.scene_kind) throw ConfigError("scene.kind", "unknown scene kind \"" + k + "\"");
    }
    if (s.contains("file")) {
      read(s, "file", "scene", c.scene_file);
      c.scene_kind.reset();
      if (!s.contains("start")) throw ConfigError("scene.start", "required for mesh files");
    }
    read(s, "seed", "scene", c.scene_seed);
    if (s.contains("start")) {
      std::vector<double> p;
      read(s, "start", "scene", p);
      if (p.size() != 3) throw ConfigError("scene.start", "expected [x, y, z]");
      c.start_position = Vec3(p[0], p[1], p[2]);
    }
    read(s, "start_yaw_deg", "scene", c.start_yaw_deg);
  }
  if (j.contains("camera")) {
    const auto& s = j["camera"];
    check_keys(s, "camera", {"width", "height", "fov_h", "fov_v", "near", "far"});
    read(s, "width", "camera", c.camera.width);
    read(s, "height", "camera", c.camera.height);
    read(s, "fov_h", "camera", c.camera.fov_h);
    read(s, "fov_v", "camera", c.camera.fov_v);
    read(s, "near", "camera", c.camera.near);
    if (s.contains("far")) {
      read(s, "far", "camera", c.camera.far);
      c.far_auto = false;
    }
  }
  if (j.contains("render")) {
    const auto& s = j["render"];
    check_keys(s, "render", {"width", "height", "alpha_cutoff", "t_min", "valid_alpha", "r_target"});
    read(s, "width", "render", c.render_width);
    read(s, "height", "render", c.render_height);
    read(s, "alpha_cutoff", "render", c.alpha_cutoff);
    read(s, "t_min", "render", c.t_min);
    read(s, "valid_alpha", "render", c.valid_alpha);
    read(s, "r_target", "render", c.r_target);
  }
  if (j.contains("actions")) {
    const auto& s = j["actions"];
    check_keys(s, "actions", {"kind", "translation_step", "yaw_step", "pitch_step", "pitch_limit", "fixed_height"});
    if (s.contains("kind")) {
      std::string k;
      read(s, "kind", "actions", k);
      if (k == "drone-6dof") {
        c.actions = ActionSpace{};
      } else if (k == "wheeled") {
        c.actions = ActionSpace::wheeled();
        c.translation_auto = false;
      } else {
        throw ConfigError("actions.kind", "unknown action space \"" + k + "\"");
      }
    }
    if (s.contains("translation_step")) {
      read(s, "translation_step", "actions", c.actions.translation_step);
      c.translation_auto = false;
    }
    read(s, "yaw_step", "actions", c.actions.yaw_step);
    read(s, "pitch_step", "actions", c.actions.pitch_step);
    read(s, "pitch_limit", "actions", c.actions.pitch_limit);
    read(s, "fixed_height", "actions", c.actions.fixed_height);
  }
  if (j.contains("planner")) {
    const auto& s = j["planner"];
    check_keys(s, "planner",
               {"n_beams", "horizon", "execute", "collision_threshold", "agent_radius", "tie_epsilon", "eps_d"});
    read(s, "n_beams", "planner", c.planner.n_beams);
    read(s, "horizon", "planner", c.planner.horizon);
    read(s, "execute", "planner", c.planner.execute);
    read(s, "collision_threshold", "planner", c.planner.collision_threshold);
    read(s, "agent_radius", "planner", c.planner.agent_radius);
    read(s, "tie_epsilon", "planner", c.planner.tie_epsilon);
    read(s, "eps_d", "planner", c.planner.eps_d);
  }
  if (j.contains("occupancy")) {
    const auto& s = j["occupancy"];
    check_keys(s, "occupancy", {"resolution", "prior", "hit", "miss", "p_min", "p_max", "predictor", "shell",
                                "shell_back", "inherit_rebuild", "inherit_refresh"});
    read(s, "resolution", "occupancy", c.occupancy.resolution);
    read(s, "prior", "occupancy", c.occupancy.prior);
    read(s, "hit", "occupancy", c.occupancy.log_odds.hit);
    read(s, "miss", "occupancy", c.occupancy.log_odds.miss);
    read(s, "p_min", "occupancy", c.occupancy.log_odds.p_min);
    read(s, "p_max", "occupancy", c.occupancy.log_odds.p_max);
    if (s.contains("predictor")) {
      std::string k;
      read(s, "predictor", "occupancy", k);
      if (k == "surface-shell") c.occupancy.predictor = PredictorKind::SurfaceShell;
      else if (k == "carving") c.occupancy.predictor = PredictorKind::Carving;
      else throw ConfigError("occupancy.predictor", "expected \"surface-shell\" or \"carving\"");
    }
    read(s, "shell", "occupancy", c.occupancy.shell);
    read(s, "shell_back", "occupancy", c.occupancy.shell_back);
    read(s, "inherit_rebuild", "occupancy", c.occupancy.inherit_rebuild);
    read(s, "inherit_refresh", "occupancy", c.occupancy.inherit_refresh);
  }
  if (j.contains("gaussians")) {
    const auto& s = j["gaussians"];
    check_keys(s, "gaussians",
               {"n_proxy", "density", "interior_fraction", "margin", "surface_spacing", "rebuild_every"});
    read(s, "n_proxy", "gaussians", c.proxies.n_proxy);
    read(s, "density", "gaussians", c.proxies.density);
    read(s, "interior_fraction", "gaussians", c.proxies.interior_fraction);
    read(s, "margin", "gaussians", c.proxies.margin);
    read(s, "surface_spacing", "gaussians", c.proxies.surface_spacing);
    read(s, "rebuild_every", "gaussians", c.mission.rebuild_every);
  }
  if (j.contains("mission")) {
    const auto& s = j["mission"];
    check_keys(s, "mission", {"steps", "policy", "noise_translation", "noise_rotation", "start", "seeds"});
    read(s, "steps", "mission", c.mission.total_steps);
    if (s.contains("policy")) {
      std::string p;
      read(s, "policy", "mission", p);
      const auto pol = parse_policy(p);
      if (!pol) throw ConfigError("mission.policy", "unknown policy \"" + p + "\"");
      c.mission.policy = *pol;
    }
    read(s, "noise_translation", "mission", c.mission.noise_translation);
    read(s, "noise_rotation", "mission", c.mission.noise_rotation);
    if (s.contains("start")) {
      std::string st;
      read(s, "start", "mission", st);
      if (st == "fixed") c.mission.start = StartPolicy::Fixed;
      else if (st == "random-free") c.mission.start = StartPolicy::RandomFree;
      else throw ConfigError("mission.start", "expected \"fixed\" or \"random-free\"");
    }
    read(s, "seeds", "mission", c.seeds);
    if (c.seeds.empty()) throw ConfigError("mission.seeds", "must not be empty");
  }
  if (j.contains("eval")) {
    const auto& s = j["eval"];
    check_keys(s, "eval", {"gt_views", "gt_seed", "gt_merge_radius", "eps_gt"});
    read(s, "gt_views", "eval", c.gt_views);
    read(s, "gt_seed", "eval", c.gt_seed);
    read(s, "gt_merge_radius", "eval", c.gt_merge_radius);
    read(s, "eps_gt", "eval", c.eps_gt);
  }
  if (j.contains("output")) {
    const auto& s = j["output"];
    check_keys(s, "output", {"dir"});
    read(s, "dir", "output", c.output_dir);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

// Canonical JSON form of the mission-relevant settings (seeds and output
// directory excluded), used for hashing and for the run summary.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  if (c.scene_kind) j["scene"]["kind"] = to_string(*c.scene_kind);
  else j["scene"]["file"] = c.scene_file;
  j["scene"]["seed"] = c.scene_seed;
  if (c.start_position) j["scene"]["start"] = {c.start_position->x(), c.start_position->y(), c.start_position->z()};
  j["scene"]["start_yaw_deg"] = c.start_yaw_deg;
  j["camera"] = {{"width", c.camera.width}, {"height", c.camera.height}, {"fov_h", c.camera.fov_h},
                 {"fov_v", c.camera.fov_v}, {"near", c.camera.near}};
  if (!c.far_auto) j["camera"]["far"] = c.camera.far;
  j["render"] = {{"width", c.render_width}, {"height", c.render_height}, {"alpha_cutoff", c.alpha_cutoff},
                 {"t_min", c.t_min}, {"valid_alpha", c.valid_alpha}, {"r_target", c.r_target}};
  j["actions"] = {{"kind", to_string(c.actions.kind)}, {"yaw_step", c.actions.yaw_step},
                  {"pitch_step", c.actions.pitch_step}, {"pitch_limit", c.actions.pitch_limit},
                  {"fixed_height", c.actions.fixed_height}};
  if (!c.translation_auto) j["actions"]["translation_step"] = c.actions.translation_step;
  j["planner"] = {{"n_beams", c.planner.n_beams}, {"horizon", c.planner.horizon}, {"execute", c.planner.execute},
                  {"collision_threshold", c.planner.collision_threshold}, {"agent_radius", c.planner.agent_radius},
                  {"tie_epsilon", c.planner.tie_epsilon}, {"eps_d", c.planner.eps_d}};
  j["occupancy"] = {{"resolution", c.occupancy.resolution}, {"prior", c.occupancy.prior},
                    {"hit", c.occupancy.log_odds.hit}, {"miss", c.occupancy.log_odds.miss},
                    {"p_min", c.occupancy.log_odds.p_min}, {"p_max", c.occupancy.log_odds.p_max},
                    {"predictor", c.occupancy.predictor == PredictorKind::SurfaceShell ? "surface-shell" : "carving"},
                    {"shell", c.occupancy.shell}, {"shell_back", c.occupancy.shell_back},
                    {"inherit_rebuild", c.occupancy.inherit_rebuild}, {"inherit_refresh", c.occupancy.inherit_refresh}};
  j["gaussians"] = {{"n_proxy", c.proxies.n_proxy}, {"density", c.proxies.density},
                    {"interior_fraction", c.proxies.interior_fraction}, {"margin", c.proxies.margin},
                    {"surface_spacing", c.proxies.surface_spacing}, {"rebuild_every", c.mission.rebuild_every}};
  j["mission"] = {{"steps", c.mission.total_steps}, {"policy", to_string(c.mission.policy)},
                  {"noise_translation", c.mission.noise_translation}, {"noise_rotation", c.mission.noise_rotation},
                  {"start", c.mission.start == StartPolicy::Fixed ? "fixed" : "random-free"}};
  j["eval"] = {{"gt_views", c.gt_views}, {"gt_seed", c.gt_seed}, {"gt_merge_radius", c.gt_merge_radius},
               {"eps_gt", c.eps_gt}};
  return j;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

// A loaded or generated scene with everything derived from it.
struct PreparedScene {
  SceneModel scene;
  Pose start;
  CameraModel sensor;
  RenderConfig render;
  ActionSpace actions;
  GroundTruthCloud gt;
  double eps_gt = 0.0;

  MissionSetup setup(const RunConfig& c) const {
    MissionSetup ms;
    ms.scene = &scene;
    ms.start = start;
    ms.sensor = sensor;
    ms.render = render;
    ms.actions = actions;
    ms.planner = c.planner;
    ms.occupancy = c.occupancy;
    ms.proxies = c.proxies;
    ms.gt = &gt;
    ms.eps_gt = eps_gt;
    return ms;
  }
};

// Validates every module invariant the config touches before any work.
inline void validate_config(const RunConfig& c) {
  auto wrap = [](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(field, e.what());
    }
  };
  wrap("camera", [&] {
    CameraModel cam = c.camera;
    if (c.far_auto) cam.far = cam.near + 1.0;
    cam.validate();
  });
  if (c.render_width < 1 || c.render_height < 1) throw ConfigError("render", "width and height must be >= 1");
  wrap("render", [&] {
    RenderConfig r;
    r.alpha_cutoff = c.alpha_cutoff;
    r.t_min = c.t_min;
    r.valid_alpha = c.valid_alpha;
    r.r_target = c.r_target > 0.0 ? c.r_target : 1.0;
    if (c.r_target < 0.0) throw Error("r_target must be >= 0");
    r.validate();
  });
  wrap("actions", [&] { c.actions.validate(); });
  wrap("planner", [&] { c.planner.validate(); });
  wrap("mission", [&] { c.mission.validate(); });
  if (!(c.occupancy.prior >= 0.0 && c.occupancy.prior <= 1.0)) throw ConfigError("occupancy.prior", "must lie in [0, 1]");
  if (c.occupancy.resolution < 0.0) throw ConfigError("occupancy.resolution", "must be >= 0");
  if (!(c.occupancy.shell >= 0.0)) throw ConfigError("occupancy.shell", "must be >= 0");
  if (!(c.occupancy.shell_back >= 1.0)) throw ConfigError("occupancy.shell_back", "must be >= 1");
  if (!(c.occupancy.inherit_rebuild >= 0.0) || !(c.occupancy.inherit_refresh >= 0.0))
    throw ConfigError("occupancy", "inheritance radii must be >= 0");
  if (!(c.occupancy.log_odds.p_min > 0.0 && c.occupancy.log_odds.p_min < c.occupancy.log_odds.p_max &&
        c.occupancy.log_odds.p_max < 1.0))
    throw ConfigError("occupancy", "require 0 < p_min < p_max < 1");
  if (c.proxies.n_proxy < 2) throw ConfigError("gaussians.n_proxy", "must be >= 2");
  if (!(c.proxies.density > 0.0)) throw ConfigError("gaussians.density", "must be positive");
  if (!(c.proxies.interior_fraction > 0.0 && c.proxies.interior_fraction <= 1.0))
    throw ConfigError("gaussians.interior_fraction", "must lie in (0, 1]");
  if (!(c.proxies.surface_spacing >= 0.0)) throw ConfigError("gaussians.surface_spacing", "must be >= 0");
  if (c.gt_views < 1) throw ConfigError("eval.gt_views", "must be >= 1");
  if (c.seeds.empty()) throw ConfigError("mission.seeds", "must not be empty");
}

inline PreparedScene prepare_scene(const RunConfig& c) {
  validate_config(c);
  PreparedScene ps;
  if (c.scene_kind) {
    GeneratedScene g = generate_scene(*c.scene_kind, c.scene_seed);
    ps.scene = std::move(g.scene);
    ps.start = g.start;
  } else {
    ps.scene = load_scene(c.scene_file);
  }
  if (c.start_position) ps.start = Pose::look(*c.start_position, deg2rad(c.start_yaw_deg), 0.0);
  const Aabb& b = ps.scene.bounds();
  const double diag = b.diagonal();
  ps.sensor = c.camera;
  if (c.far_auto) ps.sensor.far = diag;
  ps.sensor.validate();
  ps.render.cam = ps.sensor.with_resolution(c.render_width, c.render_height);
  ps.render.alpha_cutoff = c.alpha_cutoff;
  ps.render.t_min = c.t_min;
  ps.render.valid_alpha = c.valid_alpha;
  ps.render.r_target = c.r_target > 0.0 ? c.r_target : RenderConfig::r_target_for(ps.render.cam, 0.5 * diag);
  ps.actions = c.actions;
  if (c.translation_auto && c.actions.kind == ActionKind::Drone6Dof) ps.actions.translation_step = diag / 40.0;
  if (ps.actions.kind == ActionKind::Wheeled)
    ps.start = Pose::look({ps.start.position.x(), ps.start.position.y(), ps.actions.fixed_height}, ps.start.yaw(), 0.0);
  GtCloudOptions g;
  g.n_views = c.gt_views;
  g.seed = c.gt_seed;
  g.merge_radius = c.gt_merge_radius > 0.0 ? c.gt_merge_radius : diag / 100.0;
  g.agent_radius = c.planner.agent_radius;
  ps.gt = build_gt_cloud(ps.scene, ps.sensor, ps.start.position, g);
  ps.eps_gt = c.eps_gt > 0.0 ? c.eps_gt : 2.0 * g.merge_radius;
  return ps;
}

// ---------------------------------------------------------------------------
// Artifact output.

// Writes `content` to a temporary sibling and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string mission_log_jsonl(const MissionLog& log, const ActionSpace& space) {
  std::ostringstream out;
  for (const auto& s : log.steps) {
    const Vec3& p = s.pose.position;
    const Quat& q = s.pose.orientation;
    out << "{\"step\":" << s.step << ",\"cycle\":" << s.cycle << ",\"position\":[" << fmt_double(p.x()) << ","
        << fmt_double(p.y()) << "," << fmt_double(p.z()) << "],\"orientation\":[" << fmt_double(q.w()) << ","
        << fmt_double(q.x()) << "," << fmt_double(q.y()) << "," << fmt_double(q.z()) << "],\"action\":\""
        << (s.action >= 0 ? action_name(space.kind, s.action) : "") << "\",\"planned_gain\":"
        << fmt_double(s.planned_gain) << ",\"coverage\":" << fmt_double(s.coverage)
        << ",\"bumped\":" << (s.bumped ? "true" : "false") << "}\n";
  }
  if (log.trapped) out << "{\"trapped\":true,\"steps_completed\":" << log.steps.size() << "}\n";
  return out.str();
}

inline std::string coverage_csv(const MissionLog& log) {
  std::ostringstream out;
  out << "step,coverage\n";
  for (const auto& s : log.steps) out << s.step << "," << fmt_double(s.coverage) << "\n";
  return out.str();
}

inline std::string timings_jsonl(const MissionLog& log) {
  std::ostringstream out;
  for (const auto& t : log.timings)
    out << "{\"cycle\":" << t.cycle << ",\"rebuilt\":" << (t.rebuilt ? "true" : "false")
        << ",\"refresh_s\":" << fmt_double(t.refresh_seconds) << ",\"plan_s\":" << fmt_double(t.plan_seconds)
        << ",\"execute_s\":" << fmt_double(t.execute_seconds) << "}\n";
  return out.str();
}

// Binary PGM (P5), values mapped linearly from [0, max_value] to [0, 255].
inline std::string pgm_image(const std::vector<double>& values, int width, int height, double max_value) {
  std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (double v : values) {
    const double x = max_value > 0.0 ? std::clamp(v / max_value, 0.0, 1.0) : 0.0;
    s.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(x * 255.0))));
  }
  return s;
}

// Occupancy dump: an ASCII header terminated by "end_header\n", then
// nx*ny*nz little-endian float32 probabilities with x varying fastest.
inline std::string field_dump(const OccupancyField& f) {
  std::ostringstream out;
  const auto& d = f.dims();
  const Aabb& b = f.bounds();
  out << "covplan-occupancy v1\n"
      << "dims " << d.x() << " " << d.y() << " " << d.z() << "\n"
      << "bounds " << fmt_double(b.min.x()) << " " << fmt_double(b.min.y()) << " " << fmt_double(b.min.z()) << " "
      << fmt_double(b.max.x()) << " " << fmt_double(b.max.y()) << " " << fmt_double(b.max.z()) << "\n"
      << "resolution " << fmt_double(f.resolution()) << "\n"
      << "prior " << fmt_double(f.prior()) << "\n"
      << "end_header\n";
  std::string s = out.str();
  for (double v : f.values()) {
    const float x = static_cast<float>(v);
    unsigned char bytes[4];
    std::memcpy(bytes, &x, 4);
    if constexpr (std::endian::native == std::endian::big) std::swap(bytes[0], bytes[3]), std::swap(bytes[1], bytes[2]);
    s.append(reinterpret_cast<const char*>(bytes), 4);
  }
  return s;
}

}  // namespace covplan
