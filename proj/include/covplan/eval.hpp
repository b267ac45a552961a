#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "covplan/gaussians.hpp"
#include "covplan/geometry.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/parallel.hpp"
#include "covplan/point_grid.hpp"
#include "covplan/scene.hpp"
#include "covplan/sensor.hpp"
#include "covplan/splat.hpp"

namespace covplan {

// Cells of a regular grid over the scene bounds that an agent of the given
// radius can occupy and that are 6-connected to the start cell.
class AccessibleGrid {
 public:
  AccessibleGrid(const SceneModel& scene, const Vec3& start, double cell, double agent_radius) : cell_(cell) {
    if (!(cell > 0.0)) throw Error("accessible grid: cell must be positive");
    const Aabb& b = scene.bounds();
    origin_ = b.min;
    for (int a = 0; a < 3; ++a) dims_[a] = std::max(1, static_cast<int>(std::floor(b.extent()[a] / cell)));
    const std::size_t n = static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
    std::vector<char> clear(n, 0);
    const double need = agent_radius + 0.5 * std::sqrt(3.0) * cell;
    global_pool().parallel_for(n, [&](std::size_t i) {
      clear[i] = scene.closest_distance(center(i)) > need ? 1 : 0;
    });
    // The start cell is where the agent is, even when the clearance test is
    // conservative there.
    Eigen::Vector3i sc;
    for (int a = 0; a < 3; ++a)
      sc[a] = std::clamp(static_cast<int>(std::floor((start[a] - origin_[a]) / cell)), 0, dims_[a] - 1);
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> q;
    const std::size_t s = index(sc);
    seen[s] = 1;
    q.push_back(s);
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop_front();
      cells_.push_back(i);
      const Eigen::Vector3i c = coords(i);
      for (int a = 0; a < 3; ++a)
        for (int d : {-1, 1}) {
          Eigen::Vector3i nc = c;
          nc[a] += d;
          if (nc[a] < 0 || nc[a] >= dims_[a]) continue;
          const std::size_t j = index(nc);
          if (seen[j] || !clear[j]) continue;
          seen[j] = 1;
          q.push_back(j);
        }
    }
    std::sort(cells_.begin(), cells_.end());
  }

  double cell() const { return cell_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  const std::vector<std::size_t>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }

  Vec3 center(std::size_t i) const {
    const Eigen::Vector3i c = coords(i);
    return origin_ + (c.cast<double>().array() + 0.5).matrix() * cell_;
  }
  std::size_t index(const Eigen::Vector3i& c) const {
    return (static_cast<std::size_t>(c.z()) * dims_.y() + c.y()) * dims_.x() + c.x();
  }
  Eigen::Vector3i coords(std::size_t i) const {
    const int x = static_cast<int>(i % dims_.x());
    const int y = static_cast<int>((i / dims_.x()) % dims_.y());
    const int z = static_cast<int>(i / (static_cast<std::size_t>(dims_.x()) * dims_.y()));
    return {x, y, z};
  }

  // Random pose inside a random accessible cell with a random heading and
  // an elevation within +-max_pitch_deg.
  Pose random_pose(std::mt19937_64& rng, double max_pitch_deg) const {
    if (cells_.empty()) throw Error("accessible grid is empty");
    std::uniform_int_distribution<std::size_t> pick(0, cells_.size() - 1);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    const Vec3 c = center(cells_[pick(rng)]);
    const Vec3 p = c + Vec3(uni(rng), uni(rng), uni(rng)) * cell_;
    const double yaw = std::uniform_real_distribution<double>(-M_PI, M_PI)(rng);
    const double s = std::sin(deg2rad(max_pitch_deg));
    const double pitch = std::asin(std::uniform_real_distribution<double>(-s, s)(rng));
    return Pose::look(p, yaw, pitch);
  }

 private:
  double cell_;
  Vec3 origin_;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Ones();
  std::vector<std::size_t> cells_;
};

struct GroundTruthCloud {
  std::vector<Vec3> points;
  std::vector<Pose> poses;  // the views that generated the cloud
  double merge_radius = 0.0;
};

struct GtCloudOptions {
  std::size_t n_views = 300;
  std::uint64_t seed = 0;
  double merge_radius = 0.05;
  double cell = 0.25;
  double agent_radius = 0.15;
  double max_pitch_deg = 75.0;
};

// Surface samples seen from random accessible viewpoints, deduplicated.
inline GroundTruthCloud build_gt_cloud(const SceneModel& scene, const CameraModel& cam, const Vec3& start,
                                       const GtCloudOptions& opt) {
  if (opt.n_views < 1) throw Error("build_gt_cloud: n_views must be >= 1");
  GroundTruthCloud gt;
  gt.merge_radius = opt.merge_radius;
  const AccessibleGrid grid(scene, start, opt.cell, opt.agent_radius);
  std::mt19937_64 rng(opt.seed);
  for (std::size_t i = 0; i < opt.n_views; ++i) gt.poses.push_back(grid.random_pose(rng, opt.max_pitch_deg));
  PointGrid dedup(opt.merge_radius);
  for (const Pose& pose : gt.poses) {
    for (const Vec3& p : backproject(render_depth_gt(scene, pose, cam), pose, cam)) {
      if (dedup.any_within(p, opt.merge_radius)) continue;
      dedup.insert(p);
      gt.points.push_back(p);
    }
  }
  return gt;
}

// A GT point is visible from a pose when it lies in the frustum and the
// first surface along the ray toward it is within eps_gt of its distance.
inline bool gt_point_visible(const SceneModel& scene, const CameraModel& cam, const Pose& pose, const Vec3& x,
                             double eps_gt) {
  const Vec3 rel = x - pose.position;
  const double d = rel.norm();
  if (d < cam.near || d > cam.far) return false;
  if (!cam.project_to_pixel(pose.to_camera(x))) return false;
  const auto hit = scene.intersect(pose.position, rel / d, cam.near, cam.far);
  return hit && std::abs(hit->t - d) <= eps_gt;
}

// Incremental coverage over a growing set of executed poses.
class CoverageTracker {
 public:
  CoverageTracker(const GroundTruthCloud& gt, const SceneModel& scene, const CameraModel& cam, double eps_gt)
      : gt_(&gt), scene_(&scene), cam_(cam), eps_(eps_gt), covered_(gt.points.size(), 0) {}

  // Marks points visible from `pose`; returns the new coverage fraction.
  double add(const Pose& pose) {
    const auto& pts = gt_->points;
    std::vector<char> hit(pts.size(), 0);
    global_pool().parallel_for((pts.size() + 255) / 256, [&](std::size_t blk) {
      const std::size_t end = std::min(pts.size(), (blk + 1) * 256);
      for (std::size_t i = blk * 256; i < end; ++i)
        if (!covered_[i] && gt_point_visible(*scene_, cam_, pose, pts[i], eps_)) hit[i] = 1;
    });
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (hit[i]) {
        covered_[i] = 1;
        ++count_;
      }
    return fraction();
  }

  double fraction() const { return pts_empty() ? 0.0 : static_cast<double>(count_) / gt_->points.size(); }
  std::size_t covered_count() const { return count_; }

 private:
  bool pts_empty() const { return gt_->points.empty(); }

  const GroundTruthCloud* gt_;
  const SceneModel* scene_;
  CameraModel cam_;
  double eps_;
  std::vector<char> covered_;
  std::size_t count_ = 0;
};

inline double coverage_fraction(const GroundTruthCloud& gt, std::span<const Pose> poses, const SceneModel& scene,
                                const CameraModel& cam, double eps_gt) {
  CoverageTracker t(gt, scene, cam, eps_gt);
  for (const Pose& p : poses) t.add(p);
  return t.fraction();
}

// Normalized trapezoidal area under a per-step coverage curve.
inline double auc(std::span<const double> curve) {
  if (curve.empty()) throw Error("auc: empty curve");
  if (curve.size() == 1) return curve[0];
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) s += 0.5 * (curve[i] + curve[i + 1]);
  return s / static_cast<double>(curve.size() - 1);
}

struct CoverageReport {
  std::vector<double> curve;
  double final_coverage = 0.0;
  double auc = 0.0;
};

inline CoverageReport make_report(std::vector<double> curve) {
  CoverageReport r;
  r.curve = std::move(curve);
  if (!r.curve.empty()) {
    r.final_coverage = r.curve.back();
    r.auc = covplan::auc(r.curve);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo coverage-gain oracle.

template <typename F>
concept OracleField = OccupancySource<F> && requires(const F& f) {
  { f.resolution() } -> std::convertible_to<double>;
};

// Novelty of a point: the overlay bit of the nearest Gaussian center if the
// point lies within 3 radii of it, else 0.
class GaussianNoveltyLookup {
 public:
  GaussianNoveltyLookup(const GaussianProxySet& set, const NoveltyOverlay& overlay)
      : set_(&set), overlay_(&overlay), grid_(cell_for(set)) {
    for (const auto& c : set.centers) grid_.insert(c);
    for (double r : set.radii) max_r_ = std::max(max_r_, r);
  }

  double operator()(const Vec3& x) const {
    if (set_->size() == 0) return 0.0;
    const auto nn = grid_.nearest(x, 3.0 * max_r_);
    if (!nn || nn->distance > 3.0 * set_->radii[nn->id]) return 0.0;
    return overlay_->test(nn->id) ? 1.0 : 0.0;
  }

 private:
  static double cell_for(const GaussianProxySet& set) {
    double r = 0.0;
    for (double x : set.radii) r = std::max(r, x);
    return r > 0.0 ? 2.0 * r : 1.0;
  }

  const GaussianProxySet* set_;
  const NoveltyOverlay* overlay_;
  PointGrid grid_;
  double max_r_ = 0.0;
};

// Stratified estimate of the frustum integral of occupancy x visibility x
// novelty x depth weight. Each pixel gets k x k jittered rays; each ray is
// marched from near to far in equal steps h with a per-ray jittered offset.
// A step of length h through occupancy p absorbs 1 - (1 - p)^(h / l), with l
// the field's length scale, and visibility is the product of the survivals
// before the sample. The per-pixel value is the mean over its rays, so a fully
// opaque, fully novel surface beyond d_th scores 1 per pixel.
template <OracleField F, typename Novelty>
double mc_gain_oracle(const F& field, const Novelty& novelty, const Pose& pose, const RenderConfig& rcfg,
                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("mc_gain_oracle: n_samples must be >= 1");
  const CameraModel& cam = rcfg.cam;
  const std::size_t npix = cam.pixel_count();
  const std::size_t per_pixel = std::max<std::size_t>(1, (n_samples + npix - 1) / npix);
  const int k = std::max(1, static_cast<int>(std::floor(std::sqrt(per_pixel / 32.0))));
  const int steps = std::max(1, static_cast<int>(per_pixel / static_cast<std::size_t>(k * k)));
  const double h = (cam.far - cam.near) / steps;
  const double expo = h / field.resolution();
  const double d_th = rcfg.d_th();
  const Mat3 r = pose.rotation();

  std::vector<double> pixel_gain(npix, 0.0);
  global_pool().parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t row) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (row + 1)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int v = static_cast<int>(row);
    for (int u = 0; u < cam.width; ++u) {
      double sum = 0.0;
      for (int sy = 0; sy < k; ++sy)
        for (int sx = 0; sx < k; ++sx) {
          const double px = u + (sx + uni(rng)) / k;
          const double py = v + (sy + uni(rng)) / k;
          const Vec3 dir = r * cam.image_ray(px, py);
          const double jitter = uni(rng);
          double t_acc = 1.0;
          double g = 0.0;
          for (int s = 0; s < steps && t_acc > 0.0; ++s) {
            const double t = cam.near + (s + jitter) * h;
            const Vec3 x = pose.position + dir * t;
            const double p = std::clamp(static_cast<double>(field.query(x)), 0.0, 1.0);
            if (p <= 0.0) continue;
            const double a = p >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - p, expo);
            const double gam = novelty(x);
            if (gam > 0.0) g += t_acc * a * gam * depth_weight(t, d_th);
            t_acc *= 1.0 - a;
          }
          sum += g;
        }
      pixel_gain[static_cast<std::size_t>(v) * cam.width + u] = sum / (k * k);
    }
  });
  double total = 0.0;
  for (double g : pixel_gain) total += g;
  return total;
}

// ---------------------------------------------------------------------------
// Synthetic scenes for oracle equivalence: solid boxes and spheres as a
// binary occupancy field, with near-opaque Gaussians on their surfaces.

struct SolidField {
  std::vector<Aabb> boxes;
  struct Sphere {
    Vec3 center;
    double radius;
  };
  std::vector<Sphere> spheres;
  double length_scale = 0.05;

  void add_ball(const Vec3& c, double radius) {
    if (balls_.points().empty()) balls_ = PointGrid(radius);
    balls_.insert(c);
    ball_radii_.push_back(radius);
    max_ball_ = std::max(max_ball_, radius);
  }

  double query(const Vec3& x) const {
    for (const auto& b : boxes)
      if (b.contains(x)) return 1.0;
    for (const auto& s : spheres)
      if ((x - s.center).squaredNorm() <= s.radius * s.radius) return 1.0;
    if (balls_.any_within(x, max_ball_, [&](std::uint32_t id, double d2) { return d2 <= ball_radii_[id] * ball_radii_[id]; }))
      return 1.0;
    return 0.0;
  }
  double resolution() const { return length_scale; }

 private:
  PointGrid balls_{1.0};
  std::vector<double> ball_radii_;
  double max_ball_ = 0.0;
};

namespace detail {

// Cell-centered grid of points on the six faces of a box, with roughly
// `spacing` between neighbors.
inline void box_surface_points(const Aabb& b, double spacing, std::vector<Vec3>& out) {
  const Vec3 e = b.extent();
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    const int n1 = std::max(1, static_cast<int>(std::round(e[a1] / spacing)));
    const int n2 = std::max(1, static_cast<int>(std::round(e[a2] / spacing)));
    for (double side : {b.min[axis], b.max[axis]})
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
          Vec3 p;
          p[axis] = side;
          p[a1] = b.min[a1] + (i + 0.5) * e[a1] / n1;
          p[a2] = b.min[a2] + (j + 0.5) * e[a2] / n2;
          out.push_back(p);
        }
  }
}

// Fibonacci lattice on a sphere.
inline void sphere_surface_points(const Vec3& c, double radius, int n, std::vector<Vec3>& out) {
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rr = std::sqrt(1.0 - z * z);
    const double th = golden * i;
    out.push_back(c + radius * Vec3(rr * std::cos(th), rr * std::sin(th), z));
  }
}

}  // namespace detail

struct OracleScene {
  SolidField field;
  GaussianProxySet set;
  NoveltyOverlay overlay;
  Aabb bounds;
};

// Scene 0: one box. Scene 1: two boxes, one partly hiding the other.
// Scene 2: a floor slab, a box and a sphere. Novelty is set on the Gaussians
// of selected objects or half-spaces so gains vary strongly with view.
inline OracleScene make_oracle_scene(int which) {
  OracleScene s;
  std::vector<Vec3> pts;
  std::vector<int> owner;
  auto add_box = [&](const Aabb& b, double spacing) {
    detail::box_surface_points(b, spacing, pts);
    s.field.boxes.push_back(b);
    owner.resize(pts.size(), static_cast<int>(s.field.boxes.size() + s.field.spheres.size()) - 1);
  };
  auto add_sphere = [&](const Vec3& c, double r, int n) {
    detail::sphere_surface_points(c, r, n, pts);
    s.field.spheres.push_back({c, r});
    owner.resize(pts.size(), static_cast<int>(s.field.boxes.size() + s.field.spheres.size()) - 1);
  };
  switch (which) {
    case 0:
      add_box({{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}}, 0.22);
      break;
    case 1:
      add_box({{-1.6, -0.4, -0.6}, {-0.4, 0.8, 0.6}}, 0.2);
      add_box({{0.2, -1.2, -1.0}, {1.8, 1.2, 1.0}}, 0.26);
      break;
    case 2:
      add_box({{-2.5, -2.5, -1.2}, {2.5, 2.5, -0.95}}, 0.42);
      add_box({{-1.6, -1.4, -0.95}, {-0.4, -0.2, 0.35}}, 0.26);
      add_sphere({0.9, 0.8, -0.15}, 0.8, 120);
      break;
    default:
      throw Error("unknown oracle scene index");
  }
  s.bounds = Aabb::empty();
  for (const auto& p : pts) s.bounds.grow(p);
  auto built = build_gaussians(s.field, pts);
  s.set = std::move(built.set);
  s.overlay = std::move(built.overlay);
  // Each Gaussian also occupies a ball whose silhouette area equals its
  // footprint's integrated alpha, 2 pi r^2.
  for (std::size_t i = 0; i < s.set.size(); ++i)
    s.field.add_ball(s.set.centers[i], std::sqrt(2.0) * s.set.radii[i]);
  for (std::size_t i = 0; i < s.set.size(); ++i) {
    const Vec3& c = s.set.centers[i];
    bool novel = true;
    switch (which) {
      case 0: novel = c.x() + 0.5 * c.y() > -0.3; break;
      case 1: novel = owner[i] == 1 || c.z() > 0.0; break;
      default: novel = owner[i] != 0 || c.x() > 0.0; break;
    }
    if (!novel) s.overlay.clear(i);
  }
  return s;
}

// Random viewpoints on a shell around the scene, aimed near its center.
inline std::vector<Pose> oracle_poses(const Aabb& bounds, std::size_t n, std::uint64_t seed, double r_min,
                                      double r_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Pose> out;
  const Vec3 c = bounds.center();
  const double spread = 0.5 * bounds.diagonal();
  while (out.size() < n) {
    const double yaw = 2.0 * M_PI * uni(rng);
    const double el = deg2rad(-10.0 + 50.0 * uni(rng));
    const double r = r_min + (r_max - r_min) * uni(rng);
    const Vec3 p = c + r * Vec3(std::cos(el) * std::cos(yaw), std::cos(el) * std::sin(yaw), std::sin(el));
    const Vec3 aim = c + spread * Vec3(uni(rng) - 0.5, uni(rng) - 0.5, 0.5 * (uni(rng) - 0.5)) * 1.6;
    const Vec3 f = (aim - p).normalized();
    out.push_back(Pose::look(p, std::atan2(f.y(), f.x()), std::asin(std::clamp(f.z(), -1.0, 1.0))));
  }
  return out;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("spearman: need two equal-length samples of size >= 2");
  auto ranks = [](std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct SpeedReport {
  double splat_seconds = 0.0;
  double oracle_seconds = 0.0;
  double ratio = 0.0;
};

// Median per-pose timings of the splat gain and the Monte Carlo oracle. The
// first pose is evaluated once beforehand as a warm-up and not timed.
template <OracleField F>
SpeedReport benchmark_gain_speed(const GaussianProxySet& set, const NoveltyOverlay& overlay, const F& field,
                                 std::span<const Pose> poses, const RenderConfig& rcfg, std::size_t n_samples) {
  if (poses.size() < 10) throw Error("benchmark_gain_speed: need at least 10 poses");
  using clock = std::chrono::steady_clock;
  const GaussianNoveltyLookup lookup(set, overlay);
  volatile double sink = gain_for_pose(set, overlay, poses[0], rcfg).gain;
  sink = sink + mc_gain_oracle(field, lookup, poses[0], rcfg, n_samples, 0);
  std::vector<double> ts, to;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    auto t0 = clock::now();
    sink = sink + gain_for_pose(set, overlay, poses[i], rcfg).gain;
    auto t1 = clock::now();
    sink = sink + mc_gain_oracle(field, lookup, poses[i], rcfg, n_samples, i + 1);
    auto t2 = clock::now();
    ts.push_back(std::chrono::duration<double>(t1 - t0).count());
    to.push_back(std::chrono::duration<double>(t2 - t1).count());
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  SpeedReport r;
  r.splat_seconds = median(ts);
  r.oracle_seconds = median(to);
  r.ratio = r.splat_seconds > 0.0 ? r.oracle_seconds / r.splat_seconds : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace covplan
