#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <array>
#include <span>
#include <vector>

#include "covplan/geometry.hpp"
#include "covplan/point_grid.hpp"

namespace covplan {

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double sigmoid(double l) { return 1.0 / (1.0 + std::exp(-l)); }

// Log-odds increments applied once per voxel per observation.
struct LogOddsParams {
  double hit = 3.5;
  double miss = -1.5;
  double p_min = 0.02;
  double p_max = 0.98;
};

// Dense probabilistic occupancy grid over an axis-aligned workspace.
// Voxel (i, j, k) spans bounds.min + [i, i+1) * resolution per axis.
class OccupancyField {
 public:
  OccupancyField() = default;

  OccupancyField(const Aabb& bounds, double resolution, double prior, LogOddsParams params = {})
      : bounds_(bounds), res_(resolution), prior_(prior), params_(params) {
    if (!(resolution > 0.0)) throw Error("occupancy: resolution must be positive");
    if (!(prior >= 0.0 && prior <= 1.0)) throw Error("occupancy: prior must lie in [0, 1]");
    if (!(params.p_min > 0.0 && params.p_min < params.p_max && params.p_max < 1.0))
      throw Error("occupancy: require 0 < p_min < p_max < 1");
    const Vec3 e = bounds.extent();
    for (int a = 0; a < 3; ++a) {
      if (!(e[a] > 0.0)) throw Error("occupancy: bounds must have positive extent");
      dims_[a] = std::max(1, static_cast<int>(std::ceil(e[a] / res_ - 1e-9)));
    }
    values_.assign(voxel_count(), prior_);
  }

  const Aabb& bounds() const { return bounds_; }
  double resolution() const { return res_; }
  double prior() const { return prior_; }
  const LogOddsParams& params() const { return params_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  std::size_t voxel_count() const { return static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims_.y() + j) * dims_.x() + i;
  }
  Eigen::Vector3i coords(std::size_t idx) const {
    const int i = static_cast<int>(idx % dims_.x());
    const int j = static_cast<int>((idx / dims_.x()) % dims_.y());
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(dims_.x()) * dims_.y()));
    return {i, j, k};
  }
  bool in_grid(const Eigen::Vector3i& c) const {
    return (c.array() >= 0).all() && (c.array() < dims_.array()).all();
  }
  Eigen::Vector3i voxel_of(const Vec3& x) const {
    const Vec3 f = (x - bounds_.min) / res_;
    return {static_cast<int>(std::floor(f.x())), static_cast<int>(std::floor(f.y())),
            static_cast<int>(std::floor(f.z()))};
  }
  // Voxel containing x, with points on the closed bounds clamped into the grid.
  std::optional<Eigen::Vector3i> voxel_containing(const Vec3& x) const {
    if (!bounds_.contains(x)) return std::nullopt;
    return voxel_of(x).cwiseMax(Eigen::Vector3i::Zero()).cwiseMin(dims_ - Eigen::Vector3i::Ones());
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return bounds_.min + Vec3(i + 0.5, j + 0.5, k + 0.5) * res_;
  }

  double value(std::size_t idx) const { return values_[idx]; }
  double value(int i, int j, int k) const { return values_[index(i, j, k)]; }
  const std::vector<double>& values() const { return values_; }

  void set_value(std::size_t idx, double p) { values_[idx] = std::clamp(p, 0.0, 1.0); }

  // One log-odds update, clamped to [p_min, p_max].
  void update(std::size_t idx, double delta) {
    const double l = logit(std::clamp(values_[idx], params_.p_min, params_.p_max)) + delta;
    values_[idx] = std::clamp(sigmoid(l), params_.p_min, params_.p_max);
  }

  // Trilinear interpolation of voxel values at voxel centers; exactly 0
  // outside the bounds.
  double query(const Vec3& x) const {
    if (!bounds_.contains(x)) return 0.0;
    const Vec3 f = (x - bounds_.min) / res_ - Vec3::Constant(0.5);
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
      const double c = std::clamp(f[a], 0.0, static_cast<double>(dims_[a] - 1));
      i0[a] = std::min(static_cast<int>(std::floor(c)), dims_[a] - 2 < 0 ? 0 : dims_[a] - 2);
      t[a] = dims_[a] == 1 ? 0.0 : c - i0[a];
    }
    const int dx = dims_.x() > 1 ? 1 : 0, dy = dims_.y() > 1 ? 1 : 0, dz = dims_.z() > 1 ? 1 : 0;
    auto v = [&](int a, int b, int c) { return values_[index(i0[0] + a * dx, i0[1] + b * dy, i0[2] + c * dz)]; };
    auto lerp = [](double a, double b, double s) { return a + s * (b - a); };
    const double c00 = lerp(v(0, 0, 0), v(1, 0, 0), t[0]);
    const double c10 = lerp(v(0, 1, 0), v(1, 1, 0), t[0]);
    const double c01 = lerp(v(0, 0, 1), v(1, 0, 1), t[0]);
    const double c11 = lerp(v(0, 1, 1), v(1, 1, 1), t[0]);
    return std::clamp(lerp(lerp(c00, c10, t[1]), lerp(c01, c11, t[1]), t[2]), 0.0, 1.0);
  }

  // Visits voxels pierced by the segment origin + s*dir, s in [0, length],
  // in order, clipped to the grid. fn(voxel_index, s_enter, s_exit).
  template <typename Fn>
  void traverse(const Vec3& origin, const Vec3& dir, double length, Fn&& fn) const {
    double s0 = 0.0, s1 = length;
    const Vec3 gmax = bounds_.min + dims_.cast<double>() * res_;
    for (int a = 0; a < 3; ++a) {
      if (dir[a] == 0.0) {
        if (origin[a] < bounds_.min[a] || origin[a] >= gmax[a]) return;
        continue;
      }
      double ta = (bounds_.min[a] - origin[a]) / dir[a];
      double tb = (gmax[a] - origin[a]) / dir[a];
      if (ta > tb) std::swap(ta, tb);
      s0 = std::max(s0, ta);
      s1 = std::min(s1, tb);
    }
    if (!(s0 < s1)) return;
    const Vec3 p = origin + dir * s0;
    Eigen::Vector3i c = voxel_of(p).cwiseMax(Eigen::Vector3i::Zero()).cwiseMin(dims_ - Eigen::Vector3i::Ones());
    int step[3];
    double next[3], delta[3];
    for (int a = 0; a < 3; ++a) {
      if (dir[a] > 0.0) {
        step[a] = 1;
        next[a] = (bounds_.min[a] + (c[a] + 1) * res_ - origin[a]) / dir[a];
        delta[a] = res_ / dir[a];
      } else if (dir[a] < 0.0) {
        step[a] = -1;
        next[a] = (bounds_.min[a] + c[a] * res_ - origin[a]) / dir[a];
        delta[a] = -res_ / dir[a];
      } else {
        step[a] = 0;
        next[a] = std::numeric_limits<double>::infinity();
        delta[a] = std::numeric_limits<double>::infinity();
      }
    }
    double s = s0;
    while (s < s1) {
      int a = 0;
      if (next[1] < next[a]) a = 1;
      if (next[2] < next[a]) a = 2;
      const double exit = std::min(next[a], s1);
      fn(index(c.x(), c.y(), c.z()), s, exit);
      s = exit;
      c[a] += step[a];
      next[a] += delta[a];
      if (c[a] < 0 || c[a] >= dims_[a]) break;
    }
  }

 private:
  Aabb bounds_;
  double res_ = 1.0;
  double prior_ = 0.3;
  LogOddsParams params_;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Ones();
  std::vector<double> values_;
};

// Anything that answers occupancy probability queries at world points.
template <typename T>
concept OccupancySource = requires(const T& f, const Vec3& x) {
  { f.query(x) } -> std::convertible_to<double>;
};

// Reconstructed surface points with per-point source-pose index; insertions
// closer than merge_radius to an existing point are dropped.
class SurfaceCloud {
 public:
  explicit SurfaceCloud(double merge_radius = 0.02) : merge_radius_(merge_radius), grid_(merge_radius) {}

  bool add(const Vec3& p, std::uint32_t pose_index) {
    if (grid_.any_within(p, merge_radius_)) return false;
    grid_.insert(p);
    pose_index_.push_back(pose_index);
    return true;
  }

  std::size_t size() const { return grid_.size(); }
  const std::vector<Vec3>& points() const { return grid_.points(); }
  const std::vector<std::uint32_t>& pose_indices() const { return pose_index_; }
  double merge_radius() const { return merge_radius_; }
  bool any_within(const Vec3& q, double r) const { return grid_.any_within(q, r); }
  std::optional<PointGrid::Neighbor> nearest(const Vec3& q, double max_r) const { return grid_.nearest(q, max_r); }

 private:
  double merge_radius_;
  PointGrid grid_;
  std::vector<std::uint32_t> pose_index_;
};

// Greedy Poisson-disk subsample of the surface cloud in insertion order: a
// point is kept when no kept point lies within `spacing`.
inline std::vector<Vec3> surface_proxy_points(const SurfaceCloud& cloud, double spacing) {
  if (!(spacing > 0.0)) throw Error("surface_proxy_points: spacing must be > 0");
  PointGrid kept(spacing);
  std::vector<Vec3> out;
  for (const Vec3& p : cloud.points()) {
    if (kept.any_within(p, spacing)) continue;
    kept.insert(p);
    out.push_back(p);
  }
  return out;
}

// Pluggable occupancy model: given the reconstructed cloud and visited poses,
// predict occupancy probabilities for query points.
class OccupancyPredictor {
 public:
  virtual ~OccupancyPredictor() = default;
  virtual void predict(const SurfaceCloud& cloud, std::span<const Pose> visited, std::span<const Vec3> queries,
                       std::span<double> out) const = 0;
};

// Baseline predictor backed by a visibility-carved field.
class CarvingPredictor final : public OccupancyPredictor {
 public:
  explicit CarvingPredictor(const OccupancyField& field) : field_(&field) {}

  void predict(const SurfaceCloud&, std::span<const Pose>, std::span<const Vec3> queries,
               std::span<double> out) const override {
    if (out.size() != queries.size()) throw Error("predictor: output span size mismatch");
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = std::clamp(field_->query(queries[i]), 0.0, 1.0);
  }

 private:
  const OccupancyField* field_;
};

// Carved field plus a shell around the reconstructed surface: points within
// `shell` of a surface point are at least `p_surface` occupied, so observed
// surfaces stay opaque however the proxy points fall. Where the field was never
// carved (still at the prior) the shell reaches `back` times further.
class SurfaceShellPredictor final : public OccupancyPredictor {
 public:
  SurfaceShellPredictor(const OccupancyField& field, double shell, double p_surface, double back = 1.0)
      : field_(&field), shell_(shell), p_surface_(p_surface), back_(back) {
    if (!(shell >= 0.0)) throw Error("predictor: shell must be >= 0");
    if (!(p_surface >= 0.0 && p_surface <= 1.0)) throw Error("predictor: p_surface must lie in [0, 1]");
    if (!(back >= 1.0)) throw Error("predictor: back factor must be >= 1");
  }

  void predict(const SurfaceCloud& cloud, std::span<const Pose>, std::span<const Vec3> queries,
               std::span<double> out) const override {
    if (out.size() != queries.size()) throw Error("predictor: output span size mismatch");
    for (std::size_t i = 0; i < queries.size(); ++i) {
      double v = std::clamp(field_->query(queries[i]), 0.0, 1.0);
      if (v < p_surface_ && shell_ > 0.0) {
        const double r = v >= field_->prior() - 1e-9 ? back_ * shell_ : shell_;
        if (cloud.any_within(queries[i], r)) v = p_surface_;
      }
      out[i] = v;
    }
  }

 private:
  const OccupancyField* field_;
  double shell_;
  double p_surface_;
  double back_;
};

// Adapts a predictor to the point-query interface used by Gaussian building.
class PredictorQuery {
 public:
  PredictorQuery(const OccupancyPredictor& p, const SurfaceCloud& cloud, std::span<const Pose> visited)
      : p_(&p), cloud_(&cloud), visited_(visited) {}

  double query(const Vec3& x) const {
    double out = 0.0;
    p_->predict(*cloud_, visited_, std::span<const Vec3>(&x, 1), std::span<double>(&out, 1));
    return std::clamp(out, 0.0, 1.0);
  }

 private:
  const OccupancyPredictor* p_;
  const SurfaceCloud* cloud_;
  std::span<const Pose> visited_;
};

// Carves free space along every pixel ray and marks hit voxels occupied.
// Each voxel receives at most one update per observation; a hit wins over a
// miss in the same observation. Rays without a valid depth carve to `far`.
inline void integrate_observation(OccupancyField& field, SurfaceCloud& cloud, const DepthImage& depth,
                                  const Pose& pose, const CameraModel& cam, std::uint32_t pose_index = 0) {
  constexpr std::uint8_t kMiss = 1, kHit = 2;
  std::vector<std::uint8_t> mark(field.voxel_count(), 0);
  const Mat3 r = pose.rotation();
  const Vec3& o = pose.position;

  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const Vec3 x = o + r * cam.pixel_ray(u, v) * depth.at(u, v);
      if (const auto c = field.voxel_containing(x)) mark[field.index(c->x(), c->y(), c->z())] = kHit;
      cloud.add(x, pose_index);
    }

  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const Vec3 dir = r * cam.pixel_ray(u, v);
      const bool hit = depth.valid(u, v);
      const double len = hit ? depth.at(u, v) : cam.far;
      std::size_t hit_idx = static_cast<std::size_t>(-1);
      if (hit) {
        if (const auto c = field.voxel_containing(o + dir * len)) hit_idx = field.index(c->x(), c->y(), c->z());
      }
      field.traverse(o, dir, len, [&](std::size_t idx, double, double) {
        if (idx == hit_idx) return;
        if (mark[idx] == 0) mark[idx] = kMiss;
      });
    }

  const LogOddsParams& lp = field.params();
  for (std::size_t i = 0; i < mark.size(); ++i) {
    if (mark[i] == kHit) field.update(i, lp.hit);
    else if (mark[i] == kMiss) field.update(i, lp.miss);
  }
}

inline double query_occupancy(const OccupancyField& field, const Vec3& x) { return field.query(x); }

// ceil(interior_fraction * n_total) points uniform in the field bounds; the
// remainder uniform in the shell between the bounds and bounds + margin.
inline std::vector<Vec3> sample_proxy_points(const Aabb& bounds, std::size_t n_total, double interior_fraction,
                                             std::uint64_t seed, double margin) {
  if (n_total < 1) throw Error("sample_proxy_points: n_total must be >= 1");
  if (!(interior_fraction > 0.0 && interior_fraction <= 1.0))
    throw Error("sample_proxy_points: interior_fraction must lie in (0, 1]");
  const auto n_in = static_cast<std::size_t>(std::ceil(interior_fraction * static_cast<double>(n_total) - 1e-9));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto in_box = [&](const Aabb& b) {
    return Vec3(b.min.x() + uni(rng) * (b.max.x() - b.min.x()), b.min.y() + uni(rng) * (b.max.y() - b.min.y()),
                b.min.z() + uni(rng) * (b.max.z() - b.min.z()));
  };
  std::vector<Vec3> pts;
  pts.reserve(n_total);
  for (std::size_t i = 0; i < n_in; ++i) pts.push_back(in_box(bounds));
  const Aabb outer = bounds.expanded(margin);
  while (pts.size() < n_total) {
    if (!(margin > 0.0)) throw Error("sample_proxy_points: exterior points require a positive margin");
    const Vec3 p = in_box(outer);
    if (!bounds.contains(p)) pts.push_back(p);
  }
  return pts;
}

inline std::vector<Vec3> sample_proxy_points(const OccupancyField& field, std::size_t n_total,
                                             double interior_fraction, std::uint64_t seed, double margin) {
  return sample_proxy_points(field.bounds(), n_total, interior_fraction, seed, margin);
}

// Sample offsets used to inflate a point by the agent radius.
inline std::array<Vec3, 7> agent_stencil(double radius) {
  return {Vec3::Zero(),           Vec3(radius, 0, 0),  Vec3(-radius, 0, 0), Vec3(0, radius, 0),
          Vec3(0, -radius, 0),    Vec3(0, 0, radius),  Vec3(0, 0, -radius)};
}

inline bool is_point_free(const OccupancyField& field, const Vec3& p, double agent_radius, double threshold) {
  for (const Vec3& o : agent_stencil(agent_radius))
    if (field.query(p + o) >= threshold) return false;
  return true;
}

// True iff every sample along a->b (step resolution/2, endpoints included),
// inflated by agent_radius, has occupancy below threshold.
inline bool is_path_free(const OccupancyField& field, const Vec3& a, const Vec3& b, double agent_radius,
                         double threshold, double step = 0.0) {
  if (!(step > 0.0)) step = 0.5 * field.resolution();
  const Vec3 d = b - a;
  const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / step)));
  for (int i = 0; i <= n; ++i)
    if (!is_point_free(field, a + d * (static_cast<double>(i) / n), agent_radius, threshold)) return false;
  return true;
}

inline bool is_path_free(const OccupancyField& field, const Pose& a, const Pose& b, double agent_radius,
                         double threshold) {
  return is_path_free(field, a.position, b.position, agent_radius, threshold);
}

}  // namespace covplan
