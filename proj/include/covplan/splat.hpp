#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "covplan/gaussians.hpp"
#include "covplan/geometry.hpp"

namespace covplan {

struct RenderConfig {
  CameraModel cam;
  double alpha_cutoff = 1.0 / 255.0;
  double t_min = 1e-3;
  double valid_alpha = 0.5;
  // Target surface density in points per square meter.
  double r_target = 1.0;

  // Depth below which pixels oversample the target density.
  double d_th() const { return cam.focal() / std::sqrt(r_target); }

  // r_target that places the threshold depth at `d_th`.
  static double r_target_for(const CameraModel& cam, double d_th) {
    const double q = cam.focal() / d_th;
    return q * q;
  }

  // Defaults with the threshold depth at half the scene-bounds diagonal.
  static RenderConfig for_scene(const CameraModel& cam, const Aabb& scene_bounds) {
    RenderConfig cfg;
    cfg.cam = cam;
    cfg.r_target = r_target_for(cam, 0.5 * scene_bounds.diagonal());
    return cfg;
  }

  void validate() const {
    cam.validate();
    if (!(valid_alpha > 0.0 && valid_alpha < 1.0)) throw Error("render: valid_alpha must lie in (0, 1)");
    if (!(t_min >= 0.0 && t_min < 1.0)) throw Error("render: t_min must lie in [0, 1)");
    if (!(alpha_cutoff >= 0.0 && alpha_cutoff < 1.0)) throw Error("render: alpha_cutoff must lie in [0, 1)");
    if (!(r_target > 0.0) || !std::isfinite(r_target)) throw Error("render: r_target must be positive");
  }
};

// min(1, (D / D_th)^2).
inline double depth_weight(double depth, double d_th) {
  const double q = depth / d_th;
#ifdef COVPLAN_MUTATE_DEPTH_WEIGHT
  // Mutation fixture: a deliberately wrong sign that the verifier must catch.
  return std::min(1.0, -q * q);
#else
  return std::min(1.0, q * q);
#endif
}

// Rendered novelty, expected depth and accumulated opacity per pixel,
// row-major. Invalid depth is 0.
struct NoveltyRender {
  int width = 0;
  int height = 0;
  std::vector<double> novelty;
  std::vector<double> depth;
  std::vector<double> acc_alpha;

  bool depth_valid(std::size_t p) const { return depth[p] > 0.0; }

  // Depth channel as a DepthImage for novelty marking.
  DepthImage depth_image() const {
    DepthImage img(width, height);
    img.values = depth;
    return img;
  }
};

namespace detail {

struct SplatItem {
  double dist;
  double u, v, sigma, opacity;
  double ext;  // footprint radius in pixels
  bool novel;
};

struct SplatKey {
  double dist;
  std::uint32_t item;
};

inline int ifloor(double z) {
  const int i = static_cast<int>(z);
  return i - (z < i);
}
inline int iceil(double z) {
  const int i = static_cast<int>(z);
  return i + (z > i);
}

// out[i] = scale * exp(-(d0 + i)^2 * k) for i in [0, n), by the ratio
// recurrence exp(-(d+1)^2 k) = exp(-d^2 k) * exp(-(2d+1) k).
inline void gaussian_row(double scale, double d0, double k, int n, double* out) {
  double g = scale * std::exp(-d0 * d0 * k);
  double r = std::exp(-(2.0 * d0 + 1.0) * k);
  const double q = std::exp(-2.0 * k);
  for (int i = 0; i < n; ++i) {
    out[i] = g;
    g *= r;
    r *= q;
  }
}

}  // namespace detail

// Front-to-back alpha compositing of the Gaussians along every pixel ray.
// Per-sample alpha: opacity * exp(-u^2 / (2 sigma^2)) with sigma = f r / z,
// evaluated to 3 sigma. Gaussians are ordered by camera distance of their
// centers (index breaks ties), which is also the per-pixel order.
inline NoveltyRender render_novelty(const GaussianProxySet& set, const NoveltyOverlay& overlay, const Pose& pose,
                                    const RenderConfig& cfg) {
  if (overlay.generation() != set.generation || overlay.size() != set.size())
    throw Error("render_novelty: stale overlay (generation mismatch)");
  const CameraModel& cam = cfg.cam;
  const int w = cam.width, h = cam.height;
  const std::size_t npix = cam.pixel_count();

  NoveltyRender out;
  out.width = w;
  out.height = h;
  out.novelty.assign(npix, 0.0);
  out.depth.assign(npix, 0.0);
  out.acc_alpha.assign(npix, 0.0);

  thread_local std::vector<detail::SplatItem> items;
  thread_local std::vector<detail::SplatKey> keys;
  thread_local std::vector<double> trans, dsum, ex, ey;
  items.clear();
  keys.clear();

  const Mat3 rt = pose.rotation().transpose();
  const double fx = cam.fx(), fy = cam.fy(), cx = cam.cx(), cy = cam.cy(), f = cam.focal();
  const double cutoff = cfg.alpha_cutoff, t_min = cfg.t_min;
  // Above this opacity the 3-sigma support is reached before alpha < cutoff.
  const double full_support = cutoff * std::exp(4.5);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double o = set.opacities[i];
    if (o < cutoff || o <= 0.0) continue;
    const Vec3 rel = set.centers[i] - pose.position;
    const Vec3 c = rt * rel;
    const double z = c.z();
    if (z <= cam.near) continue;
    const double dist = rel.norm();
    if (dist > cam.far) continue;
    const double sigma = f * set.radii[i] / z;
    const double u = fx * c.x() / z + cx;
    const double v = fy * c.y() / z + cy;
    // Beyond ext either alpha < cutoff or the 3-sigma support ends.
    // Any upper bound works below full support: pixels are still tested
    // against the cutoff individually.
    const double ext =
        o >= full_support
            ? 3.0 * sigma
            : std::min(3.0 * sigma, sigma * 1.0001 * std::sqrt(2.0 * static_cast<double>(std::log(static_cast<float>(o / cutoff)))));
    if (u + ext < 0.0 || u - ext > w || v + ext < 0.0 || v - ext > h) continue;
    keys.push_back({dist, static_cast<std::uint32_t>(items.size())});
    items.push_back({dist, u, v, sigma, o, ext, overlay.test(i)});
  }
  // Items were appended in Gaussian index order, so item order breaks ties.
  std::sort(keys.begin(), keys.end(), [](const detail::SplatKey& a, const detail::SplatKey& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.item < b.item);
  });

  trans.assign(npix, 1.0);
  dsum.assign(npix, 0.0);
  ex.resize(static_cast<std::size_t>(w));
  ey.resize(static_cast<std::size_t>(h));
  for (const auto& key : keys) {
    const detail::SplatItem& it = items[key.item];
    const double ext = it.ext;
    const double r2max = ext * ext;
    const double inv2s2 = 1.0 / (2.0 * it.sigma * it.sigma);
    const int x0 = std::max(0, detail::iceil(it.u - ext - 0.5));
    const int x1 = std::min(w - 1, detail::ifloor(it.u + ext - 0.5));
    const int y0 = std::max(0, detail::iceil(it.v - ext - 0.5));
    const int y1 = std::min(h - 1, detail::ifloor(it.v + ext - 0.5));
    if (x0 > x1 || y0 > y1) continue;
    // exp(-(du^2 + dv^2) k) = exp(-du^2 k) * exp(-dv^2 k).
    detail::gaussian_row(it.opacity, x0 + 0.5 - it.u, inv2s2, x1 - x0 + 1, ex.data());
    detail::gaussian_row(1.0, y0 + 0.5 - it.v, inv2s2, y1 - y0 + 1, ey.data());
    for (int y = y0; y <= y1; ++y) {
      const double dv = y + 0.5 - it.v;
      const double dv2 = dv * dv;
      if (dv2 > r2max) continue;
      const double half = std::sqrt(r2max - dv2);
      const int xa = std::max(x0, detail::iceil(it.u - half - 0.5));
      const int xb = std::min(x1, detail::ifloor(it.u + half - 0.5));
      const double fy = ey[y - y0];
      double* trow = trans.data() + static_cast<std::size_t>(y) * w;
      double* nrow = out.novelty.data() + static_cast<std::size_t>(y) * w;
      double* arow = out.acc_alpha.data() + static_cast<std::size_t>(y) * w;
      double* drow = dsum.data() + static_cast<std::size_t>(y) * w;
      auto span = [&](auto novel) {
        for (int x = xa; x <= xb; ++x) {
          const double t = trow[x];
          if (t < t_min) continue;
          const double alpha = ex[x - x0] * fy;
          if (alpha < cutoff) continue;
          const double contrib = t * alpha;
          if constexpr (decltype(novel)::value) nrow[x] += contrib;
          arow[x] += contrib;
          drow[x] += contrib * it.dist;
          trow[x] = t * (1.0 - alpha);
        }
      };
      if (it.novel) span(std::true_type{});
      else span(std::false_type{});
    }
  }
  for (std::size_t p = 0; p < npix; ++p) {
    if (out.acc_alpha[p] >= cfg.valid_alpha) out.depth[p] = dsum[p] / out.acc_alpha[p];
  }
  return out;
}

// Depth-weighted sum of rendered novelty over pixels with valid depth.
inline double coverage_gain(const NoveltyRender& render, const RenderConfig& cfg) {
  const double d_th = cfg.d_th();
  double g = 0.0;
  for (std::size_t p = 0; p < render.novelty.size(); ++p)
    if (render.depth_valid(p)) g += depth_weight(render.depth[p], d_th) * render.novelty[p];
  return g;
}

struct PoseGain {
  double gain = 0.0;
  NoveltyRender render;
};

inline PoseGain gain_for_pose(const GaussianProxySet& set, const NoveltyOverlay& overlay, const Pose& pose,
                              const RenderConfig& cfg) {
  PoseGain pg;
  pg.render = render_novelty(set, overlay, pose, cfg);
  pg.gain = coverage_gain(pg.render, cfg);
  return pg;
}

}  // namespace covplan
