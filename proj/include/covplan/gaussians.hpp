#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <ostream>
#include <span>
#include <vector>

#include "covplan/geometry.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/point_grid.hpp"

namespace covplan {

// Imagined Gaussians: isotropic Gaussians at proxy points. `radii` are 1-sigma
// extents, `opacities` mirror the occupancy field at the last build/refresh.
struct GaussianProxySet {
  std::vector<Vec3> centers;
  std::vector<double> radii;
  std::vector<double> opacities;
  std::uint64_t generation = 0;

  std::size_t size() const { return centers.size(); }
};

// Per-Gaussian binary novelty, one bit per Gaussian, tagged with the
// generation of the set it belongs to.
class NoveltyOverlay {
 public:
  NoveltyOverlay() = default;
  NoveltyOverlay(std::uint64_t generation, std::size_t n, bool value = true)
      : generation_(generation), size_(n), words_((n + 63) / 64, value ? ~0ull : 0ull) {
    trim();
  }

  std::uint64_t generation() const { return generation_; }
  std::size_t size() const { return size_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ull; }
  void set(std::size_t i) { words_[i >> 6] |= 1ull << (i & 63); }
  void clear(std::size_t i) { words_[i >> 6] &= ~(1ull << (i & 63)); }

  // Clears bit i; returns true when it was set.
  bool consume(std::size_t i) {
    const std::uint64_t m = 1ull << (i & 63);
    const bool was = words_[i >> 6] & m;
    words_[i >> 6] &= ~m;
    return was;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  // Sum of opacity over still-novel Gaussians.
  double mass(std::span<const double> opacities) const {
    double m = 0.0;
    for (std::size_t i = 0; i < size_; ++i)
      if (test(i)) m += opacities[i];
    return m;
  }

  bool operator==(const NoveltyOverlay&) const = default;

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (1ull << (size_ % 64)) - 1;
  }

  std::uint64_t generation_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Independent copy; mutations never reach the original.
inline NoveltyOverlay fork_overlay(const NoveltyOverlay& overlay) { return overlay; }

// Distance from each point to its nearest other point.
inline std::vector<double> nearest_neighbor_distances(std::span<const Vec3> pts) {
  std::vector<double> out(pts.size(), std::numeric_limits<double>::infinity());
  if (pts.size() < 2) return out;
  Aabb box = Aabb::empty();
  for (const auto& p : pts) box.grow(p);
  const double cell =
      std::max(box.extent().maxCoeff() / std::cbrt(static_cast<double>(pts.size())), 1e-9);
  PointGrid grid(cell);
  for (const auto& p : pts) grid.insert(p);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto nn = grid.nearest(pts[i], std::numeric_limits<double>::infinity(), static_cast<std::uint32_t>(i));
    out[i] = nn ? nn->distance : std::numeric_limits<double>::infinity();
  }
  return out;
}

struct GaussianBuild {
  GaussianProxySet set;
  NoveltyOverlay overlay;
};

// Gaussians centered on proxy points with radius = half the nearest-neighbor
// distance and opacity = occupancy at the center. The returned overlay has
// every bit set.
template <OccupancySource Field>
GaussianBuild build_gaussians(const Field& field, std::vector<Vec3> proxy_points, std::uint64_t previous_generation = 0) {
  if (proxy_points.size() < 2) throw Error("build_gaussians: need at least 2 proxy points");
  GaussianProxySet set;
  set.generation = previous_generation + 1;
  const auto nn = nearest_neighbor_distances(proxy_points);
  set.radii.resize(nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (!(nn[i] > 0.0)) throw Error("build_gaussians: duplicate proxy point at index " + std::to_string(i));
    set.radii[i] = 0.5 * nn[i];
  }
  set.opacities.resize(proxy_points.size());
  for (std::size_t i = 0; i < proxy_points.size(); ++i) set.opacities[i] = std::clamp(static_cast<double>(field.query(proxy_points[i])), 0.0, 1.0);
  set.centers = std::move(proxy_points);
  NoveltyOverlay overlay(set.generation, set.size(), true);
  return {std::move(set), std::move(overlay)};
}

// Clears the novelty bit of every Gaussian whose center projects to a pixel
// with valid depth D and whose camera distance d satisfies |d - D| <= eps_d.
// Returns the number of bits that flipped from 1 to 0.
inline std::size_t mark_observed(const GaussianProxySet& set, NoveltyOverlay& overlay, const Pose& pose,
                                 const CameraModel& cam, const DepthImage& depth, double eps_d) {
  if (overlay.generation() != set.generation || overlay.size() != set.size())
    throw Error("mark_observed: overlay generation does not match the Gaussian set");
  if (depth.width != cam.width || depth.height != cam.height)
    throw Error("mark_observed: depth image size does not match the camera");
  const Mat3 rt = pose.rotation().transpose();
  std::size_t consumed = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!overlay.test(i)) continue;
    const Vec3 rel = set.centers[i] - pose.position;
    const Vec3 c = rt * rel;
    const auto px = cam.project_to_pixel(c);
    if (!px) continue;
    const double d_img = depth.at(px->first, px->second);
    if (!(d_img > 0.0)) continue;
    if (std::abs(rel.norm() - d_img) <= eps_d) consumed += overlay.consume(i) ? 1 : 0;
  }
  return consumed;
}

template <OccupancySource Field>
void refresh_opacities(GaussianProxySet& set, const Field& field) {
  for (std::size_t i = 0; i < set.size(); ++i) set.opacities[i] = std::clamp(static_cast<double>(field.query(set.centers[i])), 0.0, 1.0);
}

// Re-reads every opacity from the field and consumes novelty of Gaussians
// observed in the real depth image. Centers and radii are unchanged.
template <OccupancySource Field>
std::size_t refresh_after_observation(GaussianProxySet& set, NoveltyOverlay& overlay, const Field& field,
                                      const Pose& executed_pose, const CameraModel& cam, const DepthImage& gt_depth,
                                      double eps_d) {
  refresh_opacities(set, field);
  return mark_observed(set, overlay, executed_pose, cam, gt_depth, eps_d);
}

// After a rebuild, Gaussians near already-reconstructed surface start
// non-novel.
inline std::size_t inherit_observed_surface(const GaussianProxySet& set, NoveltyOverlay& overlay,
                                            const SurfaceCloud& cloud, double eps_d) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (overlay.test(i) && cloud.any_within(set.centers[i], eps_d)) n += overlay.consume(i) ? 1 : 0;
  return n;
}

// One line per Gaussian: "x y z radius opacity novelty".
inline void write_gaussian_dump(std::ostream& out, const GaussianProxySet& set, const NoveltyOverlay* overlay) {
  out << "# covplan-gaussians v1 generation=" << set.generation << " count=" << set.size() << "\n";
  out << "# x y z radius opacity novelty\n";
  char buf[160];
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec3& c = set.centers[i];
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %.6f %.6f %d\n", c.x(), c.y(), c.z(), set.radii[i],
                  set.opacities[i], overlay ? static_cast<int>(overlay->test(i)) : 1);
    out << buf;
  }
}

}  // namespace covplan
