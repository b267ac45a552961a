#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "covplan/geometry.hpp"

namespace covplan {

// Uniform hash grid over 3D points supporting incremental insertion,
// radius tests and exact nearest-neighbor queries.
class PointGrid {
 public:
  struct Neighbor {
    std::uint32_t id;
    double distance;
  };

  explicit PointGrid(double cell) : cell_(cell), inv_(1.0 / cell) {
    if (!(cell > 0.0) || !std::isfinite(cell)) throw Error("point grid cell size must be positive");
  }

  std::uint32_t insert(const Vec3& p) {
    const auto id = static_cast<std::uint32_t>(points_.size());
    points_.push_back(p);
    const Eigen::Vector3i c = cell_of(p);
    lo_ = points_.size() == 1 ? c : lo_.cwiseMin(c);
    hi_ = points_.size() == 1 ? c : hi_.cwiseMax(c);
    cells_[key(c)].push_back(id);
    return id;
  }

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::uint32_t id) const { return points_[id]; }
  const std::vector<Vec3>& points() const { return points_; }
  double cell_size() const { return cell_; }

  bool any_within(const Vec3& q, double radius) const {
    return any_within(q, radius, [](std::uint32_t, double) { return true; });
  }

  // True if some point within `radius` of q also satisfies pred(id, squared
  // distance).
  template <typename Pred>
  bool any_within(const Vec3& q, double radius, Pred&& pred) const {
    if (points_.empty()) return false;
    const double r2 = radius * radius;
    bool found = false;
    for_cells_in_box(q, radius, [&](const std::vector<std::uint32_t>& ids) {
      for (auto id : ids) {
        const double d2 = (points_[id] - q).squaredNorm();
        if (d2 <= r2 && pred(id, d2)) {
          found = true;
          return false;
        }
      }
      return true;
    });
    return found;
  }

  // Nearest stored point within max_radius (exclusive of `exclude`). Ties
  // resolve to the lower id.
  std::optional<Neighbor> nearest(const Vec3& q, double max_radius = std::numeric_limits<double>::infinity(),
                                  std::uint32_t exclude = std::numeric_limits<std::uint32_t>::max()) const {
    if (points_.empty()) return std::nullopt;
    const Eigen::Vector3i qc = cell_of(q);
    double best2 = max_radius * max_radius;
    std::optional<std::uint32_t> best;
    const int max_shell = std::max({std::abs(qc.x() - lo_.x()), std::abs(qc.x() - hi_.x()),
                                    std::abs(qc.y() - lo_.y()), std::abs(qc.y() - hi_.y()),
                                    std::abs(qc.z() - lo_.z()), std::abs(qc.z() - hi_.z())});
    const int radius_shells =
        std::isfinite(max_radius) ? static_cast<int>(std::ceil(max_radius * inv_)) + 1 : max_shell;
    const int limit = std::min(max_shell, radius_shells);
    for (int k = 0; k <= limit; ++k) {
      visit_shell(qc, k, [&](const std::vector<std::uint32_t>& ids) {
        for (auto id : ids) {
          if (id == exclude) continue;
          const double d2 = (points_[id] - q).squaredNorm();
          if (d2 < best2 || (d2 == best2 && (!best || id < *best))) {
            best2 = d2;
            best = id;
          }
        }
      });
      // Every point in shell k+1 or beyond is at least k cells away.
      if (best && std::sqrt(best2) <= k * cell_) break;
    }
    if (!best) return std::nullopt;
    return Neighbor{*best, std::sqrt(best2)};
  }

 private:
  Eigen::Vector3i cell_of(const Vec3& p) const {
    return {static_cast<int>(std::floor(p.x() * inv_)), static_cast<int>(std::floor(p.y() * inv_)),
            static_cast<int>(std::floor(p.z() * inv_))};
  }

  static std::uint64_t key(const Eigen::Vector3i& c) {
    constexpr std::uint64_t mask = (1ull << 21) - 1;
    const auto x = static_cast<std::uint64_t>(c.x() + (1 << 20)) & mask;
    const auto y = static_cast<std::uint64_t>(c.y() + (1 << 20)) & mask;
    const auto z = static_cast<std::uint64_t>(c.z() + (1 << 20)) & mask;
    return (x << 42) | (y << 21) | z;
  }

  template <typename Fn>
  void for_cells_in_box(const Vec3& q, double radius, Fn&& fn) const {
    const Eigen::Vector3i a = cell_of(q - Vec3::Constant(radius)).cwiseMax(lo_);
    const Eigen::Vector3i b = cell_of(q + Vec3::Constant(radius)).cwiseMin(hi_);
    for (int x = a.x(); x <= b.x(); ++x)
      for (int y = a.y(); y <= b.y(); ++y)
        for (int z = a.z(); z <= b.z(); ++z) {
          const auto it = cells_.find(key({x, y, z}));
          if (it != cells_.end() && !fn(it->second)) return;
        }
  }

  // Cells at Chebyshev distance exactly k from c.
  template <typename Fn>
  void visit_shell(const Eigen::Vector3i& c, int k, Fn&& fn) const {
    for (int x = c.x() - k; x <= c.x() + k; ++x) {
      if (x < lo_.x() || x > hi_.x()) continue;
      for (int y = c.y() - k; y <= c.y() + k; ++y) {
        if (y < lo_.y() || y > hi_.y()) continue;
        const bool edge = std::abs(x - c.x()) == k || std::abs(y - c.y()) == k;
        for (int z = c.z() - k; z <= c.z() + k; z += (edge || k == 0) ? 1 : 2 * k) {
          if (z < lo_.z() || z > hi_.z()) continue;
          const auto it = cells_.find(key({x, y, z}));
          if (it != cells_.end()) fn(it->second);
        }
      }
    }
  }

  double cell_;
  double inv_;
  std::vector<Vec3> points_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  Eigen::Vector3i lo_ = Eigen::Vector3i::Zero();
  Eigen::Vector3i hi_ = Eigen::Vector3i::Zero();
};

}  // namespace covplan
