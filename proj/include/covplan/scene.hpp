#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "covplan/geometry.hpp"

namespace covplan {

struct Triangle {
  Vec3 a, b, c;

  double area() const { return 0.5 * (b - a).cross(c - a).norm(); }
  Vec3 centroid() const { return (a + b + c) / 3.0; }
  Aabb bounds() const {
    Aabb box = Aabb::empty();
    box.grow(a);
    box.grow(b);
    box.grow(c);
    return box;
  }
};

// Möller–Trumbore ray/triangle test. Returns the ray parameter of the hit
// (front or back face) or nullopt.
inline std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - tri.a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(q) * inv;
}

// Closest point on a triangle to p (Ericson, Real-Time Collision Detection).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& t) {
  const Vec3 ab = t.b - t.a, ac = t.c - t.a, ap = p - t.a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return t.a;
  const Vec3 bp = p - t.b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return t.b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return t.a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - t.c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return t.c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return t.a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return t.b + (t.c - t.b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return t.a + ab * (vb * denom) + ac * (vc * denom);
}

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
};

// Bounding-volume hierarchy over a triangle list. Nodes are stored flat;
// leaves reference a contiguous range of `order_`.
class Bvh {
 public:
  Bvh() = default;

  explicit Bvh(const std::vector<Triangle>& tris) {
    order_.resize(tris.size());
    std::iota(order_.begin(), order_.end(), 0u);
    boxes_.reserve(tris.size());
    centroids_.reserve(tris.size());
    for (const auto& t : tris) {
      Aabb b = t.bounds();
      // Pad so the slab test never rejects a box that Möller–Trumbore would hit.
      const double pad = 1e-9 * (1.0 + b.extent().maxCoeff() + b.max.cwiseAbs().maxCoeff());
      boxes_.push_back(b.expanded(pad));
      centroids_.push_back(t.centroid());
    }
    if (!tris.empty()) {
      nodes_.reserve(2 * tris.size());
      nodes_.push_back({});
      fill(0, 0, static_cast<std::uint32_t>(tris.size()));
    }
    boxes_.clear();
    boxes_.shrink_to_fit();
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  // Nearest hit with t in [t_min, t_max].
  std::optional<RayHit> intersect(const std::vector<Triangle>& tris, const Vec3& origin, const Vec3& dir,
                                  double t_min, double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
    std::optional<RayHit> best;
    double best_t = t_max;
    std::array<std::uint32_t, 64> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (!slab(n.box, origin, inv, t_min, best_t)) continue;
      if (n.count > 0) {
        for (std::uint32_t k = n.first; k < n.first + n.count; ++k) {
          const std::uint32_t ti = order_[k];
          const auto t = intersect_triangle(origin, dir, tris[ti]);
          if (t && *t >= t_min && *t <= best_t) {
            // Equal-t ties resolve to the lower triangle index so results do
            // not depend on traversal order.
            if (!best || *t < best_t || ti < best->triangle) {
              best = RayHit{*t, ti};
              best_t = *t;
            }
          }
        }
      } else {
        stack[top++] = n.first;
        stack[top++] = n.first + 1;
      }
    }
    return best;
  }

  // Distance from p to the closest triangle (infinity for an empty hierarchy).
  double closest_distance(const std::vector<Triangle>& tris, const Vec3& p, std::uint32_t* which = nullptr) const {
    double best2 = std::numeric_limits<double>::infinity();
    if (nodes_.empty()) return best2;
    std::array<std::uint32_t, 64> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (n.box.squared_distance(p) > best2) continue;
      if (n.count > 0) {
        for (std::uint32_t k = n.first; k < n.first + n.count; ++k) {
          const std::uint32_t ti = order_[k];
          const double d2 = (closest_point_on_triangle(p, tris[ti]) - p).squaredNorm();
          if (d2 < best2) {
            best2 = d2;
            if (which) *which = ti;
          }
        }
      } else {
        const Node& l = nodes_[n.first];
        const Node& r = nodes_[n.first + 1];
        // Visit the nearer child first.
        if (l.box.squared_distance(p) < r.box.squared_distance(p)) {
          stack[top++] = n.first + 1;
          stack[top++] = n.first;
        } else {
          stack[top++] = n.first;
          stack[top++] = n.first + 1;
        }
      }
    }
    return std::sqrt(best2);
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // child index (inner) or order_ offset (leaf)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  static constexpr std::uint32_t kLeafSize = 4;

  static bool slab(const Aabb& b, const Vec3& o, const Vec3& inv, double t0, double t1) {
    for (int a = 0; a < 3; ++a) {
      double tn = (b.min[a] - o[a]) * inv[a];
      double tf = (b.max[a] - o[a]) * inv[a];
      if (std::isnan(tn) || std::isnan(tf)) {
        // Ray parallel to the slab and origin on its plane.
        if (o[a] < b.min[a] || o[a] > b.max[a]) return false;
        continue;
      }
      if (tn > tf) std::swap(tn, tf);
      t0 = std::max(t0, tn);
      t1 = std::min(t1, tf);
      if (t0 > t1) return false;
    }
    return true;
  }

  void build_children(std::uint32_t parent, std::uint32_t first, std::uint32_t mid, std::uint32_t count) {
    const auto l = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[parent].first = l;
    fill(l, first, mid - first);
    fill(l + 1, mid, first + count - mid);
  }

  void fill(std::uint32_t idx, std::uint32_t first, std::uint32_t count) {
    Aabb box = Aabb::empty();
    Aabb cbox = Aabb::empty();
    for (std::uint32_t k = first; k < first + count; ++k) {
      box.grow(boxes_[order_[k]]);
      cbox.grow(centroids_[order_[k]]);
    }
    nodes_[idx].box = box;
    if (count <= kLeafSize) {
      nodes_[idx].first = first;
      nodes_[idx].count = count;
      return;
    }
    int axis = 0;
    cbox.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t x, std::uint32_t y) {
                       const double cx = centroids_[x][axis], cy = centroids_[y][axis];
                       return cx < cy || (cx == cy && x < y);
                     });
    build_children(idx, first, mid, count);
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Aabb> boxes_;
  std::vector<Vec3> centroids_;
};

// Immutable ground-truth triangle scene with a BVH.
class SceneModel {
 public:
  SceneModel() = default;

  // Validates faces (nonzero area) and vertex containment. When `declared`
  // is empty the bounds are the vertex AABB.
  explicit SceneModel(std::vector<Triangle> tris, std::optional<Aabb> declared = std::nullopt)
      : tris_(std::move(tris)) {
    if (tris_.empty()) throw Error("scene has zero triangles");
    Aabb vb = Aabb::empty();
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      if (!(tris_[i].area() > kMinArea)) throw Error("face " + std::to_string(i) + " has zero area");
      vb.grow(tris_[i].bounds());
    }
    bounds_ = declared.value_or(vb);
    if (declared) {
      const double tol = 1e-9 * (1.0 + declared->diagonal());
      if (!(vb.min.array() >= declared->min.array() - tol).all() ||
          !(vb.max.array() <= declared->max.array() + tol).all())
        throw Error("scene vertices exceed the declared bounds");
    }
    bvh_ = Bvh(tris_);
  }

  static constexpr double kMinArea = 1e-12;

  const std::vector<Triangle>& triangles() const { return tris_; }
  std::size_t triangle_count() const { return tris_.size(); }
  const Aabb& bounds() const { return bounds_; }

  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
    return bvh_.intersect(tris_, origin, dir, t_min, t_max);
  }

  double closest_distance(const Vec3& p) const { return bvh_.closest_distance(tris_, p); }

  // True when a sphere of radius `clearance` swept from a to b touches the mesh.
  bool segment_blocked(const Vec3& a, const Vec3& b, double clearance) const {
    const Vec3 d = b - a;
    const double len = d.norm();
    if (len > 0.0) {
      const Vec3 dir = d / len;
      if (intersect(a, dir, 0.0, len)) return true;
    }
    const double step = std::max(clearance * 0.5, 1e-3);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
      if (closest_distance(a + d * (static_cast<double>(i) / n)) < clearance) return true;
    }
    return false;
  }

 private:
  std::vector<Triangle> tris_;
  Aabb bounds_;
  Bvh bvh_;
};

// ---------------------------------------------------------------------------
// ASCII mesh I/O (Wavefront OBJ subset: `v` and `f` records).

enum class MeshFormat { AsciiMesh };

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline std::vector<Triangle> parse_obj(std::istream& in, const std::string& name = "<stream>") {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError(name, lineno, "malformed vertex record");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<std::size_t> idx;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long long k = 0;
        try {
          std::size_t used = 0;
          k = std::stoll(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          throw ParseError(name, lineno, "bad face index '" + tok + "'");
        }
        if (k < 0) k += static_cast<long long>(verts.size()) + 1;
        if (k < 1 || k > static_cast<long long>(verts.size()))
          throw ParseError(name, lineno, "face index " + head + " out of range");
        idx.push_back(static_cast<std::size_t>(k - 1));
      }
      if (idx.size() < 3) throw ParseError(name, lineno, "face needs at least 3 vertices");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) tris.push_back({verts[idx[0]], verts[idx[i]], verts[idx[i + 1]]});
    } else if (tag == "vn" || tag == "vt" || tag == "vp" || tag == "o" || tag == "g" || tag == "s" ||
               tag == "usemtl" || tag == "mtllib" || tag == "l") {
      continue;
    } else {
      throw ParseError(name, lineno, "unknown record '" + tag + "'");
    }
  }
  return tris;
}

inline SceneModel load_scene(const std::string& path, MeshFormat = MeshFormat::AsciiMesh) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file '" + path + "'");
  return SceneModel(parse_obj(in, path));
}

inline void write_obj(std::ostream& out, const SceneModel& scene) {
  out << "# " << scene.triangle_count() << " triangles\n" << std::setprecision(17);
  for (const auto& t : scene.triangles())
    for (const Vec3* v : {&t.a, &t.b, &t.c}) out << "v " << v->x() << ' ' << v->y() << ' ' << v->z() << '\n';
  for (std::size_t i = 0; i < scene.triangle_count(); ++i)
    out << "f " << 3 * i + 1 << ' ' << 3 * i + 2 << ' ' << 3 * i + 3 << '\n';
}

// ---------------------------------------------------------------------------
// Procedural scenes.

enum class SceneKind { RoomWithPillars, Courtyard, TwoRoomCorridor };

inline std::optional<SceneKind> parse_scene_kind(std::string_view s) {
  if (s == "room-with-pillars") return SceneKind::RoomWithPillars;
  if (s == "courtyard") return SceneKind::Courtyard;
  if (s == "two-room-corridor") return SceneKind::TwoRoomCorridor;
  return std::nullopt;
}

inline const char* to_string(SceneKind k) {
  switch (k) {
    case SceneKind::RoomWithPillars: return "room-with-pillars";
    case SceneKind::Courtyard: return "courtyard";
    case SceneKind::TwoRoomCorridor: return "two-room-corridor";
  }
  return "?";
}

// A generated scene plus the canonical start pose and, for multi-volume
// layouts, the declared room/corridor boxes.
struct GeneratedScene {
  SceneModel scene;
  Pose start;
  std::vector<Aabb> rooms;
  std::vector<Aabb> corridors;
};

namespace detail {

class MeshBuilder {
 public:
  void quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    tris_.push_back({a, b, c});
    tris_.push_back({a, c, d});
  }

  // Axis-aligned rectangle in the plane `axis = value`, spanning [lo, hi] in
  // the two remaining axes.
  void rect(int axis, double value, Eigen::Vector2d lo, Eigen::Vector2d hi) {
    if (!(hi.x() - lo.x() > 1e-9 && hi.y() - lo.y() > 1e-9)) return;
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    auto pt = [&](double a, double b) {
      Vec3 p;
      p[axis] = value;
      p[u] = a;
      p[v] = b;
      return p;
    };
    quad(pt(lo.x(), lo.y()), pt(hi.x(), lo.y()), pt(hi.x(), hi.y()), pt(lo.x(), hi.y()));
  }

  // Rectangle with rectangular holes; holes must not overlap. Implemented by
  // splitting along the u axis at hole edges.
  void rect_with_holes(int axis, double value, Eigen::Vector2d lo, Eigen::Vector2d hi,
                       const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>& holes) {
    std::vector<double> cuts{lo.x(), hi.x()};
    for (const auto& [hl, hh] : holes) {
      cuts.push_back(std::clamp(hl.x(), lo.x(), hi.x()));
      cuts.push_back(std::clamp(hh.x(), lo.x(), hi.x()));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double u0 = cuts[i], u1 = cuts[i + 1], um = 0.5 * (u0 + u1);
      std::vector<std::pair<double, double>> blocked;
      for (const auto& [hl, hh] : holes)
        if (um > hl.x() && um < hh.x()) blocked.emplace_back(std::max(hl.y(), lo.y()), std::min(hh.y(), hi.y()));
      std::sort(blocked.begin(), blocked.end());
      double v = lo.y();
      for (const auto& [b0, b1] : blocked) {
        rect(axis, value, {u0, v}, {u1, b0});
        v = std::max(v, b1);
      }
      rect(axis, value, {u0, v}, {u1, hi.y()});
    }
  }

  // Closed axis-aligned box.
  void box(const Vec3& lo, const Vec3& hi) {
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      rect(axis, lo[axis], {lo[u], lo[v]}, {hi[u], hi[v]});
      rect(axis, hi[axis], {lo[u], lo[v]}, {hi[u], hi[v]});
    }
  }

  // Open box interior: floor, ceiling (optional), and four walls.
  void room(const Vec3& lo, const Vec3& hi, bool ceiling = true) {
    rect(2, lo.z(), {lo.x(), lo.y()}, {hi.x(), hi.y()});
    if (ceiling) rect(2, hi.z(), {lo.x(), lo.y()}, {hi.x(), hi.y()});
    rect(0, lo.x(), {lo.y(), lo.z()}, {hi.y(), hi.z()});
    rect(0, hi.x(), {lo.y(), lo.z()}, {hi.y(), hi.z()});
    rect(1, lo.y(), {lo.z(), lo.x()}, {hi.z(), hi.x()});
    rect(1, hi.y(), {lo.z(), lo.x()}, {hi.z(), hi.x()});
  }

  std::vector<Triangle> take() { return std::move(tris_); }

 private:
  std::vector<Triangle> tris_;
};

}  // namespace detail

inline GeneratedScene generate_scene(SceneKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(kind) + 1);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  detail::MeshBuilder mb;

  switch (kind) {
    case SceneKind::RoomWithPillars: {
      const Vec3 lo(0, 0, 0), hi(6.0, 5.0, 2.5);
      mb.room(lo, hi);
      const Vec3 start(1.0, 2.5, 1.2);
      std::vector<Vec3> placed;
      const int pillars = 4 + static_cast<int>(rng() % 2);
      int attempts = 0;
      while (static_cast<int>(placed.size()) < pillars && attempts++ < 1000) {
        const double half = uni(0.2, 0.35);
        const Vec3 c(uni(1.0, 5.0), uni(0.9, 4.1), 0.0);
        if (Eigen::Vector2d(c.x() - start.x(), c.y() - start.y()).norm() < 1.2) continue;
        bool ok = true;
        for (const auto& p : placed)
          if (Eigen::Vector2d(c.x() - p.x(), c.y() - p.y()).norm() < 1.4) ok = false;
        if (!ok) continue;
        placed.push_back(c);
        mb.box({c.x() - half, c.y() - half, 0.0}, {c.x() + half, c.y() + half, hi.z()});
      }
      // A low table-like block adds non-pillar geometry.
      {
        const Vec3 c(uni(4.2, 5.2), uni(0.7, 1.2), 0.0);
        mb.box({c.x() - 0.4, c.y() - 0.3, 0.0}, {c.x() + 0.4, c.y() + 0.3, 0.75});
      }
      return {SceneModel(mb.take(), Aabb{lo, hi}), Pose::look(start, 0.0, 0.0), {Aabb{lo, hi}}, {}};
    }
    case SceneKind::Courtyard: {
      const Vec3 lo(0, 0, 0), hi(12.0, 12.0, 5.0);
      mb.rect(2, 0.0, {0.0, 0.0}, {12.0, 12.0});
      // Perimeter buildings (closed boxes) with seeded heights and gaps.
      const double depth = 1.5;
      for (int side = 0; side < 4; ++side) {
        double u = 0.0;
        while (u < 12.0 - 1e-9) {
          const double len = std::min(uni(2.5, 4.5), 12.0 - u);
          const double h = uni(2.5, 4.5);
          Vec3 a, b;
          switch (side) {
            case 0: a = {u, 0.0, 0.0}; b = {u + len, depth, h}; break;
            case 1: a = {u, 12.0 - depth, 0.0}; b = {u + len, 12.0, h}; break;
            case 2: a = {0.0, u, 0.0}; b = {depth, u + len, h}; break;
            default: a = {12.0 - depth, u, 0.0}; b = {12.0, u + len, h}; break;
          }
          // Side buildings stop short of the corners already claimed by 0/1.
          if (side >= 2) {
            a.y() = std::max(a.y(), depth);
            b.y() = std::min(b.y(), 12.0 - depth);
          }
          if (b.y() - a.y() > 0.2 && b.x() - a.x() > 0.2) mb.box(a, b);
          u += len;
        }
      }
      // Central statue and a low wall segment.
      mb.box({5.5 + uni(-0.5, 0.5), 6.5 + uni(-0.5, 0.5), 0.0}, {6.3 + uni(-0.3, 0.3), 7.3 + uni(-0.3, 0.3), 2.0});
      mb.box({3.0, 3.0 + uni(0.0, 1.0), 0.0}, {3.3, 4.6 + uni(0.0, 1.0), 1.0});
      const Vec3 start(3.0, 8.5, 1.5);
      return {SceneModel(mb.take(), Aabb{lo, hi}), Pose::look(start, -0.5, 0.0), {Aabb{{depth, depth, 0}, {12 - depth, 12 - depth, 5}}}, {}};
    }
    case SceneKind::TwoRoomCorridor: {
      const double w = uni(3.6, 4.2);
      const double d = uni(3.6, 4.4);
      const double h = 2.5;
      const double clen = uni(1.8, 2.4);
      const double cw = 1.2, ch = 2.1;
      const double cy0 = d / 2 - cw / 2, cy1 = d / 2 + cw / 2;
      const Aabb ra{{0, 0, 0}, {w, d, h}};
      const Aabb co{{w, cy0, 0}, {w + clen, cy1, ch}};
      const Aabb rb{{w + clen, 0, 0}, {2 * w + clen, d, h}};
      for (const Aabb& r : {ra, rb}) {
        mb.rect(2, 0.0, {r.min.x(), r.min.y()}, {r.max.x(), r.max.y()});
        mb.rect(2, h, {r.min.x(), r.min.y()}, {r.max.x(), r.max.y()});
        mb.rect(1, r.min.y(), {0.0, r.min.x()}, {h, r.max.x()});
        mb.rect(1, r.max.y(), {0.0, r.min.x()}, {h, r.max.x()});
      }
      // x-walls; the inner ones carry the doorway. Plane axis 0 spans (y, z).
      const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> door{{{cy0, 0.0}, {cy1, ch}}};
      mb.rect(0, ra.min.x(), {0.0, 0.0}, {d, h});
      mb.rect_with_holes(0, ra.max.x(), {0.0, 0.0}, {d, h}, door);
      mb.rect_with_holes(0, rb.min.x(), {0.0, 0.0}, {d, h}, door);
      mb.rect(0, rb.max.x(), {0.0, 0.0}, {d, h});
      // Corridor tube.
      mb.rect(2, 0.0, {co.min.x(), co.min.y()}, {co.max.x(), co.max.y()});
      mb.rect(2, ch, {co.min.x(), co.min.y()}, {co.max.x(), co.max.y()});
      mb.rect(1, cy0, {0.0, co.min.x()}, {ch, co.max.x()});
      mb.rect(1, cy1, {0.0, co.min.x()}, {ch, co.max.x()});
      // Furniture in each room.
      mb.box({uni(0.6, 1.2), uni(0.4, 0.8), 0.0}, {1.8, 1.6, 0.8});
      mb.box({rb.min.x() + uni(1.6, 2.2), d - 1.6, 0.0}, {rb.max.x() - 0.5, d - uni(0.4, 0.7), 1.2});
      const Aabb bounds{{0, 0, 0}, {2 * w + clen, d, h}};
      const Vec3 start(0.8, d / 2, 1.2);
      return {SceneModel(mb.take(), bounds), Pose::look(start, 0.0, 0.0), {ra, rb}, {co}};
    }
  }
  throw Error("unknown scene kind");
}

}  // namespace covplan
