#pragma once

#include <covplan/covplan.hpp>

namespace covtest {

using namespace covplan;

// Closed box room [lo, hi] with inward-visible walls.
inline SceneModel box_room(const Vec3& lo = {0, 0, 0}, const Vec3& hi = {4, 3, 2.5}) {
  detail::MeshBuilder mb;
  mb.room(lo, hi);
  return SceneModel(mb.take(), Aabb{lo, hi});
}

// A single square wall in the plane x = x0 spanning +-half in y and z.
inline SceneModel wall_x(double x0, double half) {
  std::vector<Triangle> t;
  const Vec3 a(x0, -half, -half), b(x0, half, -half), c(x0, half, half), d(x0, -half, half);
  t.push_back({a, b, c});
  t.push_back({a, c, d});
  return SceneModel(t);
}

// Unit cube [0,1]^3, 12 triangles, as OBJ text.
inline std::string unit_cube_obj() {
  return "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
         "f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n"
         "f 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";
}

// Brute-force nearest ray hit over every triangle.
inline std::optional<double> brute_force_hit(const std::vector<Triangle>& tris, const Vec3& o, const Vec3& d,
                                             double t0, double t1) {
  std::optional<double> best;
  for (const auto& tri : tris)
    if (auto t = intersect_triangle(o, d, tri))
      if (*t >= t0 && *t <= t1 && (!best || *t < *best)) best = t;
  return best;
}

inline double brute_force_distance(const std::vector<Triangle>& tris, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : tris) best = std::min(best, (closest_point_on_triangle(p, tri) - p).norm());
  return best;
}

}  // namespace covtest
