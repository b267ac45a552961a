#pragma once

#include <vector>

#include "covplan/geometry.hpp"
#include "covplan/parallel.hpp"
#include "covplan/scene.hpp"

namespace covplan {

// Simulated depth sensor: first hit along each pixel's central ray with
// t in [near, far], measured as Euclidean distance from the camera center.
inline DepthImage render_depth_gt(const SceneModel& scene, const Pose& pose, const CameraModel& cam) {
  DepthImage img(cam.width, cam.height);
  const Mat3 r = pose.rotation();
  global_pool().parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = r * cam.pixel_ray(u, v);
      if (const auto hit = scene.intersect(pose.position, dir, cam.near, cam.far)) img.at(u, v) = hit->t;
    }
  });
  return img;
}

// World-frame points for every valid pixel, row-major order.
inline std::vector<Vec3> backproject(const DepthImage& depth, const Pose& pose, const CameraModel& cam) {
  std::vector<Vec3> pts;
  pts.reserve(depth.valid_count());
  const Mat3 r = pose.rotation();
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u)
      if (depth.valid(u, v)) pts.push_back(pose.position + r * cam.pixel_ray(u, v) * depth.at(u, v));
  return pts;
}

}  // namespace covplan
