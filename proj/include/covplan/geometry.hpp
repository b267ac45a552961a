#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace covplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vec3::Constant(inf), Vec3::Constant(-inf)};
  }

  void grow(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  double volume() const {
    const Vec3 e = extent();
    return e.x() * e.y() * e.z();
  }

  bool contains(const Vec3& p, double pad = 0.0) const {
    return (p.array() >= (min.array() + pad)).all() && (p.array() <= (max.array() - pad)).all();
  }

  Aabb expanded(double margin) const {
    return {min - Vec3::Constant(margin), max + Vec3::Constant(margin)};
  }

  // Squared distance from p to the box (0 inside).
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - max);
    return d.squaredNorm();
  }
};

// Rigid camera pose. The orientation maps camera-frame vectors to the world
// frame. Camera frame: x right, y down, z along the optical axis. World frame
// is z-up.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Pose() = default;
  Pose(Vec3 p, Quat q) : position(std::move(p)), orientation(q.normalized()) {}

  // Level-roll pose looking along heading `yaw` (about world z, from +x) with
  // elevation `pitch` (positive looks up). Angles in radians.
  static Pose look(const Vec3& p, double yaw, double pitch) {
    const Vec3 fwd(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch));
    const Vec3 right(std::sin(yaw), -std::cos(yaw), 0.0);
    const Vec3 down = fwd.cross(right);
    Mat3 r;
    r.col(0) = right;
    r.col(1) = down;
    r.col(2) = fwd;
    return Pose(p, Quat(r));
  }

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  Vec3 forward() const { return orientation * Vec3::UnitZ(); }

  double yaw() const {
    const Vec3 f = forward();
    return std::atan2(f.y(), f.x());
  }
  double pitch() const { return std::asin(std::clamp(forward().z(), -1.0, 1.0)); }

  Vec3 to_world(const Vec3& c) const { return orientation * c + position; }
  Vec3 to_camera(const Vec3& w) const { return orientation.conjugate() * (w - position); }

  Pose inverse() const {
    const Quat qi = orientation.conjugate();
    return Pose(qi * (-position), qi);
  }

  Pose operator*(const Pose& o) const {
    return Pose(orientation * o.position + position, orientation * o.orientation);
  }
};

// Pinhole depth camera. Field-of-view angles in degrees, clip planes in meters.
struct CameraModel {
  int width = 64;
  int height = 36;
  double fov_h = 91.6;
  double fov_v = 60.0;
  double near = 0.1;
  double far = 10.0;

  void validate() const {
    if (width < 1 || height < 1) throw Error("camera: width and height must be >= 1");
    if (!(fov_h > 0.0 && fov_h < 180.0)) throw Error("camera: fov_h must lie in (0, 180)");
    if (!(fov_v > 0.0 && fov_v < 180.0)) throw Error("camera: fov_v must lie in (0, 180)");
    if (!(near > 0.0 && near < far)) throw Error("camera: require 0 < near < far");
    if (!std::isfinite(far)) throw Error("camera: far must be finite");
  }

  double fx() const { return 0.5 * width / std::tan(0.5 * deg2rad(fov_h)); }
  double fy() const { return 0.5 * height / std::tan(0.5 * deg2rad(fov_v)); }
  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }
  // Focal length in pixels used for footprint scaling and the depth threshold.
  double focal() const { return fx(); }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  CameraModel with_resolution(int w, int h) const {
    CameraModel c = *this;
    c.width = w;
    c.height = h;
    return c;
  }

  // Unit direction (camera frame) through the center of pixel (u, v).
  Vec3 pixel_ray(int u, int v) const {
    return Vec3((u + 0.5 - cx()) / fx(), (v + 0.5 - cy()) / fy(), 1.0).normalized();
  }

  // Unit direction through an arbitrary image-plane location (pixel units).
  Vec3 image_ray(double px, double py) const {
    return Vec3((px - cx()) / fx(), (py - cy()) / fy(), 1.0).normalized();
  }

  // Continuous image coordinates of a camera-frame point with z > 0.
  Eigen::Vector2d project(const Vec3& c) const {
    return {fx() * c.x() / c.z() + cx(), fy() * c.y() / c.z() + cy()};
  }

  // Pixel containing a camera-frame point, if it lies in front of the camera
  // and inside the image.
  std::optional<std::pair<int, int>> project_to_pixel(const Vec3& c) const {
    if (!(c.z() > 0.0)) return std::nullopt;
    const Eigen::Vector2d p = project(c);
    if (!(p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width && p.y() < height)) return std::nullopt;
    return std::pair{static_cast<int>(p.x()), static_cast<int>(p.y())};
  }
};

// Per-pixel Euclidean (along-ray) depth. Invalid pixels hold kNoDepth.
struct DepthImage {
  static constexpr double kNoDepth = 0.0;

  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, kNoDepth) {}

  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > 0.0; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double d) { return d > 0.0; }));
  }
};

}  // namespace covplan
