// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/camera.hpp"

#include <cmath>

#include "pvlff/errors.hpp"

namespace pvlff {

namespace {

// First sample distance: rays never start exactly at the camera plane.
constexpr double kMinNear = 1e-4;

void check_rotation(const Eigen::Matrix4d& pose) {
  Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-6) {
    throw DataError("generate_rays: pose rotation is not orthonormal (error " +
                    std::to_string(err) + ")");
  }
}

}  // namespace

std::vector<Ray> generate_rays(const Eigen::Matrix4d& cam_to_world, const CameraIntrinsics& intr,
                               const std::vector<std::size_t>& pixels, const Aabb& bbox) {
  if (intr.fx <= 0.0 || intr.fy <= 0.0) {
    throw ConfigError("generate_rays: focal lengths must be positive");
  }
  PVLFF_CHECK(!bbox.degenerate(), "generate_rays: degenerate scene box");
  check_rotation(cam_to_world);
  Eigen::Matrix3d rot = cam_to_world.topLeftCorner<3, 3>();
  Point3 origin = cam_to_world.topRightCorner<3, 1>();

  std::vector<Ray> rays(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    std::size_t u = pixels[i] % intr.width;
    std::size_t v = pixels[i] / intr.width;
    PVLFF_CHECK(v < intr.height, "generate_rays: pixel index out of range");
    Point3 cam_dir((static_cast<double>(u) + 0.5 - intr.cx) / intr.fx,
                   (static_cast<double>(v) + 0.5 - intr.cy) / intr.fy, 1.0);
    Ray& ray = rays[i];
    ray.origin = origin;
    ray.dir = (rot * cam_dir).normalized();

    // Slab intersection with the scene box.
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (std::abs(ray.dir[a]) < 1e-12) {
        if (ray.origin[a] < bbox.lo[a] || ray.origin[a] > bbox.hi[a]) {
          t_enter = std::numeric_limits<double>::infinity();
          break;
        }
        continue;
      }
      double t0 = (bbox.lo[a] - ray.origin[a]) / ray.dir[a];
      double t1 = (bbox.hi[a] - ray.origin[a]) / ray.dir[a];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
    }
    ray.t_near = std::max(t_enter, kMinNear);
    ray.t_far = t_exit;
    ray.valid = ray.t_far > ray.t_near;
  }
  return rays;
}

Eigen::Matrix4d look_at(const Point3& eye, const Point3& target, const Point3& up) {
  Point3 forward = (target - eye).normalized();
  Point3 right = forward.cross(up);
  if (right.norm() < 1e-8) right = forward.cross(Point3::UnitX());  // gaze parallel to up
  right.normalize();
  // +y down to match the pixel-space convention (v grows downward).
  Point3 down = forward.cross(right);
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
  pose.block<3, 1>(0, 0) = right;
  pose.block<3, 1>(0, 1) = down;
  pose.block<3, 1>(0, 2) = forward;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

RaySampleSet sample_ray(const Ray& ray, std::size_t n, bool stratified, Rng& rng) {
  PVLFF_CHECK(n >= 2, "sample_ray: need at least 2 samples");
  PVLFF_CHECK(ray.t_near < ray.t_far, "sample_ray: empty t range");
  double width = (ray.t_far - ray.t_near) / static_cast<double>(n);
  RaySampleSet s;
  s.ts.resize(n);
  s.deltas.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double jitter = stratified ? rng.uniform() : 0.5;
    s.ts[k] = ray.t_near + (static_cast<double>(k) + jitter) * width;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) s.deltas[k] = s.ts[k + 1] - s.ts[k];
  s.deltas[n - 1] = width;
  return s;
}

}  // namespace pvlff
