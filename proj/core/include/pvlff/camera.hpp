// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "pvlff/hash_grid.hpp"

namespace pvlff {

struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  std::size_t width = 0, height = 0;
};

// Axis-aligned scene bounding box in world units.
struct Aabb {
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Ones();

  bool degenerate() const { return ((hi - lo).array() <= 0.0).any(); }
  // Maps world points into the unit cube the encodings expect.
  Point3 normalize(const Point3& p) const { return (p - lo).cwiseQuotient(hi - lo); }
};

struct Ray {
  Point3 origin = Point3::Zero();
  Point3 dir = Point3::UnitZ();  // unit length
  double t_near = 0.0;
  double t_far = 0.0;
  bool valid = false;  // false when the ray misses the scene box
};

// Pinhole rays through pixel centers ((u+0.5, v+0.5) in pixel coordinates,
// +z camera forward); t range from slab intersection with `bbox`. `pixels`
// holds row-major pixel indices v*width+u.
std::vector<Ray> generate_rays(const Eigen::Matrix4d& cam_to_world, const CameraIntrinsics& intr,
                               const std::vector<std::size_t>& pixels, const Aabb& bbox);

// Camera-to-world pose looking from `eye` toward `target`.
Eigen::Matrix4d look_at(const Point3& eye, const Point3& target, const Point3& up);

// Stratified / midpoint sampling along the ray's [t_near, t_far].
struct RaySampleSet {
  std::vector<double> ts;      // increasing positions along the ray
  std::vector<double> deltas;  // spacing; last entry is the bin width
};

RaySampleSet sample_ray(const Ray& ray, std::size_t n, bool stratified, Rng& rng);

}  // namespace pvlff
