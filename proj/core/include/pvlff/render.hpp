// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "pvlff/camera.hpp"
#include "pvlff/field_model.hpp"
#include "pvlff/graph.hpp"

namespace pvlff {

// Opacity below which the expected-depth estimate is meaningless.
constexpr double kDepthOpacityFloor = 0.05;

// Compositing weights w_i = T_i (1 - exp(-sigma_i delta_i)) with
// T_1 = 1, T_i = exp(-sum_{j<i} sigma_j delta_j).
std::vector<double> transmittance(const std::vector<double>& sigmas,
                                  const std::vector<double>& deltas);

// Differentiable weights for a batch of rays with a common sample count:
// sigma is (R*S) x 1 in ray-major order; returns weights of the same shape.
NodeId render_weights(NodeId sigma, const std::vector<double>& deltas,
                      std::size_t samples_per_ray, CompGraph& g);

// Per-ray weighted feature sums: weights (R*S) x 1, features (R*S) x C
// -> R x C with row r = sum_i w_i f_i over ray r's samples.
NodeId render_accumulate(NodeId weights, NodeId features, std::size_t samples_per_ray,
                         CompGraph& g);

// Which channels a render pass should produce.
struct RenderChannels {
  bool color = false;
  bool depth = false;
  bool semantic = false;
  bool instance = false;
};

// Graph handles for one rendered batch. Channel ids are kNone when the
// channel was not requested.
struct RenderBatch {
  static constexpr NodeId kNone = -1;
  std::size_t n_rays = 0;
  std::size_t samples_per_ray = 0;
  NodeId weights = kNone;    // (R*S) x 1
  NodeId opacity = kNone;    // R x 1
  NodeId color = kNone;      // R x 3
  NodeId depth = kNone;      // R x 1; sum(w t)/max(opacity, floor)
  NodeId semantic = kNone;   // R x C_S
  NodeId instance = kNone;   // R x C_I
  std::vector<bool> depth_valid;  // opacity above the floor
};

// Renders every requested channel for the rays through one recorded graph.
// Sample positions are mapped into the unit cube via `bbox` before querying
// the field; ts/depths stay in world units.
RenderBatch render_rays(const FieldModel& model, const std::vector<Ray>& rays,
                        const std::vector<RaySampleSet>& samples, const Aabb& bbox,
                        const RenderChannels& channels, CompGraph& g);

// Single-ray convenience wrapper with plain values.
struct RenderOutput {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double depth = 0.0;
  bool depth_valid = false;
  Tensor semantic;
  Tensor instance;
  std::vector<double> weights;
  double opacity = 0.0;
};

RenderOutput render_ray(const FieldModel& model, const Ray& ray, const RaySampleSet& samples,
                        const Aabb& bbox, CompGraph& g);

}  // namespace pvlff
