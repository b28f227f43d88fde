// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvlff/camera.hpp"
#include "pvlff/mask.hpp"
#include "pvlff/tensor.hpp"

namespace pvlff {

// One entry of the scene's class table. The embedding is the ground-truth
// vision-language vector queries are matched against (unit length).
struct ClassInfo {
  std::string name;
  bool thing = false;  // false = stuff (amorphous region, no instance ids)
  Tensor embedding;    // 1 x C_S
};

// One posed RGB-D frame with its distillation targets and mask proposals.
// All rasters are row-major over H*W pixels.
struct Frame {
  Eigen::Matrix4d cam_to_world = Eigen::Matrix4d::Identity();
  Tensor rgb;                         // (H*W) x 3 in [0,1]
  Tensor depth;                       // (H*W) x 1, world units
  std::vector<bool> depth_valid;      // false where no surface was hit
  Tensor embed;                       // (H*W) x C_S
  std::vector<MaskProposal> proposals;
  std::vector<std::uint32_t> gt_class;     // class table index per pixel
  std::vector<std::uint32_t> gt_instance;  // 0 = no instance (stuff)
};

// Generator settings echoed into the manifest so a scene documents how it
// was produced. Pure provenance: nothing downstream branches on it.
struct SceneProvenance {
  double embed_noise = 0.0;
  double split_prob = 0.0;
  double drop_prob = 0.0;
  std::uint32_t erosion_radius = 0;
  bool multi_level = false;
};

struct Scene {
  std::size_t width = 0, height = 0;
  CameraIntrinsics intrinsics;
  Aabb bbox;
  std::size_t embed_width = 0;  // C_S
  std::uint64_t seed = 0;       // generator provenance
  SceneProvenance provenance;
  std::vector<ClassInfo> classes;
  std::vector<Frame> frames;

  std::size_t pixel_count() const { return width * height; }
};

}  // namespace pvlff
