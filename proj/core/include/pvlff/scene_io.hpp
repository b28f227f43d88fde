// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "pvlff/scene.hpp"

namespace pvlff {

// Scene directory layout:
//   manifest.json                 resolution, intrinsics, bbox, class table,
//                                 pose file references, seed + noise provenance
//   poses/pose_NNNN.txt           4x4 camera-to-world, row-major text
//   rgb/frame_NNNN.png            8-bit RGB
//   depth/frame_NNNN.pvfm         f32 ray-distance map
//   depth/valid_NNNN.pvfm         u8, 1 where a surface was hit
//   embed/frame_NNNN.pvfm         f32 H x W x C_S distillation targets
//   masks/frame_NNNN.msk          RLE instance mask proposals
//   gt_class/frame_NNNN.pvfm      u16 class table indices
//   gt_instance/frame_NNNN.pvfm   u16 instance ids (0 = none)
//
// save_scene -> load_scene round trips every raster exactly: RGB is stored
// at u8 precision and depth/embed at f32, so scenes must hold values already
// quantized to those grids (the generator does).
void save_scene(const std::string& dir, const Scene& scene);

// Validates everything it loads: manifest fields, pose orthonormality,
// raster dimensions, id ranges, and thing-instance/class consistency across
// frames. Errors name the offending file and field.
Scene load_scene(const std::string& dir);

}  // namespace pvlff
