// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvlff/mask.hpp"
#include "pvlff/rng.hpp"
#include "pvlff/scene.hpp"

namespace pvlff {

// Analytic scene description. Rendering is exact ray-primitive
// intersection; overlapping primitives resolve by nearest hit.
struct Primitive {
  enum class Shape { kSphere, kBox };
  Shape shape = Shape::kSphere;
  Point3 center = Point3::Zero();
  Point3 size = Point3::Ones();  // sphere: size.x() is the radius; box: full edge lengths
  std::uint32_t class_id = 0;
  std::uint32_t instance_id = 0;      // > 0 for thing classes, 0 for stuff
  std::uint32_t parent_instance = 0;  // > 0 marks this primitive as a part of that object
};

// Cameras on a circle of `radius` around `target`, lifted by `height`, all
// looking at the target.
struct CameraOrbit {
  Point3 target = Point3::Zero();
  double radius = 2.5;
  double height = 1.2;
  std::size_t views = 24;
  double fov_deg = 60.0;  // horizontal field of view
};

// SAM-like proposal corruption: per instance and frame independently, drop
// everything, or cut along a random straight line into two parts (emitting
// the whole mask too when multi_level), then erode every emitted mask.
struct MaskCorruption {
  double split_prob = 0.0;
  double drop_prob = 0.0;
  std::uint32_t erosion_radius = 0;  // square structuring element half-width
  bool multi_level = false;

  void validate() const;
};

struct ClassSpec {
  std::string name;
  bool thing = true;
};

struct SyntheticSceneSpec {
  std::size_t width = 64, height = 64;
  std::size_t embed_width = 16;  // C_S; must fit one unit axis per class
  Aabb bbox;
  std::vector<ClassSpec> classes;  // index 0 is the background and must be stuff
  std::vector<Primitive> primitives;
  CameraOrbit orbit;
  double embed_noise = 0.0;  // sigma of the Gaussian added to class vectors
  MaskCorruption corruption;

  void validate() const;
};

// Pixels surviving erosion by `radius` (all 8-neighbourhood squares of that
// half-width fully inside the mask and the image). Input sorted, output
// sorted.
std::vector<std::uint32_t> erode_pixels(const std::vector<std::uint32_t>& sorted_pixels,
                                        std::size_t width, std::size_t height,
                                        std::uint32_t radius);

// Corrupted per-frame proposals from a ground-truth instance map. Instances
// are visited in ascending id order; emitted proposals get per-frame local
// ids 1..K (parts before the optional whole). Masks emptied by erosion are
// skipped.
std::vector<MaskProposal> corrupt_masks(const std::vector<std::uint32_t>& gt_instance,
                                        std::size_t width, std::size_t height,
                                        const MaskCorruption& config, std::uint32_t frame,
                                        Rng& rng);

// Renders the spec into an in-memory scene: RGB (per-object base colors,
// headlight Lambert shading), ray-distance depth, ground-truth class and
// instance maps (parts carry their object's id), noisy unit embeddings, and
// corrupted mask proposals (plus per-part masks when multi_level is set).
// Deterministic per (spec, seed); frames render in parallel.
Scene generate_scene(const SyntheticSceneSpec& spec, std::uint64_t seed);

// generate_scene + save_scene.
void generate_scene_dir(const SyntheticSceneSpec& spec, std::uint64_t seed,
                        const std::string& out_dir);

}  // namespace pvlff
