// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvlff/hdbscan.hpp"
#include "pvlff/tensor.hpp"

namespace pvlff {

// Open-vocabulary semantic assignment, instance segmentation, majority-vote
// denoising, and panoptic fusion over rendered feature maps (or feature
// vectors queried at 3D points).

// One queryable class: a name, a thing/stuff flag, and the text-encoder
// embedding supplied externally (for synthetic scenes, the generator's
// per-class unit vectors).
struct PromptClass {
  std::string name;
  bool thing = false;
  Tensor embedding;  // 1 x C_S
};

struct PromptSet {
  std::vector<PromptClass> classes;

  std::size_t size() const { return classes.size(); }
  std::size_t embed_width() const;
  // Nonempty, unique nonempty names, equal widths, nonzero finite
  // embeddings; throws DataError otherwise.
  void validate() const;
};

// Text format, one class per line:
//   name thing|stuff v1 v2 ... vC
// Names are single whitespace-free tokens; blank lines and lines starting
// with '#' are skipped. Errors name the offending line.
PromptSet parse_prompts(std::istream& in);
PromptSet read_prompts_file(const std::string& path);
void write_prompts(std::ostream& out, const PromptSet& prompts);
void write_prompts_file(const std::string& path, const PromptSet& prompts);

// Per-pixel/point class decision: cosine similarity against every prompt,
// argmax with ties toward the lowest class id. A zero-norm feature row has
// no direction, so the pixel is marked invalid (class id 0, similarity 0).
struct SemanticAssignment {
  std::vector<std::uint32_t> class_ids;
  std::vector<double> similarities;  // cosine of the winning class
  std::vector<char> valid;
};
SemanticAssignment assign_semantics(const Tensor& features, const PromptSet& prompts);

// Instance segmentation of feature rows by HDBSCAN over the L2-normalized
// valid rows, excess-of-mass extraction, and nearest-centroid noise
// reassignment. Ids are dense 1..K over valid rows; invalid rows get 0.
// Fewer valid rows than min_samples + 1 (or zero extracted clusters) fall
// back to a single instance spanning every valid row. The condensed tree is
// returned for multi-granularity cuts; its point indices are positions in
// `tree_sources`, which maps them back to input rows.
struct InstanceSegmentation {
  std::vector<std::uint32_t> instance_ids;
  CondensedTree tree;
  std::vector<std::uint32_t> tree_sources;
};
InstanceSegmentation segment_instances(const Tensor& features, const std::vector<char>& valid,
                                       const HdbscanConfig& config);

// Majority-vote denoising: within each instance segment (id > 0), every
// valid pixel takes the segment's modal class, ties toward the lowest class
// id. Pixels with id 0 or invalid pixels keep their class. Idempotent.
std::vector<std::uint32_t> denoise_semantics(const std::vector<std::uint32_t>& class_ids,
                                             const std::vector<std::uint32_t>& instance_ids,
                                             const std::vector<char>& valid);

// Joint semantic + instance labeling. Instance id 0 marks stuff regions (or
// a thing pixel with no instance); ids of thing classes are densified per
// class, so a segment's scene identity is the (class id, instance id) pair.
struct PanopticMap {
  std::size_t width = 0;
  std::size_t height = 0;  // 1 for 3D point sets
  std::vector<std::uint32_t> class_ids;
  std::vector<std::uint32_t> instance_ids;
  std::vector<char> valid;

  std::size_t size() const { return class_ids.size(); }
};

// Fusion rules: each instance segment takes its modal class; segments whose
// modal class is stuff lose their id; a pixel keeps the (re-densified,
// per-class) id only when its own class equals the segment's modal thing
// class, so the output satisfies the PanopticMap invariants for any input.
// Thing ids are renumbered 1..K per class in ascending original-id order.
// An empty `valid` means all pixels are valid.
PanopticMap fuse_panoptic(const std::vector<std::uint32_t>& class_ids,
                          const std::vector<std::uint32_t>& instance_ids,
                          const PromptSet& prompts, const std::vector<char>& valid,
                          std::size_t width, std::size_t height);

}  // namespace pvlff
