// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pvlff/inference.hpp"
#include "pvlff/metrics.hpp"
#include "pvlff/render.hpp"
#include "pvlff/scene.hpp"
#include "pvlff/trainer.hpp"

namespace pvlff {

// Full-frame deterministic rendering and scene-level segmentation built on
// the per-ray primitives: the pieces the command-line pipeline and the
// end-to-end tests drive.

// One frame rendered at every pixel center with midpoint sampling (no
// jitter, so output depends only on the checkpoint). Rays that miss the
// scene box leave zero rows and invalid depth.
struct FrameRender {
  Tensor color;               // (H*W) x 3 when requested
  std::vector<double> depth;  // expected ray parameter
  std::vector<char> depth_valid;
  Tensor semantic;  // (H*W) x C_S when requested
  Tensor instance;  // (H*W) x C_I when requested
};

FrameRender render_frame(const FieldModel& model, ParamStore& params, const Scene& scene,
                         std::size_t frame_index, const RenderChannels& channels,
                         std::size_t samples_per_ray, std::size_t chunk_rays = 512);

struct SegmentOptions {
  HdbscanConfig cluster;
  // Valid pixels clustered directly; everything else joins by nearest
  // cluster centroid, which keeps instance ids consistent across frames.
  std::size_t sample_size = 4096;
  std::size_t samples_per_ray = 32;
  std::uint64_t seed = 0;
};

// Scene-level segmentation: per-frame label rasters sharing one instance id
// space, the fused panoptic maps, and the condensed tree behind the ids.
struct SceneSegmentation {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::vector<std::uint32_t>> raw_class;       // argmax prompt per pixel
  std::vector<std::vector<std::uint32_t>> denoised_class;  // majority vote within instances
  std::vector<std::vector<std::uint32_t>> instances;       // cluster ids, 0 = none
  std::vector<std::vector<char>> valid;                    // rendered feature had a direction
  std::vector<PanopticMap> panoptic;                       // fused output per frame
  CondensedTree tree;  // clustering hierarchy over the sampled rows
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_pixels;  // (frame, pixel) per row
  std::vector<std::uint32_t> sample_labels;                            // cluster id per row
};

SceneSegmentation segment_scene(const FieldModel& model, ParamStore& params, const Scene& scene,
                                const PromptSet& prompts, const SegmentOptions& options,
                                std::ostream* progress = nullptr);

// Scores a segmentation against the scene's ground truth. Pixels the model
// marked invalid are ignored for the semantic and coverage metrics (the
// panoptic metric removes them by definition).
struct SegmentationScores {
  SemanticMetrics raw_semantic;
  SemanticMetrics semantic;  // on the denoised classes
  CoverageMetrics cov;
  PanopticMetrics scene_pq;
};

SegmentationScores score_segmentation(const Scene& scene,
                                      const std::vector<std::vector<std::uint32_t>>& raw_class,
                                      const std::vector<std::vector<std::uint32_t>>& denoised_class,
                                      const std::vector<std::vector<std::uint32_t>>& instances,
                                      const std::vector<std::vector<char>>& valid,
                                      const std::vector<PanopticMap>& panoptic);
SegmentationScores score_segmentation(const Scene& scene, const SceneSegmentation& seg);

// metric,class,value rows; aggregate rows leave the class column empty.
// Undefined metric groups are omitted. Doubles use the shortest decimal
// form that round-trips, so equal scores give byte-equal files.
void write_metrics_csv(std::ostream& out, const SegmentationScores& scores,
                       const std::vector<std::string>& class_names);

// The text form of a prompt set matching a scene's class table.
PromptSet scene_prompts(const Scene& scene);

}  // namespace pvlff
