// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pvlff/inference.hpp"

namespace pvlff {

// Quantitative evaluation of semantic / instance / panoptic predictions
// against ground truth. Ignored pixels are removed before any counting or
// matching; pixels invalid in either panoptic map are treated the same way.

// Per-class IoU = TP/(TP+FP+FN) and recall; means over the classes present
// in prediction or ground truth (classes absent from both are excluded; a
// class predicted but absent from ground truth contributes recall 0).
struct SemanticMetrics {
  bool defined = false;  // false when no pixels or no classes survive
  double miou = 0.0;
  double macc = 0.0;
  std::map<std::uint32_t, double> class_iou;
  std::map<std::uint32_t, double> class_acc;
};

// `class_set` restricts the candidate classes (empty = every class observed
// in either map). `ignore` pixels (nonzero entries) are excluded everywhere;
// empty means none.
SemanticMetrics miou_macc(const std::vector<std::uint32_t>& pred,
                          const std::vector<std::uint32_t>& gt,
                          const std::vector<char>& ignore = {},
                          const std::vector<std::uint32_t>& class_set = {});

// Panoptic quality. Segments are the (class id, instance id) groups of each
// map — stuff regions are the id-0 segment of their class. Within each
// class, segments match when IoU > 0.5 (unique by the standard argument);
// PQ = sum of matched IoU / (TP + FP/2 + FN/2), averaged over the classes
// present in either map.
struct ClassPanoptic {
  double pq = 0.0;
  double sq = 0.0;  // matched IoU / TP
  double rq = 0.0;  // TP / (TP + FP/2 + FN/2)
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double iou_sum = 0.0;
};

struct PanopticMetrics {
  bool defined = false;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  std::map<std::uint32_t, ClassPanoptic> per_class;
};

PanopticMetrics panoptic_quality(const PanopticMap& pred, const PanopticMap& gt,
                                 const std::vector<char>& ignore = {});

// Scene-level PQ: concatenates the frames' pixels, which merges the segments
// sharing a (class id, instance id) — ids must be scene-consistent across
// frames — and computes PQ once on the merged segmentation.
PanopticMetrics pq_scene(const std::vector<PanopticMap>& pred_frames,
                         const std::vector<PanopticMap>& gt_frames,
                         const std::vector<std::vector<char>>& ignore = {});

// Instance coverage: for every ground-truth instance (id > 0), the best IoU
// over predicted instances. mCov is the plain mean; mWCov weights each
// instance by its share of the ground-truth instance pixels.
struct CoverageMetrics {
  bool defined = false;  // false when the ground truth has no instances
  double mcov = 0.0;
  double mwcov = 0.0;
};

CoverageMetrics coverage(const std::vector<std::uint32_t>& pred_instances,
                         const std::vector<std::uint32_t>& gt_instances,
                         const std::vector<char>& ignore = {});

}  // namespace pvlff
