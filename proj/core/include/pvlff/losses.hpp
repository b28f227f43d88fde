// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "pvlff/graph.hpp"

namespace pvlff {

// Semantic distillation: mean over rows of ||rendered - target||_1 / C.
NodeId semantic_loss(NodeId rendered, const Tensor& target, CompGraph& g);

// Photometric supervision: mean squared error over all entries.
NodeId photometric_loss(NodeId rendered, const Tensor& target, CompGraph& g);

// L1 depth error averaged over valid pixels only. `valid` marks rows where
// both the target and the render carry a usable depth. With zero valid rows
// the loss is a constant 0 and *valid_count reports it.
NodeId depth_loss(NodeId rendered_depth, const Tensor& target_depth,
                  const std::vector<bool>& valid, CompGraph& g,
                  std::size_t* valid_count = nullptr);

// PointInfoNCE over one anchor row per positive row and `negs_per_anchor`
// negative rows per anchor (negatives row-grouped by anchor):
//   L = mean_a [ logsumexp_k(a.n_k / tau) - a.p / tau ]
// All features are L2-normalized first; positives and negatives are detached
// so gradient reaches anchors only. Can be negative when a.p beats every
// a.n_k.
NodeId contrastive_loss(NodeId anchors, NodeId positives, NodeId negatives,
                        std::size_t negs_per_anchor, double tau, CompGraph& g);

// Mean over anchors of ||feature - center||_1 (full row L1, no width
// normalization); centers are constants. Rows where `has_center` is false
// are skipped; all-skipped gives a constant 0.
NodeId slow_center_loss(NodeId anchor_features, const Tensor& centers,
                        const std::vector<bool>& has_center, CompGraph& g);

}  // namespace pvlff
