// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/losses.hpp"

#include "pvlff/errors.hpp"

namespace pvlff {

namespace {

NodeId zero_scalar(CompGraph& g) {
  Tensor z(1, 1);
  return g.input(std::move(z));
}

}  // namespace

NodeId semantic_loss(NodeId rendered, const Tensor& target, CompGraph& g) {
  const Tensor& rv = g.value(rendered);
  if (rv.cols() != target.cols())
    throw DataError("semantic_loss: feature width mismatch between render and target");
  PVLFF_CHECK(rv.rows() == target.rows(), "semantic_loss: row count mismatch");
  return g.mean_all(g.abs(g.sub(rendered, g.input(target))));
}

NodeId photometric_loss(NodeId rendered, const Tensor& target, CompGraph& g) {
  PVLFF_CHECK(g.value(rendered).same_shape(target), "photometric_loss: shape mismatch");
  return g.mean_all(g.square(g.sub(rendered, g.input(target))));
}

NodeId depth_loss(NodeId rendered_depth, const Tensor& target_depth,
                  const std::vector<bool>& valid, CompGraph& g, std::size_t* valid_count) {
  const Tensor& rv = g.value(rendered_depth);
  PVLFF_CHECK(rv.cols() == 1 && target_depth.cols() == 1 && rv.rows() == target_depth.rows() &&
                  valid.size() == rv.rows(),
              "depth_loss: rows/validity mismatch");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) keep.push_back(i);
  }
  if (valid_count) *valid_count = keep.size();
  if (keep.empty()) return zero_scalar(g);
  Tensor kept_target(keep.size(), 1);
  for (std::size_t i = 0; i < keep.size(); ++i) kept_target[i] = target_depth[keep[i]];
  NodeId kept = g.gather_rows(rendered_depth, keep);
  return g.mean_all(g.abs(g.sub(kept, g.input(std::move(kept_target)))));
}

NodeId contrastive_loss(NodeId anchors, NodeId positives, NodeId negatives,
                        std::size_t negs_per_anchor, double tau, CompGraph& g) {
  if (tau <= 0.0) throw ConfigError("contrastive_loss: temperature must be positive");
  const Tensor& av = g.value(anchors);
  const Tensor& pv = g.value(positives);
  const Tensor& nv = g.value(negatives);
  std::size_t n_anchors = av.rows();
  PVLFF_CHECK(n_anchors >= 1 && negs_per_anchor >= 1, "contrastive_loss: empty batch");
  PVLFF_CHECK(pv.rows() == n_anchors && pv.cols() == av.cols(),
              "contrastive_loss: positives must align with anchors");
  PVLFF_CHECK(nv.rows() == n_anchors * negs_per_anchor && nv.cols() == av.cols(),
              "contrastive_loss: negatives must be row-grouped per anchor");

  NodeId na = g.row_l2_normalize(anchors);
  NodeId np = g.row_l2_normalize(g.detach(positives));
  NodeId nn = g.row_l2_normalize(g.detach(negatives));

  std::vector<std::size_t> repeat(n_anchors * negs_per_anchor);
  for (std::size_t a = 0; a < n_anchors; ++a) {
    for (std::size_t k = 0; k < negs_per_anchor; ++k) repeat[a * negs_per_anchor + k] = a;
  }
  NodeId neg_sims = g.reshape(g.row_dot(g.gather_rows(na, std::move(repeat)), nn),
                              {n_anchors, negs_per_anchor});
  NodeId lse = g.logsumexp_rows(g.scale(neg_sims, 1.0 / tau));
  NodeId pos_sim = g.scale(g.row_dot(na, np), 1.0 / tau);
  return g.mean_all(g.sub(lse, pos_sim));
}

NodeId slow_center_loss(NodeId anchor_features, const Tensor& centers,
                        const std::vector<bool>& has_center, CompGraph& g) {
  const Tensor& av = g.value(anchor_features);
  PVLFF_CHECK(av.rows() == centers.rows() && av.cols() == centers.cols() &&
                  has_center.size() == av.rows(),
              "slow_center_loss: anchors/centers mismatch");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < has_center.size(); ++i) {
    if (has_center[i]) keep.push_back(i);
  }
  if (keep.empty()) return zero_scalar(g);
  Tensor kept_centers(keep.size(), centers.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    kept_centers.mat().row(static_cast<Eigen::Index>(i)) =
        centers.mat().row(static_cast<Eigen::Index>(keep[i]));
  }
  NodeId kept = g.gather_rows(anchor_features, keep);
  NodeId abs_diff = g.abs(g.sub(kept, g.input(std::move(kept_centers))));
  // Row-L1 mean over anchors = total / n_anchors (not / entries).
  return g.scale(g.sum_all(abs_diff), 1.0 / static_cast<double>(keep.size()));
}

}  // namespace pvlff
