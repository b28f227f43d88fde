// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pvlff/tensor.hpp"

namespace pvlff {

// HDBSCAN over instance feature vectors: core distances, mutual
// reachability, exact minimum spanning tree, condensed tree, and
// excess-of-mass cluster extraction, plus multi-granularity cuts of the
// tree. All stages are exact and quadratic-time; inputs are desk-scale
// point sets (per-view pixel features or sampled 3D points).

// A set of feature vectors to cluster together with the ids of the pixels
// or 3D points they came from (empty sources = identity).
struct FeaturePointSet {
  Tensor points;                       // n x C feature rows
  std::vector<std::uint32_t> sources;  // originating pixel / point id per row
};

// On-demand symmetric mutual-reachability metric
//   d(a, b) = max(core_k(a), core_k(b), |p_a - p_b|)
// where core_k is the Euclidean distance to the k-th nearest neighbor of a
// point, the point itself excluded. Holds a reference to the point matrix;
// the caller keeps it alive.
class MutualReachability {
 public:
  // Requires points.rows() >= min_samples + 1 (every core distance must
  // exist) and finite entries; throws DataError otherwise. ConfigError for
  // min_samples < 1. Core distances are computed in parallel over rows with
  // thread-count-independent results.
  MutualReachability(const Tensor& points, int min_samples);

  double operator()(std::size_t a, std::size_t b) const;
  double core_distance(std::size_t i) const { return core_[i]; }
  std::size_t size() const { return core_.size(); }

 private:
  const Tensor* points_;
  std::vector<double> core_;
};

struct MstEdge {
  std::uint32_t a = 0;  // endpoints with a < b
  std::uint32_t b = 0;
  double weight = 0.0;
};

// Exact minimum spanning tree of the complete graph on n vertices under the
// given metric (Prim's algorithm, O(n^2) metric evaluations). Ties are
// broken deterministically: the smallest-index vertex is grown next on equal
// keys, and the earliest-seen parent is kept on equal distances. Throws
// DataError for n < 2.
std::vector<MstEdge> build_mst(const std::function<double(std::size_t, std::size_t)>& metric,
                               std::size_t n);
std::vector<MstEdge> build_mst(const MutualReachability& metric);

constexpr std::uint32_t kNoCondensedNode = 0xffffffffu;

// One node of the condensed cluster tree. `points`/`point_lambdas` hold the
// members that fall out of the node directly (before it splits or dies);
// members surviving to a true split leave at lambda_death into `children`.
struct CondensedNode {
  std::uint32_t parent = kNoCondensedNode;
  double lambda_birth = 0.0;
  double lambda_death = 0.0;
  std::uint32_t size = 0;  // member count at birth
  double stability = 0.0;  // sum over members of (lambda_leave - lambda_birth)
  std::vector<std::uint32_t> children;
  std::vector<std::uint32_t> points;
  std::vector<double> point_lambdas;
};

// Condensed tree: nodes[0] is the root (lambda_birth 0); every parent index
// precedes its children.
struct CondensedTree {
  std::uint32_t point_count = 0;
  std::vector<CondensedNode> nodes;

  // Condensed node each point falls out of directly (size point_count).
  std::vector<std::uint32_t> fall_out_node() const;
};

// Builds the condensed tree from a spanning tree over n_points vertices.
// Splits are replayed in descending edge weight at lambda = 1/weight; a side
// with fewer than min_cluster_size members falls out of its parent instead
// of forming a node. Throws ConfigError for min_cluster_size < 2, DataError
// for an edge count other than n_points - 1.
CondensedTree condense(const std::vector<MstEdge>& mst, std::uint32_t n_points,
                       std::uint32_t min_cluster_size);

// Per-point cluster assignment. Labels are dense 0..K-1 in ascending order
// of the selected condensed-tree node ids listed in `selected`.
struct ClusterLabeling {
  static constexpr std::int32_t kNoise = -1;
  std::vector<std::int32_t> labels;
  std::vector<std::uint32_t> selected;
  std::size_t cluster_count() const { return selected.size(); }
};

// Excess-of-mass extraction: selects the set of mutually non-ancestral nodes
// maximizing total stability (on equal stability the ancestor wins). The
// root is only selectable when it is the sole node, so a structureless point
// set reads as one cluster rather than all noise. A point is labeled by the
// selected ancestor-or-self of the node it falls out of; otherwise noise.
ClusterLabeling extract_eom(const CondensedTree& tree);

// Labels the members of node_id by its immediate children (points falling
// out of node_id directly, and all points outside it, become noise). Cutting
// a leaf labels its members as a single cluster. Throws DataError for an
// unknown node id.
ClusterLabeling cut_tree(const CondensedTree& tree, std::uint32_t node_id);

// Reassigns every noise point to the cluster with the nearest centroid
// (mean of the originally labeled member rows; ties toward the smallest
// label). A labeling with no clusters is returned unchanged.
ClusterLabeling assign_noise(const ClusterLabeling& labeling, const Tensor& points);

struct HdbscanConfig {
  int min_samples = 10;
  std::uint32_t min_cluster_size = 50;  // 2D pixel default; 3D callers use 100

  void validate() const;  // ConfigError on min_samples < 1 or min_cluster_size < 2
};

struct HdbscanResult {
  CondensedTree tree;
  ClusterLabeling labeling;  // extract_eom output (noise retained)
};

// Full pipeline over raw feature rows. With fewer than min_samples + 1
// points no core distance exists: the tree is empty and every point is
// labeled noise.
HdbscanResult hdbscan(const Tensor& points, const HdbscanConfig& config);

}  // namespace pvlff
