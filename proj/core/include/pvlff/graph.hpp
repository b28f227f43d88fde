// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pvlff/param_store.hpp"
#include "pvlff/tensor.hpp"

namespace pvlff {

class CompGraph;

using NodeId = std::int32_t;

// One recorded primitive on the tape. Nodes own their forward value and a
// lazily allocated adjoint; backward() pushes the adjoint into the inputs
// via CompGraph::adjoint_for_accum. Subclasses in other modules (hash-grid
// interpolation, volume-rendering weights) plug in through add_node().
struct Node {
  Tensor value;
  Tensor adjoint;
  bool has_adjoint = false;
  // False once every path to this node crosses a detach marker or constants
  // only; backward skips such nodes entirely.
  bool requires_grad = false;
  std::vector<NodeId> inputs;

  virtual ~Node() = default;
  virtual void backward(CompGraph& g) = 0;
  virtual const char* kind() const = 0;
};

// Tape of differentiable primitives recorded in execution order. backward()
// walks the tape once in exact reverse order; a second call without
// re-recording is an error.
class CompGraph {
 public:
  explicit CompGraph(ParamStore* store = nullptr) : store_(store) {}

  ParamStore* store() { return store_; }

  NodeId add_node(std::unique_ptr<Node> node);
  Node& node(NodeId id) { return *nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(NodeId id) const { return *nodes_[static_cast<std::size_t>(id)]; }
  const Tensor& value(NodeId id) const { return node(id).value; }
  std::size_t size() const { return nodes_.size(); }

  // Constant leaf (no gradient).
  NodeId input(Tensor value);
  // Trainable leaf referencing store parameter `name`; backward accumulates
  // into the store's gradient buffer.
  NodeId param(const std::string& name);
  // Identical forward value, zero backward contribution.
  NodeId detach(NodeId x);

  // x (N x in) * W^T (in x out) + b -> N x out.
  NodeId linear(NodeId x, NodeId w, NodeId b);
  NodeId relu(NodeId x);
  NodeId softplus(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId abs(NodeId x);
  NodeId square(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId scale(NodeId x, double s);
  NodeId add_scalar(NodeId x, double s);
  NodeId clamp_min(NodeId x, double lo);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId slice_cols(NodeId x, std::size_t begin, std::size_t end);
  NodeId gather_rows(NodeId x, std::vector<std::size_t> rows);
  NodeId reshape(NodeId x, std::vector<std::size_t> shape);
  // Per-segment mean of contiguous equal-sized row blocks: x is
  // (n_segments*segment_size) x C, output n_segments x C.
  NodeId segment_mean(NodeId x, std::size_t n_segments);
  // Rows renormalized to unit L2 length (norm floored at 1e-12).
  NodeId row_l2_normalize(NodeId x);
  // Per-row dot product of equal-shaped matrices -> N x 1.
  NodeId row_dot(NodeId a, NodeId b);
  // Stable log(sum(exp(row))) -> N x 1.
  NodeId logsumexp_rows(NodeId x);
  NodeId sum_all(NodeId x);
  NodeId mean_all(NodeId x);

  // Propagates seed through the tape in reverse order, accumulating into
  // ParamStore gradient buffers at param leaves.
  void backward(NodeId loss, const Tensor& seed);

  // Returns the adjoint buffer of `id` for accumulation (allocated zeroed on
  // first use), or nullptr if the node does not require grad — callers skip
  // the work entirely in that case.
  Tensor* adjoint_for_accum(NodeId id);

 private:
  std::vector<std::unique_ptr<Node>> nodes_;
  ParamStore* store_ = nullptr;
  bool backward_done_ = false;
};

// Runs the registered MLP "<name>.l<k>.{w,b}" with ReLU between layers and a
// linear final layer; records every step on the tape.
NodeId mlp_forward(ParamStore& store, const std::string& name, NodeId input, CompGraph& graph);

}  // namespace pvlff
