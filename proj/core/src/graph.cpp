// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/graph.hpp"

#include <cmath>

#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"

namespace pvlff {

namespace {

// Row-chunk size for parallel GEMMs. Chunk boundaries depend only on the
// problem size, so results are identical for any thread count.
constexpr std::size_t kGemmChunk = 256;

struct InputNode final : Node {
  void backward(CompGraph&) override {}
  const char* kind() const override { return "input"; }
};

struct ParamNode final : Node {
  std::string name;
  void backward(CompGraph& g) override { g.store()->grad(name).mat() += adjoint.mat(); }
  const char* kind() const override { return "param"; }
};

struct DetachNode final : Node {
  void backward(CompGraph&) override {}
  const char* kind() const override { return "detach"; }
};

struct LinearNode final : Node {
  void backward(CompGraph& g) override {
    const Tensor& x = g.value(inputs[0]);
    const Tensor& w = g.value(inputs[1]);
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      ThreadPool::global().for_chunks(x.rows(), kGemmChunk, [&](std::size_t, std::size_t b, std::size_t e) {
        auto rows = static_cast<Eigen::Index>(e - b);
        auto off = static_cast<Eigen::Index>(b);
        dx->mat().middleRows(off, rows).noalias() += adjoint.mat().middleRows(off, rows) * w.mat();
      });
    }
    // Contractions over the batch dimension stay serial: a parallel
    // reduction would make the summation order depend on the thread count.
    if (Tensor* dw = g.adjoint_for_accum(inputs[1])) {
      dw->mat().noalias() += adjoint.mat().transpose() * x.mat();
    }
    if (Tensor* db = g.adjoint_for_accum(inputs[2])) {
      db->mat().noalias() += adjoint.mat().colwise().sum();
    }
  }
  const char* kind() const override { return "linear"; }
};

struct ReluNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (value[i] > 0.0) (*dx)[i] += adjoint[i];
      }
    }
  }
  const char* kind() const override { return "relu"; }
};

struct SoftplusNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const std::size_t n = value.size();
      // d softplus(x)/dx = sigmoid(x) = 1 - exp(-softplus(x)).
      for (std::size_t i = 0; i < n; ++i) {
        (*dx)[i] += adjoint[i] * (1.0 - std::exp(-value[i]));
      }
    }
  }
  const char* kind() const override { return "softplus"; }
};

struct SigmoidNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) {
        (*dx)[i] += adjoint[i] * value[i] * (1.0 - value[i]);
      }
    }
  }
  const char* kind() const override { return "sigmoid"; }
};

struct AbsNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const Tensor& x = g.value(inputs[0]);
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > 0.0) (*dx)[i] += adjoint[i];
        else if (x[i] < 0.0) (*dx)[i] -= adjoint[i];
      }
    }
  }
  const char* kind() const override { return "abs"; }
};

struct SquareNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const Tensor& x = g.value(inputs[0]);
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) (*dx)[i] += adjoint[i] * 2.0 * x[i];
    }
  }
  const char* kind() const override { return "square"; }
};

struct AddNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) da->mat() += adjoint.mat();
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) db->mat() += adjoint.mat();
  }
  const char* kind() const override { return "add"; }
};

struct SubNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) da->mat() += adjoint.mat();
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) db->mat() -= adjoint.mat();
  }
  const char* kind() const override { return "sub"; }
};

struct MulNode final : Node {
  void backward(CompGraph& g) override {
    const Tensor& a = g.value(inputs[0]);
    const Tensor& b = g.value(inputs[1]);
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) {
      da->mat().array() += adjoint.mat().array() * b.mat().array();
    }
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) {
      db->mat().array() += adjoint.mat().array() * a.mat().array();
    }
  }
  const char* kind() const override { return "mul"; }
};

struct DivNode final : Node {
  void backward(CompGraph& g) override {
    const Tensor& b = g.value(inputs[1]);
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) {
      da->mat().array() += adjoint.mat().array() / b.mat().array();
    }
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) {
      // y = a/b  ->  dL/db = -adj * y / b.
      db->mat().array() -= adjoint.mat().array() * value.mat().array() / b.mat().array();
    }
  }
  const char* kind() const override { return "div"; }
};

struct ScaleNode final : Node {
  double s = 1.0;
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) dx->mat() += s * adjoint.mat();
  }
  const char* kind() const override { return "scale"; }
};

struct AddScalarNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) dx->mat() += adjoint.mat();
  }
  const char* kind() const override { return "add_scalar"; }
};

struct ClampMinNode final : Node {
  double lo = 0.0;
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const Tensor& x = g.value(inputs[0]);
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > lo) (*dx)[i] += adjoint[i];
      }
    }
  }
  const char* kind() const override { return "clamp_min"; }
};

struct ConcatColsNode final : Node {
  void backward(CompGraph& g) override {
    auto ca = static_cast<Eigen::Index>(g.value(inputs[0]).cols());
    auto cb = static_cast<Eigen::Index>(g.value(inputs[1]).cols());
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) da->mat() += adjoint.mat().leftCols(ca);
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) db->mat() += adjoint.mat().rightCols(cb);
  }
  const char* kind() const override { return "concat_cols"; }
};

struct SliceColsNode final : Node {
  std::size_t begin = 0;
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      dx->mat().middleCols(static_cast<Eigen::Index>(begin),
                           static_cast<Eigen::Index>(value.cols())) += adjoint.mat();
    }
  }
  const char* kind() const override { return "slice_cols"; }
};

struct GatherRowsNode final : Node {
  std::vector<std::size_t> rows;
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      // Serial scatter: rows may repeat, so parallel adds would race.
      for (std::size_t i = 0; i < rows.size(); ++i) {
        dx->mat().row(static_cast<Eigen::Index>(rows[i])) +=
            adjoint.mat().row(static_cast<Eigen::Index>(i));
      }
    }
  }
  const char* kind() const override { return "gather_rows"; }
};

struct ReshapeNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      // Same flat row-major layout; only the shape differs.
      const std::size_t n = value.size();
      for (std::size_t i = 0; i < n; ++i) (*dx)[i] += adjoint[i];
    }
  }
  const char* kind() const override { return "reshape"; }
};

struct SegmentMeanNode final : Node {
  std::size_t segment_size = 1;
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      double inv = 1.0 / static_cast<double>(segment_size);
      for (std::size_t s = 0; s < value.rows(); ++s) {
        for (std::size_t r = 0; r < segment_size; ++r) {
          dx->mat().row(static_cast<Eigen::Index>(s * segment_size + r)) +=
              inv * adjoint.mat().row(static_cast<Eigen::Index>(s));
        }
      }
    }
  }
  const char* kind() const override { return "segment_mean"; }
};

struct RowL2NormalizeNode final : Node {
  std::vector<double> norms;  // clamped norms saved from forward
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      // y = x / m  ->  dx = (dy - (dy . y) y) / m.
      for (std::size_t r = 0; r < value.rows(); ++r) {
        auto i = static_cast<Eigen::Index>(r);
        double dot = adjoint.mat().row(i).dot(value.mat().row(i));
        dx->mat().row(i) += (adjoint.mat().row(i) - dot * value.mat().row(i)) / norms[r];
      }
    }
  }
  const char* kind() const override { return "row_l2_normalize"; }
};

struct RowDotNode final : Node {
  void backward(CompGraph& g) override {
    const Tensor& a = g.value(inputs[0]);
    const Tensor& b = g.value(inputs[1]);
    if (Tensor* da = g.adjoint_for_accum(inputs[0])) {
      for (std::size_t r = 0; r < a.rows(); ++r) {
        auto i = static_cast<Eigen::Index>(r);
        da->mat().row(i) += adjoint[r] * b.mat().row(i);
      }
    }
    if (Tensor* db = g.adjoint_for_accum(inputs[1])) {
      for (std::size_t r = 0; r < a.rows(); ++r) {
        auto i = static_cast<Eigen::Index>(r);
        db->mat().row(i) += adjoint[r] * a.mat().row(i);
      }
    }
  }
  const char* kind() const override { return "row_dot"; }
};

struct LogSumExpRowsNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      const Tensor& x = g.value(inputs[0]);
      // d lse / dx_j = exp(x_j - lse): the softmax of the row.
      for (std::size_t r = 0; r < x.rows(); ++r) {
        auto i = static_cast<Eigen::Index>(r);
        dx->mat().row(i) += adjoint[r] * (x.mat().row(i).array() - value[r]).exp().matrix();
      }
    }
  }
  const char* kind() const override { return "logsumexp_rows"; }
};

struct SumAllNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) dx->mat().array() += adjoint[0];
  }
  const char* kind() const override { return "sum_all"; }
};

struct MeanAllNode final : Node {
  void backward(CompGraph& g) override {
    if (Tensor* dx = g.adjoint_for_accum(inputs[0])) {
      dx->mat().array() += adjoint[0] / static_cast<double>(dx->size());
    }
  }
  const char* kind() const override { return "mean_all"; }
};

}  // namespace

NodeId CompGraph::add_node(std::unique_ptr<Node> node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor* CompGraph::adjoint_for_accum(NodeId id) {
  Node& n = node(id);
  if (!n.requires_grad) return nullptr;
  if (!n.has_adjoint) {
    n.adjoint = Tensor(n.value.shape());
    n.has_adjoint = true;
  }
  return &n.adjoint;
}

NodeId CompGraph::input(Tensor value) {
  auto n = std::make_unique<InputNode>();
  n->value = std::move(value);
  n->requires_grad = false;
  return add_node(std::move(n));
}

NodeId CompGraph::param(const std::string& name) {
  PVLFF_CHECK(store_ != nullptr, "CompGraph::param: graph has no ParamStore");
  auto n = std::make_unique<ParamNode>();
  n->name = name;
  n->value = store_->value(name);
  n->requires_grad = true;
  return add_node(std::move(n));
}

NodeId CompGraph::detach(NodeId x) {
  auto n = std::make_unique<DetachNode>();
  n->inputs = {x};
  n->value = value(x);
  n->requires_grad = false;
  return add_node(std::move(n));
}

namespace {
bool any_requires_grad(const CompGraph& g, const std::vector<NodeId>& ids) {
  for (NodeId id : ids) {
    if (g.node(id).requires_grad) return true;
  }
  return false;
}
}  // namespace

NodeId CompGraph::linear(NodeId x, NodeId w, NodeId b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (xv.cols() != wv.cols() || wv.rows() != bv.size()) {
    throw ConfigError("linear: shape mismatch (input " + std::to_string(xv.cols()) +
                      ", weight " + std::to_string(wv.rows()) + "x" + std::to_string(wv.cols()) +
                      ", bias " + std::to_string(bv.size()) + ")");
  }
  auto n = std::make_unique<LinearNode>();
  n->inputs = {x, w, b};
  n->requires_grad = any_requires_grad(*this, n->inputs);
  n->value = Tensor(xv.rows(), wv.rows());
  Tensor& out = n->value;
  ThreadPool::global().for_chunks(xv.rows(), kGemmChunk, [&](std::size_t, std::size_t cb, std::size_t ce) {
    auto rows = static_cast<Eigen::Index>(ce - cb);
    auto off = static_cast<Eigen::Index>(cb);
    out.mat().middleRows(off, rows).noalias() = xv.mat().middleRows(off, rows) * wv.mat().transpose();
    out.mat().middleRows(off, rows).rowwise() += bv.mat().row(0);
  });
  return add_node(std::move(n));
}

namespace {
template <typename NodeT, typename Fn>
NodeId unary_elementwise(CompGraph& g, NodeId x, Fn fn) {
  auto n = std::make_unique<NodeT>();
  n->inputs = {x};
  n->requires_grad = g.node(x).requires_grad;
  const Tensor& xv = g.value(x);
  n->value = Tensor(xv.shape());
  const std::size_t count = xv.size();
  for (std::size_t i = 0; i < count; ++i) n->value[i] = fn(xv[i]);
  return g.add_node(std::move(n));
}
}  // namespace

NodeId CompGraph::relu(NodeId x) {
  return unary_elementwise<ReluNode>(*this, x, [](double v) { return v > 0.0 ? v : 0.0; });
}

NodeId CompGraph::softplus(NodeId x) {
  return unary_elementwise<SoftplusNode>(*this, x, [](double v) {
    if (v > 30.0) return v;
    if (v < -30.0) return std::exp(v);
    return std::log1p(std::exp(v));
  });
}

NodeId CompGraph::sigmoid(NodeId x) {
  return unary_elementwise<SigmoidNode>(*this, x, [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
  });
}

NodeId CompGraph::abs(NodeId x) {
  return unary_elementwise<AbsNode>(*this, x, [](double v) { return std::fabs(v); });
}

NodeId CompGraph::square(NodeId x) {
  return unary_elementwise<SquareNode>(*this, x, [](double v) { return v * v; });
}

NodeId CompGraph::scale(NodeId x, double s) {
  NodeId id = unary_elementwise<ScaleNode>(*this, x, [s](double v) { return s * v; });
  static_cast<ScaleNode&>(node(id)).s = s;
  return id;
}

NodeId CompGraph::add_scalar(NodeId x, double s) {
  return unary_elementwise<AddScalarNode>(*this, x, [s](double v) { return v + s; });
}

NodeId CompGraph::clamp_min(NodeId x, double lo) {
  NodeId id = unary_elementwise<ClampMinNode>(*this, x, [lo](double v) { return v > lo ? v : lo; });
  static_cast<ClampMinNode&>(node(id)).lo = lo;
  return id;
}

namespace {
template <typename NodeT>
NodeId binary_same_shape(CompGraph& g, NodeId a, NodeId b, const char* what) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  PVLFF_CHECK(av.same_shape(bv), std::string(what) + ": shape mismatch");
  auto n = std::make_unique<NodeT>();
  n->inputs = {a, b};
  n->requires_grad = any_requires_grad(g, n->inputs);
  n->value = Tensor(av.shape());
  return g.add_node(std::move(n));
}
}  // namespace

NodeId CompGraph::add(NodeId a, NodeId b) {
  NodeId id = binary_same_shape<AddNode>(*this, a, b, "add");
  node(id).value.mat() = value(a).mat() + value(b).mat();
  return id;
}

NodeId CompGraph::sub(NodeId a, NodeId b) {
  NodeId id = binary_same_shape<SubNode>(*this, a, b, "sub");
  node(id).value.mat() = value(a).mat() - value(b).mat();
  return id;
}

NodeId CompGraph::mul(NodeId a, NodeId b) {
  NodeId id = binary_same_shape<MulNode>(*this, a, b, "mul");
  node(id).value.mat().array() = value(a).mat().array() * value(b).mat().array();
  return id;
}

NodeId CompGraph::div(NodeId a, NodeId b) {
  NodeId id = binary_same_shape<DivNode>(*this, a, b, "div");
  node(id).value.mat().array() = value(a).mat().array() / value(b).mat().array();
  return id;
}

NodeId CompGraph::concat_cols(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  PVLFF_CHECK(av.rows() == bv.rows(), "concat_cols: row count mismatch");
  auto n = std::make_unique<ConcatColsNode>();
  n->inputs = {a, b};
  n->requires_grad = any_requires_grad(*this, n->inputs);
  n->value = Tensor(av.rows(), av.cols() + bv.cols());
  n->value.mat().leftCols(static_cast<Eigen::Index>(av.cols())) = av.mat();
  n->value.mat().rightCols(static_cast<Eigen::Index>(bv.cols())) = bv.mat();
  return add_node(std::move(n));
}

NodeId CompGraph::slice_cols(NodeId x, std::size_t begin, std::size_t end) {
  const Tensor& xv = value(x);
  PVLFF_CHECK(begin < end && end <= xv.cols(), "slice_cols: range out of bounds");
  auto n = std::make_unique<SliceColsNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->begin = begin;
  n->value = Tensor(xv.rows(), end - begin);
  n->value.mat() = xv.mat().middleCols(static_cast<Eigen::Index>(begin),
                                       static_cast<Eigen::Index>(end - begin));
  return add_node(std::move(n));
}

NodeId CompGraph::gather_rows(NodeId x, std::vector<std::size_t> rows) {
  const Tensor& xv = value(x);
  auto n = std::make_unique<GatherRowsNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = Tensor(rows.size(), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    PVLFF_CHECK(rows[i] < xv.rows(), "gather_rows: index out of range");
    n->value.mat().row(static_cast<Eigen::Index>(i)) =
        xv.mat().row(static_cast<Eigen::Index>(rows[i]));
  }
  n->rows = std::move(rows);
  return add_node(std::move(n));
}

NodeId CompGraph::reshape(NodeId x, std::vector<std::size_t> shape) {
  auto n = std::make_unique<ReshapeNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = value(x).reshaped(std::move(shape));
  return add_node(std::move(n));
}

NodeId CompGraph::segment_mean(NodeId x, std::size_t n_segments) {
  const Tensor& xv = value(x);
  PVLFF_CHECK(n_segments > 0 && xv.rows() % n_segments == 0,
              "segment_mean: rows not divisible into segments");
  std::size_t seg = xv.rows() / n_segments;
  auto n = std::make_unique<SegmentMeanNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->segment_size = seg;
  n->value = Tensor(n_segments, xv.cols());
  for (std::size_t s = 0; s < n_segments; ++s) {
    n->value.mat().row(static_cast<Eigen::Index>(s)) =
        xv.mat().middleRows(static_cast<Eigen::Index>(s * seg), static_cast<Eigen::Index>(seg))
            .colwise().mean();
  }
  return add_node(std::move(n));
}

NodeId CompGraph::row_l2_normalize(NodeId x) {
  const Tensor& xv = value(x);
  auto n = std::make_unique<RowL2NormalizeNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = Tensor(xv.shape());
  n->norms.resize(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto i = static_cast<Eigen::Index>(r);
    double m = std::max(xv.mat().row(i).norm(), 1e-12);
    n->norms[r] = m;
    n->value.mat().row(i) = xv.mat().row(i) / m;
  }
  return add_node(std::move(n));
}

NodeId CompGraph::row_dot(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  PVLFF_CHECK(av.same_shape(bv), "row_dot: shape mismatch");
  auto n = std::make_unique<RowDotNode>();
  n->inputs = {a, b};
  n->requires_grad = any_requires_grad(*this, n->inputs);
  n->value = Tensor(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto i = static_cast<Eigen::Index>(r);
    n->value[r] = av.mat().row(i).dot(bv.mat().row(i));
  }
  return add_node(std::move(n));
}

NodeId CompGraph::logsumexp_rows(NodeId x) {
  const Tensor& xv = value(x);
  auto n = std::make_unique<LogSumExpRowsNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = Tensor(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto i = static_cast<Eigen::Index>(r);
    double mx = xv.mat().row(i).maxCoeff();
    double s = (xv.mat().row(i).array() - mx).exp().sum();
    n->value[r] = mx + std::log(s);
  }
  return add_node(std::move(n));
}

NodeId CompGraph::sum_all(NodeId x) {
  auto n = std::make_unique<SumAllNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = Tensor(1, 1);
  n->value[0] = value(x).mat().sum();
  return add_node(std::move(n));
}

NodeId CompGraph::mean_all(NodeId x) {
  auto n = std::make_unique<MeanAllNode>();
  n->inputs = {x};
  n->requires_grad = node(x).requires_grad;
  n->value = Tensor(1, 1);
  n->value[0] = value(x).mat().mean();
  return add_node(std::move(n));
}

void CompGraph::backward(NodeId loss, const Tensor& seed) {
  if (backward_done_) {
    throw InternalError("CompGraph::backward called twice without re-recording");
  }
  Node& top = node(loss);
  PVLFF_CHECK(seed.same_shape(top.value), "backward: seed shape mismatch");
  backward_done_ = true;
  if (!top.requires_grad) return;
  top.adjoint = seed;
  top.has_adjoint = true;
  for (NodeId i = loss; i >= 0; --i) {
    Node& n = node(i);
    if (n.has_adjoint && n.requires_grad) n.backward(*this);
  }
}

NodeId mlp_forward(ParamStore& store, const std::string& name, NodeId input, CompGraph& graph) {
  if (!store.has(name + ".l0.w")) {
    throw ConfigError("mlp_forward: no MLP registered under '" + name + "'");
  }
  NodeId h = input;
  for (std::size_t k = 0;; ++k) {
    std::string base = name + ".l" + std::to_string(k);
    if (!store.has(base + ".w")) break;
    if (k > 0) h = graph.relu(h);
    NodeId w = graph.param(base + ".w");
    NodeId b = graph.param(base + ".b");
    h = graph.linear(h, w, b);
  }
  return h;
}

}  // namespace pvlff
