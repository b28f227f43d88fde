// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"

namespace pvlff {

namespace {

// Guard against coincident points: lambda = 1/distance must stay finite so
// stability sums stay well defined.
constexpr double kMinSplitDistance = 1e-12;

double lambda_of(double distance) { return 1.0 / std::max(distance, kMinSplitDistance); }

double row_distance(const Tensor& points, std::size_t a, std::size_t b) {
  const std::size_t c = points.cols();
  const double* pa = points.data() + a * c;
  const double* pb = points.data() + b * c;
  double s = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

MutualReachability::MutualReachability(const Tensor& points, int min_samples)
    : points_(&points) {
  if (min_samples < 1) throw ConfigError("min_samples must be >= 1");
  if (!points.all_finite()) throw DataError("clustering points must be finite");
  const std::size_t n = points.rows();
  const std::size_t k = static_cast<std::size_t>(min_samples);
  if (n < k + 1) {
    throw DataError("core distances need at least min_samples + 1 points, got " +
                    std::to_string(n));
  }
  core_.resize(n);
  ThreadPool::global().for_chunks(n, 128, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> dists(n - 1);
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) dists[m++] = row_distance(*points_, i, j);
      }
      std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       dists.end());
      core_[i] = dists[k - 1];
    }
  });
}

double MutualReachability::operator()(std::size_t a, std::size_t b) const {
  return std::max({core_[a], core_[b], row_distance(*points_, a, b)});
}

std::vector<MstEdge> build_mst(const std::function<double(std::size_t, std::size_t)>& metric,
                               std::size_t n) {
  if (n < 2) throw DataError("spanning tree needs at least two points");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> parent(n, 0);
  std::vector<char> in_tree(n, 0);
  in_tree[0] = 1;
  for (std::size_t j = 1; j < n; ++j) key[j] = metric(0, j);

  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  for (std::size_t round = 1; round < n; ++round) {
    std::size_t u = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && key[j] < best) {
        best = key[j];
        u = j;
      }
    }
    if (u == kNone) throw InternalError("non-finite distances in spanning tree build");
    in_tree[u] = 1;
    const std::uint32_t v = static_cast<std::uint32_t>(u);
    edges.push_back({std::min(parent[u], v), std::max(parent[u], v), key[u]});
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = metric(u, j);
      if (d < key[j]) {
        key[j] = d;
        parent[j] = v;
      }
    }
  }
  return edges;
}

std::vector<MstEdge> build_mst(const MutualReachability& metric) {
  return build_mst([&metric](std::size_t a, std::size_t b) { return metric(a, b); },
                   metric.size());
}

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

// Single-linkage merge node; leaves are ids 0..n-1, internal nodes n..2n-2
// in ascending merge distance.
struct SlNode {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double dist = 0.0;
  std::uint32_t size = 0;
};

}  // namespace

std::vector<std::uint32_t> CondensedTree::fall_out_node() const {
  std::vector<std::uint32_t> owner(point_count, kNoCondensedNode);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    for (std::uint32_t p : nodes[v].points) owner[p] = static_cast<std::uint32_t>(v);
  }
  return owner;
}

CondensedTree condense(const std::vector<MstEdge>& mst, std::uint32_t n_points,
                       std::uint32_t min_cluster_size) {
  if (min_cluster_size < 2) throw ConfigError("min_cluster_size must be >= 2");
  if (n_points < 2 || mst.size() != n_points - 1) {
    throw DataError("spanning tree must have point_count - 1 edges");
  }

  std::vector<MstEdge> edges = mst;
  std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  });

  std::vector<SlNode> sl;
  sl.reserve(n_points - 1);
  UnionFind uf(n_points);
  // Union-find root -> current single-linkage node of that component.
  std::vector<std::uint32_t> comp(n_points);
  for (std::uint32_t i = 0; i < n_points; ++i) comp[i] = i;
  const auto sl_size = [&](std::uint32_t id) {
    return id < n_points ? 1u : sl[id - n_points].size;
  };
  for (const MstEdge& e : edges) {
    const std::uint32_t ra = uf.find(e.a);
    const std::uint32_t rb = uf.find(e.b);
    const std::uint32_t left = comp[ra];
    const std::uint32_t right = comp[rb];
    sl.push_back({left, right, e.weight, sl_size(left) + sl_size(right)});
    uf.parent[ra] = rb;
    comp[rb] = n_points + static_cast<std::uint32_t>(sl.size()) - 1;
  }

  CondensedTree tree;
  tree.point_count = n_points;
  CondensedNode root;
  root.size = n_points;
  tree.nodes.push_back(std::move(root));

  const auto collect_leaves = [&](std::uint32_t s, std::vector<std::uint32_t>* out) {
    std::vector<std::uint32_t> stack{s};
    while (!stack.empty()) {
      const std::uint32_t t = stack.back();
      stack.pop_back();
      if (t < n_points) {
        out->push_back(t);
      } else {
        stack.push_back(sl[t - n_points].right);
        stack.push_back(sl[t - n_points].left);
      }
    }
  };
  const auto fall_out = [&](std::uint32_t cid, std::uint32_t subtree, double lam) {
    std::vector<std::uint32_t> leaves;
    collect_leaves(subtree, &leaves);
    CondensedNode& nd = tree.nodes[cid];
    for (std::uint32_t p : leaves) {
      nd.points.push_back(p);
      nd.point_lambdas.push_back(lam);
    }
  };

  // Replay splits top-down (descending distance). A side smaller than
  // min_cluster_size falls out of the current node; two big sides end it
  // and give birth to two children.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> queue;  // (sl internal node, condensed id)
  queue.push_back({n_points + n_points - 2, 0});
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::uint32_t s = queue[qi].first;
    const std::uint32_t cid = queue[qi].second;
    const SlNode node = sl[s - n_points];
    const double lam = lambda_of(node.dist);
    const bool left_big = sl_size(node.left) >= min_cluster_size;
    const bool right_big = sl_size(node.right) >= min_cluster_size;
    if (left_big && right_big) {
      tree.nodes[cid].lambda_death = lam;
      for (const std::uint32_t side : {node.left, node.right}) {
        CondensedNode child;
        child.parent = cid;
        child.lambda_birth = lam;
        child.size = sl_size(side);
        const std::uint32_t child_id = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes[cid].children.push_back(child_id);
        tree.nodes.push_back(std::move(child));
        queue.push_back({side, child_id});
      }
    } else if (left_big) {
      fall_out(cid, node.right, lam);
      queue.push_back({node.left, cid});
    } else if (right_big) {
      fall_out(cid, node.left, lam);
      queue.push_back({node.right, cid});
    } else {
      fall_out(cid, node.left, lam);
      fall_out(cid, node.right, lam);
      tree.nodes[cid].lambda_death = lam;
    }
  }

  for (CondensedNode& nd : tree.nodes) {
    double s = 0.0;
    for (double pl : nd.point_lambdas) s += pl - nd.lambda_birth;
    for (std::uint32_t c : nd.children) {
      s += (tree.nodes[c].lambda_birth - nd.lambda_birth) * tree.nodes[c].size;
    }
    nd.stability = s;
  }
  return tree;
}

ClusterLabeling extract_eom(const CondensedTree& tree) {
  ClusterLabeling out;
  out.labels.assign(tree.point_count, ClusterLabeling::kNoise);
  if (tree.nodes.empty()) return out;
  const std::size_t m = tree.nodes.size();
  std::vector<char> picked(m, 0);
  if (m == 1) {
    picked[0] = 1;
  } else {
    // Excess of mass over non-root nodes, leaves first: a node keeps its
    // own stability when it is at least the best achievable by its
    // descendants (ties toward the ancestor), else it passes the larger
    // value up.
    std::vector<double> best(m, 0.0);
    for (std::size_t v = 1; v < m; ++v) picked[v] = 1;
    for (std::size_t v = m; v-- > 1;) {
      const CondensedNode& nd = tree.nodes[v];
      double child_sum = 0.0;
      for (std::uint32_t c : nd.children) child_sum += best[c];
      if (nd.stability < child_sum) {
        picked[v] = 0;
        best[v] = child_sum;
      } else {
        best[v] = nd.stability;
        std::vector<std::uint32_t> stack(nd.children.begin(), nd.children.end());
        while (!stack.empty()) {
          const std::uint32_t w = stack.back();
          stack.pop_back();
          picked[w] = 0;
          for (std::uint32_t c : tree.nodes[w].children) stack.push_back(c);
        }
      }
    }
  }
  for (std::size_t v = 0; v < m; ++v) {
    if (picked[v]) out.selected.push_back(static_cast<std::uint32_t>(v));
  }

  // A point is labeled by the selected ancestor-or-self of the node it
  // falls out of. Parents precede children, so one forward pass resolves
  // every node's owning cluster.
  std::vector<std::int32_t> resolved(m, ClusterLabeling::kNoise);
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    resolved[out.selected[i]] = static_cast<std::int32_t>(i);
  }
  for (std::size_t v = 1; v < m; ++v) {
    if (resolved[v] == ClusterLabeling::kNoise) resolved[v] = resolved[tree.nodes[v].parent];
  }
  const std::vector<std::uint32_t> owner = tree.fall_out_node();
  for (std::size_t p = 0; p < owner.size(); ++p) out.labels[p] = resolved[owner[p]];
  return out;
}

ClusterLabeling cut_tree(const CondensedTree& tree, std::uint32_t node_id) {
  if (node_id >= tree.nodes.size()) {
    throw DataError("unknown condensed-tree node " + std::to_string(node_id));
  }
  ClusterLabeling out;
  out.labels.assign(tree.point_count, ClusterLabeling::kNoise);
  const CondensedNode& nd = tree.nodes[node_id];
  if (nd.children.empty()) {
    out.selected = {node_id};
    for (std::uint32_t p : nd.points) out.labels[p] = 0;
    return out;
  }
  out.selected = nd.children;
  for (std::size_t i = 0; i < nd.children.size(); ++i) {
    std::vector<std::uint32_t> stack{nd.children[i]};
    while (!stack.empty()) {
      const std::uint32_t v = stack.back();
      stack.pop_back();
      for (std::uint32_t p : tree.nodes[v].points) out.labels[p] = static_cast<std::int32_t>(i);
      for (std::uint32_t c : tree.nodes[v].children) stack.push_back(c);
    }
  }
  return out;
}

ClusterLabeling assign_noise(const ClusterLabeling& labeling, const Tensor& points) {
  if (points.rows() != labeling.labels.size()) {
    throw DataError("labeling and point counts differ");
  }
  ClusterLabeling out = labeling;
  const std::size_t k = labeling.cluster_count();
  if (k == 0) return out;
  const std::size_t c = points.cols();
  Tensor centroids(k, c);
  std::vector<double> counts(k, 0.0);
  for (std::size_t p = 0; p < out.labels.size(); ++p) {
    const std::int32_t l = out.labels[p];
    if (l == ClusterLabeling::kNoise) continue;
    counts[static_cast<std::size_t>(l)] += 1.0;
    for (std::size_t i = 0; i < c; ++i) {
      centroids(static_cast<std::size_t>(l), i) += points(p, i);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0.0) continue;
    for (std::size_t i = 0; i < c; ++i) centroids(j, i) /= counts[j];
  }
  for (std::size_t p = 0; p < out.labels.size(); ++p) {
    if (out.labels[p] != ClusterLabeling::kNoise) continue;
    double best = std::numeric_limits<double>::infinity();
    std::int32_t best_label = ClusterLabeling::kNoise;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0.0) continue;
      double d2 = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        const double d = points(p, i) - centroids(j, i);
        d2 += d * d;
      }
      if (d2 < best) {
        best = d2;
        best_label = static_cast<std::int32_t>(j);
      }
    }
    out.labels[p] = best_label;
  }
  return out;
}

void HdbscanConfig::validate() const {
  if (min_samples < 1) throw ConfigError("min_samples must be >= 1");
  if (min_cluster_size < 2) throw ConfigError("min_cluster_size must be >= 2");
}

HdbscanResult hdbscan(const Tensor& points, const HdbscanConfig& config) {
  config.validate();
  HdbscanResult out;
  const std::size_t n = points.size() == 0 ? 0 : points.rows();
  out.tree.point_count = static_cast<std::uint32_t>(n);
  out.labeling.labels.assign(n, ClusterLabeling::kNoise);
  if (n < static_cast<std::size_t>(config.min_samples) + 1 || n < 2) return out;
  const MutualReachability metric(points, config.min_samples);
  const std::vector<MstEdge> mst = build_mst(metric);
  out.tree = condense(mst, static_cast<std::uint32_t>(n), config.min_cluster_size);
  out.labeling = extract_eom(out.tree);
  return out;
}

}  // namespace pvlff
