// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/reference_hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace pvlff::refimpl {

namespace {

double ref_lambda(double d) { return 1.0 / std::max(d, 1e-12); }

}  // namespace

std::vector<std::vector<double>> mutual_reachability_matrix(const Tensor& points,
                                                            int min_samples) {
  const int n = static_cast<int>(points.rows());
  std::vector<std::vector<double>> eu(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Plain index-order accumulation: the distance values must match the
      // library bitwise, or ulp noise manufactures spurious tie flips.
      double s = 0.0;
      for (std::size_t d = 0; d < points.cols(); ++d) {
        const double v = points(i, d) - points(j, d);
        s += v * v;
      }
      eu[i][j] = std::sqrt(s);
    }
  }
  std::vector<double> core(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(eu[i][j]);
    }
    std::sort(others.begin(), others.end());
    core[i] = others[static_cast<std::size_t>(min_samples) - 1];
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) d[i][j] = std::max({core[i], core[j], eu[i][j]});
    }
  }
  return d;
}

std::vector<RefEdge> prim_mst(const std::vector<std::vector<double>>& dist) {
  const int n = static_cast<int>(dist.size());
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, 0);
  std::vector<char> done(n, 0);
  done[0] = 1;
  for (int j = 1; j < n; ++j) key[j] = dist[0][j];
  std::vector<RefEdge> mst;
  for (int round = 1; round < n; ++round) {
    int u = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (!done[j] && key[j] < best) {  // smallest index wins ties
        best = key[j];
        u = j;
      }
    }
    done[u] = 1;
    mst.push_back({std::min(parent[u], u), std::max(parent[u], u), key[u]});
    for (int j = 0; j < n; ++j) {
      if (!done[j] && dist[u][j] < key[j]) {  // first-seen parent kept on ties
        key[j] = dist[u][j];
        parent[j] = u;
      }
    }
  }
  return mst;
}

std::vector<RefEdge> kruskal_mst(const std::vector<std::vector<double>>& dist) {
  const int n = static_cast<int>(dist.size());
  std::vector<RefEdge> all;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) all.push_back({i, j, dist[i][j]});
  }
  std::sort(all.begin(), all.end(), [](const RefEdge& x, const RefEdge& y) {
    return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
  });
  std::vector<int> comp(n);
  for (int i = 0; i < n; ++i) comp[i] = i;
  std::vector<RefEdge> mst;
  for (const RefEdge& e : all) {
    if (comp[e.a] == comp[e.b]) continue;
    const int from = comp[e.b];
    const int to = comp[e.a];
    for (int i = 0; i < n; ++i) {
      if (comp[i] == from) comp[i] = to;
    }
    mst.push_back(e);
    if (static_cast<int>(mst.size()) == n - 1) break;
  }
  return mst;
}

namespace {

// Splits `verts` by removing the heaviest edge; recursion carries the live
// edge subset of each component.
void split_component(RefTree* tree, int cid, std::vector<int> verts, std::vector<RefEdge> edges,
                     int min_cluster_size) {
  while (true) {
    if (edges.empty()) {
      // Single remaining vertex: it can only get here as a whole component,
      // which the caller guards against (components of size >= 2).
      return;
    }
    std::size_t heaviest = 0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
      const RefEdge& x = edges[i];
      const RefEdge& y = edges[heaviest];
      if (std::tie(x.w, x.a, x.b) > std::tie(y.w, y.a, y.b)) heaviest = i;
    }
    const RefEdge cut = edges[heaviest];
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(heaviest));
    const double lam = ref_lambda(cut.w);

    // Flood from cut.a over the remaining edges.
    std::vector<int> stack{cut.a};
    std::vector<char> in_a(tree->point_count, 0);
    in_a[cut.a] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const RefEdge& e : edges) {
        int other = -1;
        if (e.a == v) other = e.b;
        if (e.b == v) other = e.a;
        if (other >= 0 && !in_a[other]) {
          in_a[other] = 1;
          stack.push_back(other);
        }
      }
    }
    std::vector<int> va, vb;
    std::vector<RefEdge> ea, eb;
    for (int v : verts) (in_a[v] ? va : vb).push_back(v);
    for (const RefEdge& e : edges) (in_a[e.a] ? ea : eb).push_back(e);

    const bool a_big = static_cast<int>(va.size()) >= min_cluster_size;
    const bool b_big = static_cast<int>(vb.size()) >= min_cluster_size;
    if (a_big && b_big) {
      tree->nodes[cid].lambda_death = lam;
      for (int side = 0; side < 2; ++side) {
        const std::vector<int>& sv = side == 0 ? va : vb;
        const std::vector<RefEdge>& se = side == 0 ? ea : eb;
        RefNode child;
        child.parent = cid;
        child.lambda_birth = lam;
        child.size = static_cast<int>(sv.size());
        const int child_id = static_cast<int>(tree->nodes.size());
        tree->nodes[cid].children.push_back(child_id);
        tree->nodes.push_back(child);
        split_component(tree, child_id, sv, se, min_cluster_size);
      }
      return;
    }
    if (a_big || b_big) {
      const std::vector<int>& small = a_big ? vb : va;
      for (int v : small) {
        tree->nodes[cid].points.push_back(v);
        tree->nodes[cid].point_lambdas.push_back(lam);
      }
      verts = a_big ? va : vb;
      edges = a_big ? ea : eb;
      continue;
    }
    for (int v : verts) {
      tree->nodes[cid].points.push_back(v);
      tree->nodes[cid].point_lambdas.push_back(lam);
    }
    tree->nodes[cid].lambda_death = lam;
    return;
  }
}

double node_stability(const RefTree& tree, int v) {
  const RefNode& nd = tree.nodes[v];
  double s = 0.0;
  for (double pl : nd.point_lambdas) s += pl - nd.lambda_birth;
  for (int c : nd.children) {
    s += (tree.nodes[c].lambda_birth - nd.lambda_birth) * tree.nodes[c].size;
  }
  return s;
}

// Best selection for the subtree at v: either v itself or the union of the
// children's best selections, whichever has more total stability (ties
// toward v).
double best_selection(const RefTree& tree, int v, std::vector<int>* picked) {
  double child_sum = 0.0;
  std::vector<int> child_picked;
  for (int c : tree.nodes[v].children) child_sum += best_selection(tree, c, &child_picked);
  if (tree.nodes[v].stability >= child_sum) {
    picked->push_back(v);
    return tree.nodes[v].stability;
  }
  picked->insert(picked->end(), child_picked.begin(), child_picked.end());
  return child_sum;
}

}  // namespace

RefTree condense(const std::vector<RefEdge>& mst, int point_count, int min_cluster_size) {
  RefTree tree;
  tree.point_count = point_count;
  RefNode root;
  root.size = point_count;
  tree.nodes.push_back(root);
  std::vector<int> verts(point_count);
  for (int i = 0; i < point_count; ++i) verts[i] = i;
  split_component(&tree, 0, verts, mst, min_cluster_size);
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    tree.nodes[v].stability = node_stability(tree, static_cast<int>(v));
  }
  return tree;
}

std::vector<int> eom_labels(const RefTree& tree, std::vector<int>* selected) {
  std::vector<int> picked;
  if (tree.nodes.size() == 1) {
    picked.push_back(0);
  } else {
    for (int c : tree.nodes[0].children) best_selection(tree, c, &picked);
  }
  std::sort(picked.begin(), picked.end());
  if (selected != nullptr) *selected = picked;

  std::vector<int> labels(tree.point_count, -1);
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const RefNode& nd = tree.nodes[v];
    for (int p : nd.points) {
      int walk = static_cast<int>(v);
      while (walk >= 0) {
        const auto it = std::find(picked.begin(), picked.end(), walk);
        if (it != picked.end()) {
          labels[p] = static_cast<int>(it - picked.begin());
          break;
        }
        walk = tree.nodes[walk].parent;
      }
    }
  }
  return labels;
}

std::vector<int> assign_noise(const std::vector<int>& labels, const Tensor& points) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  if (k == 0) return labels;
  const std::size_t c = points.cols();
  std::vector<std::vector<double>> centroid(k, std::vector<double>(c, 0.0));
  std::vector<int> count(k, 0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] < 0) continue;
    ++count[labels[p]];
    for (std::size_t i = 0; i < c; ++i) centroid[labels[p]][i] += points(p, i);
  }
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < c; ++i) centroid[j][i] /= count[j];
  }
  std::vector<int> out = labels;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (out[p] >= 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        const double d = points(p, i) - centroid[j][i];
        d2 += d * d;
      }
      if (d2 < best) {
        best = d2;
        out[p] = j;
      }
    }
  }
  return out;
}

std::vector<int> hdbscan_labels(const Tensor& points, int min_samples, int min_cluster_size,
                                RefTree* tree_out) {
  const int n = static_cast<int>(points.rows());
  if (n < min_samples + 1 || n < 2) {
    if (tree_out != nullptr) *tree_out = RefTree{n, {}};
    return std::vector<int>(static_cast<std::size_t>(n), -1);
  }
  const auto dist = mutual_reachability_matrix(points, min_samples);
  const auto mst = prim_mst(dist);
  RefTree tree = condense(mst, n, min_cluster_size);
  std::vector<int> labels = eom_labels(tree);
  if (tree_out != nullptr) *tree_out = tree;
  return labels;
}

}  // namespace pvlff::refimpl
