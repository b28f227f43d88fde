// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "pvlff/errors.hpp"
#include "pvlff/hdbscan.hpp"
#include "pvlff/parallel.hpp"
#include "pvlff/rng.hpp"
#include "pvlff/tensor.hpp"
#include "support/reference_hdbscan.hpp"

using namespace pvlff;

namespace {

Tensor make_points(const std::vector<std::vector<double>>& rows) {
  Tensor t(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) t(i, j) = rows[i][j];
  }
  return t;
}

// Isotropic Gaussian blob appended to `rows`.
void add_blob(std::vector<std::vector<double>>* rows, std::size_t count,
              const std::vector<double>& center, double sigma, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> p(center.size());
    for (std::size_t d = 0; d < center.size(); ++d) p[d] = center[d] + sigma * rng.normal();
    rows->push_back(p);
  }
}

double euclid(const Tensor& pts, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t d = 0; d < pts.cols(); ++d) {
    const double v = pts(a, d) - pts(b, d);
    s += v * v;
  }
  return std::sqrt(s);
}

// Labels must match under some bijection, with noise mapping to noise.
void check_labels_match(const std::vector<std::int32_t>& got, const std::vector<int>& want) {
  REQUIRE(got.size() == want.size());
  std::map<std::int32_t, int> fwd;
  std::map<int, std::int32_t> bwd;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const bool got_noise = got[i] == ClusterLabeling::kNoise;
    const bool want_noise = want[i] < 0;
    REQUIRE(got_noise == want_noise);
    if (got_noise) continue;
    if (fwd.count(got[i]) == 0) {
      fwd[got[i]] = want[i];
      REQUIRE(bwd.count(want[i]) == 0);
      bwd[want[i]] = got[i];
    }
    REQUIRE(fwd[got[i]] == want[i]);
  }
}

std::vector<double> sorted_node_sizes(const CondensedTree& tree) {
  std::vector<double> out;
  for (const auto& nd : tree.nodes) out.push_back(nd.size);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> sorted_ref_sizes(const refimpl::RefTree& tree) {
  std::vector<double> out;
  for (const auto& nd : tree.nodes) out.push_back(nd.size);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("mutual reachability with k=1 equals the Euclidean distance") {
  Rng rng(101);
  Tensor pts(30, 3);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(-2.0, 2.0);
  const MutualReachability metric(pts, 1);
  // core_1(p) is p's nearest-neighbor distance, which never exceeds the
  // distance to any particular other point, so the max() collapses.
  for (std::size_t a = 0; a < 30; ++a) {
    for (std::size_t b = 0; b < 30; ++b) {
      if (a == b) continue;
      CHECK(metric(a, b) == doctest::Approx(euclid(pts, a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mutual reachability between coincident points is the max core distance") {
  Rng rng(102);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 8; ++i) rows.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)});
  rows[5] = rows[2];  // coincident pair
  const Tensor pts = make_points(rows);
  const MutualReachability metric(pts, 3);
  CHECK(metric(2, 5) == std::max(metric.core_distance(2), metric.core_distance(5)));
}

TEST_CASE("mutual reachability matches a scripted brute force on six hand points") {
  const Tensor pts = make_points({{0.0, 0.0},
                                  {1.0, 0.0},
                                  {0.0, 1.5},
                                  {4.0, 0.5},
                                  {4.5, 1.0},
                                  {2.0, 3.0}});
  const int k = 2;
  // Oracle: full sort of each row's distances, then the elementwise max rule.
  std::vector<double> core(6);
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < 6; ++j) {
      if (j != i) d.push_back(euclid(pts, i, j));
    }
    std::sort(d.begin(), d.end());
    core[i] = d[k - 1];
  }
  const MutualReachability metric(pts, k);
  for (std::size_t a = 0; a < 6; ++a) {
    CHECK(metric.core_distance(a) == doctest::Approx(core[a]).epsilon(1e-12));
    for (std::size_t b = 0; b < 6; ++b) {
      if (a == b) continue;
      const double want = std::max({core[a], core[b], euclid(pts, a, b)});
      CHECK(metric(a, b) == doctest::Approx(want).epsilon(1e-12));
      CHECK(metric(a, b) == metric(b, a));
    }
  }
  // Same matrix from the quadratic reference.
  const auto ref = refimpl::mutual_reachability_matrix(pts, k);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      if (a != b) CHECK(metric(a, b) == doctest::Approx(ref[a][b]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mutual reachability rejects bad inputs") {
  Tensor pts(4, 2);
  CHECK_THROWS_AS(MutualReachability(pts, 0), ConfigError);
  CHECK_THROWS_AS(MutualReachability(pts, 4), DataError);  // needs k+1 points
  pts(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(MutualReachability(pts, 2), DataError);
}

TEST_CASE("mst of three collinear points omits the longest pair") {
  const Tensor pts = make_points({{0.0}, {1.0}, {2.5}});
  const auto mst =
      build_mst([&](std::size_t a, std::size_t b) { return euclid(pts, a, b); }, 3);
  REQUIRE(mst.size() == 2);
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : mst) pairs.insert({e.a, e.b});
  CHECK(pairs.count({0, 1}) == 1);
  CHECK(pairs.count({1, 2}) == 1);
  CHECK(pairs.count({0, 2}) == 0);
}

TEST_CASE("mst ties are broken toward the smallest vertex index") {
  // Unit square: four side edges of weight 1, diagonals sqrt(2). The grown
  // tree must prefer the smallest-index vertex on equal keys.
  const Tensor pts = make_points({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
  const auto mst =
      build_mst([&](std::size_t a, std::size_t b) { return euclid(pts, a, b); }, 4);
  REQUIRE(mst.size() == 3);
  CHECK(mst[0].a == 0);
  CHECK(mst[0].b == 1);
  CHECK(mst[1].a == 0);
  CHECK(mst[1].b == 2);
  CHECK(mst[2].a == 1);
  CHECK(mst[2].b == 3);
  for (const auto& e : mst) CHECK(e.weight == doctest::Approx(1.0));
}

TEST_CASE("mst weight on random points matches a Kruskal oracle") {
  Rng rng(103);
  Tensor pts(50, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(-1.0, 1.0);
  const MutualReachability metric(pts, 5);
  const auto mst = build_mst(metric);
  REQUIRE(mst.size() == 49);

  const auto ref_dist = refimpl::mutual_reachability_matrix(pts, 5);
  const auto ref_mst = refimpl::kruskal_mst(ref_dist);
  double got = 0.0, want = 0.0;
  for (const auto& e : mst) got += e.weight;
  for (const auto& e : ref_mst) want += e.w;
  CHECK(got == doctest::Approx(want).epsilon(1e-9));

  // Spanning check: the edges connect all 50 vertices.
  std::vector<int> comp(50);
  for (int i = 0; i < 50; ++i) comp[i] = i;
  for (const auto& e : mst) {
    const int from = comp[e.b], to = comp[e.a];
    for (int i = 0; i < 50; ++i) {
      if (comp[i] == from) comp[i] = to;
    }
  }
  for (int i = 0; i < 50; ++i) CHECK(comp[i] == comp[0]);
}

TEST_CASE("condense turns a single tight blob into a root-only tree") {
  Rng rng(104);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 60, {0.0, 0.0}, 0.01, rng);
  const Tensor pts = make_points(rows);
  const auto result = hdbscan(pts, {.min_samples = 5, .min_cluster_size = 10});
  REQUIRE(result.tree.nodes.size() == 1);
  CHECK(result.tree.nodes[0].size == 60);
  CHECK(result.tree.nodes[0].points.size() == 60);
  CHECK(result.tree.nodes[0].stability >= 0.0);
  // Root-only tree: everything is one cluster.
  for (auto l : result.labeling.labels) CHECK(l == 0);
}

TEST_CASE("condense gives a root with two children for two separated blobs") {
  Rng rng(105);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 40, {0.0, 0.0}, 0.02, rng);
  add_blob(&rows, 40, {10.0, 0.0}, 0.02, rng);
  const Tensor pts = make_points(rows);
  const auto result = hdbscan(pts, {.min_samples = 5, .min_cluster_size = 15});
  const auto& tree = result.tree;
  REQUIRE(tree.nodes.size() == 3);
  REQUIRE(tree.nodes[0].children.size() == 2);
  CHECK(tree.nodes[0].points.empty());  // the first split is the gap
  for (std::uint32_t c : tree.nodes[0].children) {
    CHECK(tree.nodes[c].size == 40);
    CHECK(tree.nodes[c].parent == 0);
    CHECK(tree.nodes[c].lambda_birth == tree.nodes[0].lambda_death);
    CHECK(tree.nodes[c].size <= tree.nodes[0].size);
  }

  SUBCASE("extract_eom labels the blobs with zero noise") {
    const auto& labels = result.labeling.labels;
    REQUIRE(result.labeling.cluster_count() == 2);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(labels[i] == labels[0]);
      CHECK(labels[40 + i] == labels[40]);
      CHECK(labels[i] != ClusterLabeling::kNoise);
    }
    CHECK(labels[0] != labels[40]);
  }

  SUBCASE("cut_tree at the root reproduces the two blobs") {
    const auto cut = cut_tree(tree, 0);
    REQUIRE(cut.selected.size() == 2);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(cut.labels[i] == cut.labels[0]);
      CHECK(cut.labels[40 + i] == cut.labels[40]);
    }
    CHECK(cut.labels[0] != cut.labels[40]);
  }

  SUBCASE("cut_tree on a leaf labels its members as one cluster") {
    const std::uint32_t leaf = tree.nodes[0].children[0];
    REQUIRE(tree.nodes[leaf].children.empty());
    const auto cut = cut_tree(tree, leaf);
    std::size_t members = 0;
    for (std::size_t p = 0; p < cut.labels.size(); ++p) {
      if (cut.labels[p] != ClusterLabeling::kNoise) {
        CHECK(cut.labels[p] == 0);
        ++members;
      }
    }
    CHECK(members == tree.nodes[leaf].points.size());
  }

  SUBCASE("cut_tree rejects unknown nodes") {
    CHECK_THROWS_AS(cut_tree(tree, 99), DataError);
  }
}

TEST_CASE("condense on a three-blob set matches the reference tree") {
  Rng rng(106);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 14, {0.0, 0.0}, 0.08, rng);
  add_blob(&rows, 13, {6.0, 0.0}, 0.08, rng);
  add_blob(&rows, 13, {0.0, 6.0}, 0.08, rng);
  const Tensor pts = make_points(rows);

  const auto result = hdbscan(pts, {.min_samples = 3, .min_cluster_size = 4});
  refimpl::RefTree ref_tree;
  refimpl::hdbscan_labels(pts, 3, 4, &ref_tree);

  REQUIRE(result.tree.nodes.size() == ref_tree.nodes.size());
  CHECK(sorted_node_sizes(result.tree) == sorted_ref_sizes(ref_tree));
  std::vector<double> got_stab, want_stab;
  for (const auto& nd : result.tree.nodes) got_stab.push_back(nd.stability);
  for (const auto& nd : ref_tree.nodes) want_stab.push_back(nd.stability);
  std::sort(got_stab.begin(), got_stab.end());
  std::sort(want_stab.begin(), want_stab.end());
  for (std::size_t i = 0; i < got_stab.size(); ++i) {
    CHECK(got_stab[i] == doctest::Approx(want_stab[i]).epsilon(1e-9));
  }
}

TEST_CASE("condensed tree invariants hold on random data") {
  Rng rng(107);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 50, {0.0, 0.0, 0.0}, 0.3, rng);
  add_blob(&rows, 40, {4.0, 1.0, 0.0}, 0.2, rng);
  for (int i = 0; i < 30; ++i) {
    rows.push_back({rng.uniform(-2.0, 6.0), rng.uniform(-2.0, 6.0), rng.uniform(-2.0, 2.0)});
  }
  const Tensor pts = make_points(rows);
  const auto result = hdbscan(pts, {.min_samples = 5, .min_cluster_size = 8});
  const auto& tree = result.tree;

  std::size_t fall_outs = 0;
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const auto& nd = tree.nodes[v];
    CHECK(nd.stability >= 0.0);
    CHECK(nd.points.size() == nd.point_lambdas.size());
    fall_outs += nd.points.size();
    std::uint32_t child_total = 0;
    for (std::uint32_t c : nd.children) {
      CHECK(c > v);  // parents precede children
      CHECK(tree.nodes[c].parent == v);
      CHECK(tree.nodes[c].size <= nd.size);
      CHECK(tree.nodes[c].lambda_birth == nd.lambda_death);
      child_total += tree.nodes[c].size;
    }
    if (!nd.children.empty()) CHECK(child_total <= nd.size);
    for (double pl : nd.point_lambdas) CHECK(pl >= nd.lambda_birth);
  }
  CHECK(fall_outs == tree.point_count);  // every point leaves exactly once

  // Selected nodes are mutually non-ancestral and labels stay in range.
  const auto& labeling = result.labeling;
  for (std::uint32_t s : labeling.selected) {
    for (std::uint32_t t : labeling.selected) {
      if (s == t) continue;
      std::uint32_t walk = tree.nodes[t].parent;
      while (walk != kNoCondensedNode) {
        CHECK(walk != s);
        walk = tree.nodes[walk].parent;
      }
    }
  }
  for (auto l : labeling.labels) {
    CHECK(l >= ClusterLabeling::kNoise);
    CHECK(l < static_cast<std::int32_t>(labeling.cluster_count()));
  }
}

TEST_CASE("extract_eom agrees with the reference on random points") {
  Rng rng(108);
  Tensor pts(100, 2);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(0.0, 1.0);
  const auto result = hdbscan(pts, {.min_samples = 5, .min_cluster_size = 8});
  const auto ref = refimpl::hdbscan_labels(pts, 5, 8);
  check_labels_match(result.labeling.labels, ref);
}

TEST_CASE("cut_tree above the part nodes merges the parts") {
  // Two "objects" of two nearby "parts" each: the tree is
  // root -> {object A, object B} with each object splitting into its parts.
  Rng rng(109);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 15, {0.0, 0.0}, 0.02, rng);   // part A1
  add_blob(&rows, 15, {0.4, 0.0}, 0.02, rng);   // part A2
  add_blob(&rows, 15, {10.0, 0.0}, 0.02, rng);  // part B1
  add_blob(&rows, 15, {10.4, 0.0}, 0.02, rng);  // part B2
  const Tensor pts = make_points(rows);
  const auto result = hdbscan(pts, {.min_samples = 3, .min_cluster_size = 10});
  const auto& tree = result.tree;
  REQUIRE(tree.nodes[0].children.size() == 2);

  // Leaf-level clustering (EOM picks the four maximally stable parts here).
  REQUIRE(result.labeling.cluster_count() == 4);

  // Root cut: each object is one cluster, parts merged.
  const auto coarse = cut_tree(tree, 0);
  REQUIRE(coarse.selected.size() == 2);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(coarse.labels[i] == coarse.labels[0]);
    CHECK(coarse.labels[30 + i] == coarse.labels[30]);
  }
  CHECK(coarse.labels[0] != coarse.labels[30]);

  // Cutting inside object A separates its two parts again.
  const std::uint32_t object_a =
      coarse.labels[0] == 0 ? tree.nodes[0].children[0] : tree.nodes[0].children[1];
  const auto fine = cut_tree(tree, object_a);
  REQUIRE(fine.selected.size() == 2);
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(fine.labels[i] == fine.labels[0]);
    CHECK(fine.labels[15 + i] == fine.labels[15]);
    CHECK(fine.labels[30 + i] == ClusterLabeling::kNoise);
    CHECK(fine.labels[45 + i] == ClusterLabeling::kNoise);
  }
  CHECK(fine.labels[0] != fine.labels[15]);
}

TEST_CASE("assign_noise leaves labelings without noise unchanged") {
  Rng rng(110);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 30, {0.0, 0.0}, 0.05, rng);
  add_blob(&rows, 30, {5.0, 0.0}, 0.05, rng);
  const Tensor pts = make_points(rows);
  const auto result = hdbscan(pts, {.min_samples = 4, .min_cluster_size = 10});
  REQUIRE(std::count(result.labeling.labels.begin(), result.labeling.labels.end(),
                     ClusterLabeling::kNoise) == 0);
  const auto total = assign_noise(result.labeling, pts);
  CHECK(total.labels == result.labeling.labels);
}

TEST_CASE("assign_noise sends a noise point to the nearest centroid") {
  // Clusters at x=0 and x=10; the noise point at x=4 is nearer the first.
  const Tensor pts = make_points(
      {{0.0, 0.0}, {0.0, 1.0}, {10.0, 0.0}, {10.0, 1.0}, {4.0, 0.5}});
  ClusterLabeling labeling;
  labeling.labels = {0, 0, 1, 1, ClusterLabeling::kNoise};
  labeling.selected = {1, 2};  // node ids are irrelevant to the assignment
  const auto total = assign_noise(labeling, pts);
  CHECK(total.labels[4] == 0);
  for (int i = 0; i < 4; ++i) CHECK(total.labels[i] == labeling.labels[i]);
}

TEST_CASE("assign_noise matches the reference on a random labeling") {
  Rng rng(111);
  Tensor pts(60, 3);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(-1.0, 1.0);
  ClusterLabeling labeling;
  labeling.selected = {1, 2, 3};
  std::vector<int> ref_labels(60);
  for (std::size_t i = 0; i < 60; ++i) {
    const int l = static_cast<int>(rng.next_below(4)) - 1;  // -1..2
    labeling.labels.push_back(l);
    ref_labels[i] = l;
  }
  const auto got = assign_noise(labeling, pts);
  const auto want = refimpl::assign_noise(ref_labels, pts);
  for (std::size_t i = 0; i < 60; ++i) {
    CHECK(got.labels[i] == want[i]);
    CHECK(got.labels[i] != ClusterLabeling::kNoise);
  }
}

TEST_CASE("assign_noise with no clusters returns the labeling unchanged") {
  Tensor pts(5, 2);
  ClusterLabeling labeling;
  labeling.labels.assign(5, ClusterLabeling::kNoise);
  const auto out = assign_noise(labeling, pts);
  CHECK(out.labels == labeling.labels);
}

TEST_CASE("pipeline matches the quadratic reference on fifty random sets") {
  Rng rng(112);
  for (int trial = 0; trial < 50; ++trial) {
    const int dims = trial % 3 == 0 ? 2 : (trial % 3 == 1 ? 3 : 8);
    const int k = trial % 2 == 0 ? 5 : 10;
    const int m = 5 + static_cast<int>(rng.next_below(20));
    const int blobs = 1 + static_cast<int>(rng.next_below(4));
    std::vector<std::vector<double>> rows;
    for (int b = 0; b < blobs; ++b) {
      std::vector<double> center(dims);
      for (auto& c : center) c = rng.uniform(-5.0, 5.0);
      add_blob(&rows, 20 + rng.next_below(30), center, 0.15, rng);
    }
    const std::size_t extra = rng.next_below(40);
    for (std::size_t i = 0; i < extra && rows.size() < 200; ++i) {
      std::vector<double> p(dims);
      for (auto& v : p) v = rng.uniform(-6.0, 6.0);
      rows.push_back(p);
    }
    while (rows.size() > 200) rows.pop_back();
    const Tensor pts = make_points(rows);

    const auto result =
        hdbscan(pts, {.min_samples = k, .min_cluster_size = static_cast<std::uint32_t>(m)});
    refimpl::RefTree ref_tree;
    const auto ref_labels = refimpl::hdbscan_labels(pts, k, m, &ref_tree);

    REQUIRE(result.tree.nodes.size() == ref_tree.nodes.size());
    CHECK(sorted_node_sizes(result.tree) == sorted_ref_sizes(ref_tree));
    check_labels_match(result.labeling.labels, ref_labels);
  }
}

TEST_CASE("too few points for a core distance yields all noise and an empty tree") {
  Tensor pts(5, 2);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = static_cast<double>(i);
  const auto result = hdbscan(pts, {.min_samples = 10, .min_cluster_size = 5});
  CHECK(result.tree.nodes.empty());
  REQUIRE(result.labeling.labels.size() == 5);
  for (auto l : result.labeling.labels) CHECK(l == ClusterLabeling::kNoise);
  CHECK(result.labeling.cluster_count() == 0);
}

TEST_CASE("labels are invariant under a global rotation of the features") {
  Rng rng(113);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 35, {1.0, 0.0, 0.0, 0.0, 0.0}, 0.05, rng);
  add_blob(&rows, 35, {0.0, 1.0, 0.0, 0.0, 0.0}, 0.05, rng);
  add_blob(&rows, 30, {0.0, 0.0, 1.0, 0.0, 0.0}, 0.05, rng);
  const Tensor pts = make_points(rows);

  Eigen::MatrixXd g(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) g(i, j) = rng.normal();
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Tensor rotated(pts.rows(), pts.cols());
  rotated.mat() = pts.mat() * q;

  const HdbscanConfig config{.min_samples = 5, .min_cluster_size = 10};
  const auto base = hdbscan(pts, config);
  const auto rot = hdbscan(rotated, config);
  std::vector<int> base_as_int(base.labeling.labels.begin(), base.labeling.labels.end());
  check_labels_match(rot.labeling.labels, base_as_int);
}

TEST_CASE("raising min_cluster_size never increases the cluster count") {
  Rng rng(114);
  std::vector<std::vector<double>> rows;
  add_blob(&rows, 45, {0.0, 0.0}, 0.08, rng);
  add_blob(&rows, 40, {4.0, 0.0}, 0.08, rng);
  add_blob(&rows, 35, {0.0, 4.0}, 0.08, rng);
  for (int i = 0; i < 30; ++i) rows.push_back({rng.uniform(-1.0, 5.0), rng.uniform(-1.0, 5.0)});
  const Tensor pts = make_points(rows);

  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (std::uint32_t m : {3u, 5u, 8u, 12u, 20u, 40u, 60u}) {
    const auto result = hdbscan(pts, {.min_samples = 5, .min_cluster_size = m});
    CHECK(result.labeling.cluster_count() <= previous);
    previous = result.labeling.cluster_count();
  }
}

TEST_CASE("clustering is deterministic across runs and thread counts") {
  Rng rng(115);
  Tensor pts(120, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(-1.0, 1.0);
  const HdbscanConfig config{.min_samples = 6, .min_cluster_size = 9};

  const auto first = hdbscan(pts, config);
  const auto second = hdbscan(pts, config);
  ThreadPool::set_global_threads(4);
  const auto threaded = hdbscan(pts, config);
  ThreadPool::set_global_threads(1);

  CHECK(first.labeling.labels == second.labeling.labels);
  CHECK(first.labeling.labels == threaded.labeling.labels);
  CHECK(first.labeling.selected == threaded.labeling.selected);
  REQUIRE(first.tree.nodes.size() == threaded.tree.nodes.size());
  for (std::size_t v = 0; v < first.tree.nodes.size(); ++v) {
    CHECK(first.tree.nodes[v].stability == threaded.tree.nodes[v].stability);
    CHECK(first.tree.nodes[v].points == threaded.tree.nodes[v].points);
  }
}

TEST_CASE("hdbscan config validation") {
  Tensor pts(20, 2);
  CHECK_THROWS_AS(hdbscan(pts, {.min_samples = 0, .min_cluster_size = 5}), ConfigError);
  CHECK_THROWS_AS(hdbscan(pts, {.min_samples = 3, .min_cluster_size = 1}), ConfigError);
  CHECK_THROWS_AS(condense({}, 5, 3), DataError);  // wrong edge count
}
