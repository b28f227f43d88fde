// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pvlff/graph.hpp"
#include "pvlff/param_store.hpp"
#include "pvlff/rng.hpp"

namespace pvlff {

using Point3 = Eigen::Vector3d;

// Multi-resolution grid layout shared by both hybrid hash encodings.
struct HashGridConfig {
  std::size_t levels = 8;             // L
  std::size_t base_resolution = 4;    // N0, cells per axis at level 0
  double growth = 1.5;                // b
  std::size_t features = 2;           // F, entry width
  std::size_t table_size = 1 << 14;   // T, hashed-level entry count (power of two)
  std::size_t dense_threshold = 16;   // resolutions at or below store dense grids

  // N_l = floor(N0 * b^l).
  std::size_t level_resolution(std::size_t level) const;
  std::size_t output_width() const { return levels * features; }
  void validate() const;
};

// Corner-entry index for one level. Levels whose full (N+1)^3 vertex grid
// fits in `table_size` use direct row-major indexing (x fastest); larger
// levels use the standard spatial hash
//   (x1 XOR x2*2654435761 XOR x3*805459861) mod T
// with uint32 wraparound on the products.
std::size_t hash_index(std::size_t level_resolution, const std::array<std::size_t, 3>& cell,
                       std::size_t table_size);

// Trainable multi-resolution grid. Entries live in a ParamStore under
// "<name>.level<k>" so checkpoints and the optimizer see them like any other
// parameter; encode() resolves values through the graph's store, which lets
// the same table structure run against an EMA copy of the parameters.
class HashGridTable {
 public:
  // Registers per-level entry tensors (shape entries x F, init U(-1e-4,1e-4)).
  HashGridTable(HashGridConfig config, std::string name, ParamStore& store, Rng& rng,
                double lr_scale);

  // Binds to already-present level tensors (e.g. after a checkpoint load),
  // validating shapes and re-applying the lr scale.
  static HashGridTable attach(HashGridConfig config, std::string name, ParamStore& store,
                              double lr_scale);

  const HashGridConfig& config() const { return config_; }
  const std::string& name() const { return name_; }

  bool level_dense(std::size_t level) const;
  // (N_l+1)^3 for dense levels, T for hashed ones.
  std::size_t level_entry_count(std::size_t level) const;
  std::string level_param_name(std::size_t level) const;

 private:
  HashGridTable(HashGridConfig config, std::string name);

  HashGridConfig config_;
  std::string name_;
};

// Interpolates all levels of the grid at each point and concatenates them:
// output is points.size() x (L*F), differentiable w.r.t. the table entries.
// Points outside the unit cube are clamped (warning logged once).
NodeId encode(const HashGridTable& table, const std::vector<Point3>& points, CompGraph& graph);
NodeId encode(const HashGridTable& table, const Point3& x, CompGraph& graph);

// Standalone adjoint: scatters upstream (1 x L*F) through the trilinear
// weights into the store's gradient buffers for the table's entries.
void encode_backward(const HashGridTable& table, ParamStore& store, const Point3& x,
                     const Tensor& upstream);

}  // namespace pvlff
