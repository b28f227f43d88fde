// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "pvlff/graph.hpp"
#include "pvlff/hash_grid.hpp"

namespace pvlff {

// Which inputs feed the instance head.
enum class InstanceArch {
  kDecoupled,  // its own hash encoding (the default architecture)
  kSharedHhe,  // the geometry branch's hash encoding
  kStacked,    // the geometric feature F_G
};

InstanceArch instance_arch_from_string(const std::string& s);
std::string to_string(InstanceArch arch);

struct FieldConfig {
  HashGridConfig grid;              // layout shared by both encodings
  std::size_t fg_width = 16;        // geometric feature F_G
  std::size_t semantic_width = 16;  // C_S, must match the scene's embeddings
  std::size_t instance_width = 8;   // C_I
  std::size_t hidden_width = 64;    // every head MLP
  std::size_t head_layers = 3;
  InstanceArch arch = InstanceArch::kDecoupled;

  void validate() const;
};

// Degree-2 real spherical harmonics basis (9 coefficients) used as the view
// direction encoding for the color head.
std::array<double, 9> sh9(const Point3& unit_dir);

// The field: one hash encoding feeding geometry (density sigma + F_G, with
// color and semantic heads on F_G) and, in decoupled mode, a second encoding
// exclusively feeding the instance head.
class FieldModel {
 public:
  // Registers and initializes all parameters in `store`.
  FieldModel(FieldConfig config, ParamStore& store, Rng& rng);

  // Binds to parameters already present in `store` (e.g. loaded from a
  // checkpoint), validating names/shapes and re-applying lr scales.
  static FieldModel attach(FieldConfig config, ParamStore& store);

  const FieldConfig& config() const { return config_; }
  const HashGridTable& hhe1() const { return *hhe1_; }
  // Only present in decoupled mode.
  bool has_hhe2() const { return hhe2_ != nullptr; }
  const HashGridTable& hhe2() const;

  struct GeometryOut {
    NodeId sigma;  // N x 1, softplus-activated
    NodeId fg;     // N x fg_width
  };

  // All queries are batched over points/rows and recorded on the graph.
  GeometryOut query_geometry(const std::vector<Point3>& xs, CompGraph& g) const;
  // One direction per row of fg; non-unit directions are normalized with a
  // one-time warning.
  NodeId query_color(NodeId fg, const std::vector<Point3>& dirs, CompGraph& g) const;
  NodeId query_semantic(NodeId fg, CompGraph& g) const;
  // fg is consulted only in stacked mode; pass kNoNode to have the geometry
  // branch evaluated internally.
  static constexpr NodeId kNoNode = -1;
  NodeId query_instance(const std::vector<Point3>& xs, CompGraph& g, NodeId fg = kNoNode) const;

 private:
  FieldModel() = default;
  void build_tables(ParamStore* store, Rng* rng);

  FieldConfig config_;
  std::unique_ptr<HashGridTable> hhe1_;
  std::unique_ptr<HashGridTable> hhe2_;
};

}  // namespace pvlff
