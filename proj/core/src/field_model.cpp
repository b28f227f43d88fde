// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/field_model.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "pvlff/errors.hpp"

namespace pvlff {

InstanceArch instance_arch_from_string(const std::string& s) {
  if (s == "decoupled") return InstanceArch::kDecoupled;
  if (s == "shared_hhe") return InstanceArch::kSharedHhe;
  if (s == "stacked") return InstanceArch::kStacked;
  throw ConfigError("unknown instance architecture '" + s +
                    "' (expected decoupled, shared_hhe or stacked)");
}

std::string to_string(InstanceArch arch) {
  switch (arch) {
    case InstanceArch::kDecoupled: return "decoupled";
    case InstanceArch::kSharedHhe: return "shared_hhe";
    case InstanceArch::kStacked: return "stacked";
  }
  throw InternalError("unhandled InstanceArch");
}

void FieldConfig::validate() const {
  grid.validate();
  if (fg_width == 0 || semantic_width == 0 || instance_width == 0 || hidden_width == 0 ||
      head_layers == 0) {
    throw ConfigError("field config: widths and layer counts must be positive");
  }
}

std::array<double, 9> sh9(const Point3& d) {
  const double x = d.x(), y = d.y(), z = d.z();
  return {
      0.28209479177387814,
      0.4886025119029199 * y,
      0.4886025119029199 * z,
      0.4886025119029199 * x,
      1.0925484305920792 * x * y,
      1.0925484305920792 * y * z,
      0.31539156525252005 * (3.0 * z * z - 1.0),
      1.0925484305920792 * x * z,
      0.5462742152960396 * (x * x - y * y),
  };
}

namespace {

constexpr double kGridLrScale = 10.0;

std::size_t instance_in_width(const FieldConfig& cfg) {
  return cfg.arch == InstanceArch::kStacked ? cfg.fg_width : cfg.grid.output_width();
}

void validate_mlp(ParamStore& store, const std::string& name, std::size_t in_dim,
                  std::size_t hidden, std::size_t out_dim, std::size_t layers) {
  for (std::size_t k = 0; k < layers; ++k) {
    std::size_t fan_in = (k == 0) ? in_dim : hidden;
    std::size_t fan_out = (k + 1 == layers) ? out_dim : hidden;
    std::string base = name + ".l" + std::to_string(k);
    if (!store.has(base + ".w") || !store.has(base + ".b")) {
      throw DataError("field attach: missing tensor '" + base + "'");
    }
    const Tensor& w = store.value(base + ".w");
    if (w.rows() != fan_out || w.cols() != fan_in || store.value(base + ".b").size() != fan_out) {
      throw DataError("field attach: shape mismatch in '" + base + "'");
    }
  }
}

std::atomic<bool> g_dir_warned{false};

}  // namespace

FieldModel::FieldModel(FieldConfig config, ParamStore& store, Rng& rng) {
  config_ = config;
  config_.validate();
  hhe1_ = std::make_unique<HashGridTable>(config_.grid, "hhe1", store, rng, kGridLrScale);
  if (config_.arch == InstanceArch::kDecoupled) {
    hhe2_ = std::make_unique<HashGridTable>(config_.grid, "hhe2", store, rng, kGridLrScale);
  }
  std::size_t enc = config_.grid.output_width();
  register_mlp(store, "geo", enc, config_.hidden_width, config_.fg_width + 1, config_.head_layers,
               rng);
  register_mlp(store, "color", config_.fg_width + 9, config_.hidden_width, 3, config_.head_layers,
               rng);
  register_mlp(store, "semantic", config_.fg_width, config_.hidden_width, config_.semantic_width,
               config_.head_layers, rng);
  register_mlp(store, "instance", instance_in_width(config_), config_.hidden_width,
               config_.instance_width, config_.head_layers, rng);
}

FieldModel FieldModel::attach(FieldConfig config, ParamStore& store) {
  config.validate();
  FieldModel m;
  m.config_ = config;
  m.hhe1_ = std::make_unique<HashGridTable>(
      HashGridTable::attach(config.grid, "hhe1", store, kGridLrScale));
  if (config.arch == InstanceArch::kDecoupled) {
    m.hhe2_ = std::make_unique<HashGridTable>(
        HashGridTable::attach(config.grid, "hhe2", store, kGridLrScale));
  }
  std::size_t enc = config.grid.output_width();
  validate_mlp(store, "geo", enc, config.hidden_width, config.fg_width + 1, config.head_layers);
  validate_mlp(store, "color", config.fg_width + 9, config.hidden_width, 3, config.head_layers);
  validate_mlp(store, "semantic", config.fg_width, config.hidden_width, config.semantic_width,
               config.head_layers);
  validate_mlp(store, "instance", instance_in_width(config), config.hidden_width,
               config.instance_width, config.head_layers);
  return m;
}

const HashGridTable& FieldModel::hhe2() const {
  PVLFF_CHECK(hhe2_ != nullptr, "hhe2 requested but the architecture has none");
  return *hhe2_;
}

FieldModel::GeometryOut FieldModel::query_geometry(const std::vector<Point3>& xs,
                                                   CompGraph& g) const {
  NodeId enc = encode(*hhe1_, xs, g);
  NodeId raw = mlp_forward(*g.store(), "geo", enc, g);
  GeometryOut out;
  out.sigma = g.softplus(g.slice_cols(raw, 0, 1));
  out.fg = g.slice_cols(raw, 1, 1 + config_.fg_width);
  return out;
}

NodeId FieldModel::query_color(NodeId fg, const std::vector<Point3>& dirs, CompGraph& g) const {
  const Tensor& fgv = g.value(fg);
  PVLFF_CHECK(dirs.size() == fgv.rows(), "query_color: one direction per feature row required");
  Tensor dir_enc(dirs.size(), 9);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    Point3 d = dirs[i];
    double n = d.norm();
    if (std::abs(n - 1.0) > 1e-6) {
      if (!g_dir_warned.exchange(true)) {
        std::cerr << "warning: query_color received non-unit directions; normalizing "
                  << "(reported once)\n";
      }
      d /= n;
    }
    auto basis = sh9(d);
    for (std::size_t k = 0; k < 9; ++k) dir_enc(i, k) = basis[k];
  }
  NodeId in = g.concat_cols(fg, g.input(std::move(dir_enc)));
  return g.sigmoid(mlp_forward(*g.store(), "color", in, g));
}

NodeId FieldModel::query_semantic(NodeId fg, CompGraph& g) const {
  return mlp_forward(*g.store(), "semantic", fg, g);
}

NodeId FieldModel::query_instance(const std::vector<Point3>& xs, CompGraph& g, NodeId fg) const {
  NodeId in;
  switch (config_.arch) {
    case InstanceArch::kDecoupled:
      in = encode(*hhe2_, xs, g);
      break;
    case InstanceArch::kSharedHhe:
      in = encode(*hhe1_, xs, g);
      break;
    case InstanceArch::kStacked:
      in = (fg != kNoNode) ? fg : query_geometry(xs, g).fg;
      break;
    default:
      throw InternalError("unhandled InstanceArch");
  }
  return mlp_forward(*g.store(), "instance", in, g);
}

}  // namespace pvlff
