// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/hash_grid.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"

namespace pvlff {

std::size_t HashGridConfig::level_resolution(std::size_t level) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(base_resolution) *
                                             std::pow(growth, static_cast<double>(level))));
}

void HashGridConfig::validate() const {
  if (levels == 0 || base_resolution == 0 || features == 0) {
    throw ConfigError("hash grid: levels, base_resolution and features must be positive");
  }
  if (growth <= 1.0) throw ConfigError("hash grid: growth factor must exceed 1");
  if (table_size == 0 || (table_size & (table_size - 1)) != 0) {
    throw ConfigError("hash grid: table_size must be a power of two");
  }
}

std::size_t hash_index(std::size_t level_resolution, const std::array<std::size_t, 3>& cell,
                       std::size_t table_size) {
  std::size_t side = level_resolution + 1;
  if (side * side * side <= table_size) {
    return (cell[2] * side + cell[1]) * side + cell[0];
  }
  std::uint32_t h = static_cast<std::uint32_t>(cell[0]) ^
                    (static_cast<std::uint32_t>(cell[1]) * 2654435761u) ^
                    (static_cast<std::uint32_t>(cell[2]) * 805459861u);
  return static_cast<std::size_t>(h) % table_size;
}

HashGridTable::HashGridTable(HashGridConfig config, std::string name)
    : config_(config), name_(std::move(name)) {
  config_.validate();
}

HashGridTable::HashGridTable(HashGridConfig config, std::string name, ParamStore& store, Rng& rng,
                             double lr_scale)
    : HashGridTable(config, std::move(name)) {
  for (std::size_t l = 0; l < config_.levels; ++l) {
    Tensor& t = store.create(level_param_name(l), {level_entry_count(l), config_.features}, lr_scale);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1e-4, 1e-4);
  }
}

HashGridTable HashGridTable::attach(HashGridConfig config, std::string name, ParamStore& store,
                                    double lr_scale) {
  HashGridTable table(config, std::move(name));
  for (std::size_t l = 0; l < config.levels; ++l) {
    const std::string pname = table.level_param_name(l);
    if (!store.has(pname)) throw DataError("hash grid attach: missing tensor '" + pname + "'");
    ParamEntry& e = store.entry(pname);
    if (e.value.rows() != table.level_entry_count(l) || e.value.cols() != config.features) {
      throw DataError("hash grid attach: shape mismatch in '" + pname + "'");
    }
    e.lr_scale = lr_scale;
  }
  return table;
}

bool HashGridTable::level_dense(std::size_t level) const {
  return config_.level_resolution(level) <= config_.dense_threshold;
}

std::size_t HashGridTable::level_entry_count(std::size_t level) const {
  if (level_dense(level)) {
    std::size_t side = config_.level_resolution(level) + 1;
    return side * side * side;
  }
  return config_.table_size;
}

std::string HashGridTable::level_param_name(std::size_t level) const {
  return name_ + ".level" + std::to_string(level);
}

namespace {

std::atomic<bool> g_clamp_warned{false};

Point3 clamp_to_unit_cube(const Point3& x) {
  Point3 c = x.cwiseMax(0.0).cwiseMin(1.0);
  if ((c - x).cwiseAbs().maxCoeff() > 1e-9 && !g_clamp_warned.exchange(true)) {
    std::cerr << "warning: encode received a point outside the unit cube; clamping "
              << "(reported once)\n";
  }
  return c;
}

struct CellWeights {
  std::array<std::size_t, 3> base;
  Point3 frac;
};

CellWeights cell_of(const Point3& x, std::size_t n) {
  CellWeights cw;
  for (int a = 0; a < 3; ++a) {
    double p = x[a] * static_cast<double>(n);
    double f = std::floor(p);
    // Points at the far face fall into the last cell with fraction 1.
    if (f > static_cast<double>(n - 1)) f = static_cast<double>(n - 1);
    cw.base[a] = static_cast<std::size_t>(f);
    cw.frac[a] = p - f;
  }
  return cw;
}

// Calls fn(corner_index, weight) for the 8 corners of the cell.
template <typename Fn>
void for_corners(const CellWeights& cw, std::size_t n, std::size_t entries, Fn fn) {
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        std::array<std::size_t, 3> corner = {cw.base[0] + static_cast<std::size_t>(dx),
                                             cw.base[1] + static_cast<std::size_t>(dy),
                                             cw.base[2] + static_cast<std::size_t>(dz)};
        double w = (dx ? cw.frac[0] : 1.0 - cw.frac[0]) * (dy ? cw.frac[1] : 1.0 - cw.frac[1]) *
                   (dz ? cw.frac[2] : 1.0 - cw.frac[2]);
        fn(hash_index(n, corner, entries), w);
      }
    }
  }
}

struct EncodeNode final : Node {
  const HashGridTable* table = nullptr;
  std::vector<Point3> points;  // already clamped

  void backward(CompGraph& g) override {
    const HashGridConfig& cfg = table->config();
    for (std::size_t l = 0; l < cfg.levels; ++l) {
      Tensor& gbuf = g.store()->grad(table->level_param_name(l));
      std::size_t n = cfg.level_resolution(l);
      std::size_t entries = table->level_entry_count(l);
      std::size_t col0 = l * cfg.features;
      // Serial scatter: corner indices collide across points.
      for (std::size_t r = 0; r < points.size(); ++r) {
        CellWeights cw = cell_of(points[r], n);
        for_corners(cw, n, entries, [&](std::size_t idx, double w) {
          for (std::size_t f = 0; f < cfg.features; ++f) {
            gbuf(idx, f) += w * adjoint(r, col0 + f);
          }
        });
      }
    }
  }
  const char* kind() const override { return "encode"; }
};

}  // namespace

NodeId encode(const HashGridTable& table, const std::vector<Point3>& points, CompGraph& graph) {
  PVLFF_CHECK(graph.store() != nullptr, "encode: graph has no ParamStore");
  const HashGridConfig& cfg = table.config();
  auto node = std::make_unique<EncodeNode>();
  node->table = &table;
  node->requires_grad = true;
  node->points.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) node->points[i] = clamp_to_unit_cube(points[i]);
  node->value = Tensor(points.size(), cfg.output_width());
  Tensor& out = node->value;

  // Gather per-level values for the table entries through the graph's store.
  for (std::size_t l = 0; l < cfg.levels; ++l) {
    const Tensor& entries_t = graph.store()->value(table.level_param_name(l));
    std::size_t n = cfg.level_resolution(l);
    std::size_t entries = table.level_entry_count(l);
    std::size_t col0 = l * cfg.features;
    const std::vector<Point3>& pts = node->points;
    ThreadPool::global().for_chunks(pts.size(), 1024, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        CellWeights cw = cell_of(pts[r], n);
        for (std::size_t f = 0; f < cfg.features; ++f) out(r, col0 + f) = 0.0;
        for_corners(cw, n, entries, [&](std::size_t idx, double w) {
          for (std::size_t f = 0; f < cfg.features; ++f) {
            out(r, col0 + f) += w * entries_t(idx, f);
          }
        });
      }
    });
  }
  return graph.add_node(std::move(node));
}

NodeId encode(const HashGridTable& table, const Point3& x, CompGraph& graph) {
  return encode(table, std::vector<Point3>{x}, graph);
}

void encode_backward(const HashGridTable& table, ParamStore& store, const Point3& x,
                     const Tensor& upstream) {
  const HashGridConfig& cfg = table.config();
  PVLFF_CHECK(upstream.size() == cfg.output_width(), "encode_backward: upstream width mismatch");
  Point3 p = clamp_to_unit_cube(x);
  for (std::size_t l = 0; l < cfg.levels; ++l) {
    Tensor& gbuf = store.grad(table.level_param_name(l));
    std::size_t n = cfg.level_resolution(l);
    std::size_t entries = table.level_entry_count(l);
    CellWeights cw = cell_of(p, n);
    for_corners(cw, n, entries, [&](std::size_t idx, double w) {
      for (std::size_t f = 0; f < cfg.features; ++f) {
        gbuf(idx, f) += w * upstream[l * cfg.features + f];
      }
    });
  }
}

}  // namespace pvlff
