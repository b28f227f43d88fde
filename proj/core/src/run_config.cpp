// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>

#include "pvlff/errors.hpp"
#include "pvlff/kv_file.hpp"

namespace pvlff {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    bad_value(key, value, "a finite number");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(key, value, "true or false");
}

std::string format_size(std::size_t v) { return std::to_string(v); }

// Shortest decimal string that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

struct KeyEntry {
  RunConfigKeyInfo info;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define PVLFF_SIZE_KEY(name, module, field_expr, desc)                              \
  KeyEntry{{name, module, desc},                                                    \
           [](const RunConfig& c) { return format_size(c.field_expr); },            \
           [](RunConfig& c, const std::string& v) { c.field_expr = parse_size(name, v); }}
#define PVLFF_DOUBLE_KEY(name, module, field_expr, desc)                            \
  KeyEntry{{name, module, desc},                                                    \
           [](const RunConfig& c) { return format_double(c.field_expr); },          \
           [](RunConfig& c, const std::string& v) { c.field_expr = parse_double(name, v); }}
#define PVLFF_BOOL_KEY(name, module, field_expr, desc)                              \
  KeyEntry{{name, module, desc},                                                    \
           [](const RunConfig& c) { return format_bool(c.field_expr); },            \
           [](RunConfig& c, const std::string& v) { c.field_expr = parse_bool(name, v); }}

const std::vector<KeyEntry>& registry() {
  static const std::vector<KeyEntry> entries = {
      // encoding
      PVLFF_SIZE_KEY("grid_levels", "encoding", field.grid.levels, "resolution levels per hash encoding"),
      PVLFF_SIZE_KEY("grid_base_resolution", "encoding", field.grid.base_resolution, "cells per axis at the coarsest level"),
      PVLFF_DOUBLE_KEY("grid_growth", "encoding", field.grid.growth, "per-level resolution growth factor"),
      PVLFF_SIZE_KEY("grid_features", "encoding", field.grid.features, "feature width per grid entry"),
      PVLFF_SIZE_KEY("grid_table_size", "encoding", field.grid.table_size, "hashed-level entry count (power of two)"),
      PVLFF_SIZE_KEY("grid_dense_threshold", "encoding", field.grid.dense_threshold, "max resolution stored as a dense grid"),
      // fields
      PVLFF_SIZE_KEY("fg_width", "fields", field.fg_width, "geometric feature width"),
      PVLFF_SIZE_KEY("semantic_width", "fields", field.semantic_width, "semantic feature width; defaults to the scene's embedding width"),
      PVLFF_SIZE_KEY("instance_width", "fields", field.instance_width, "instance feature width"),
      PVLFF_SIZE_KEY("hidden_width", "fields", field.hidden_width, "hidden width of every head MLP"),
      PVLFF_SIZE_KEY("head_layers", "fields", field.head_layers, "layers per head MLP"),
      KeyEntry{{"arch", "fields", "instance head input: decoupled, shared_hhe or stacked"},
               [](const RunConfig& c) { return to_string(c.field.arch); },
               [](RunConfig& c, const std::string& v) { c.field.arch = instance_arch_from_string(v); }},
      // training
      PVLFF_SIZE_KEY("steps", "training", train.steps, "total optimization steps"),
      PVLFF_SIZE_KEY("epochs", "training", train.epochs, "slow-center refresh blocks"),
      PVLFF_SIZE_KEY("pixel_batch", "training", train.pixel_batch, "pixels per step for photometric/depth/semantic terms"),
      PVLFF_SIZE_KEY("anchors_per_step", "training", train.anchors_per_step, "contrastive anchor pixels per step"),
      PVLFF_SIZE_KEY("negs_per_anchor", "training", train.negs_per_anchor, "negative samples per anchor"),
      PVLFF_SIZE_KEY("samples_per_ray", "training", train.samples_per_ray, "volume-rendering samples per ray"),
      PVLFF_BOOL_KEY("stratified", "training", train.stratified, "jitter ray samples during training"),
      PVLFF_DOUBLE_KEY("lr", "training", train.lr, "Adam learning rate for MLP parameters"),
      PVLFF_DOUBLE_KEY("adam_beta1", "training", train.adam_beta1, "Adam first-moment decay"),
      PVLFF_DOUBLE_KEY("adam_beta2", "training", train.adam_beta2, "Adam second-moment decay"),
      PVLFF_DOUBLE_KEY("adam_eps", "training", train.adam_eps, "Adam epsilon"),
      PVLFF_DOUBLE_KEY("ema_decay", "training", train.ema_decay, "evaluation-copy parameter EMA decay"),
      PVLFF_DOUBLE_KEY("center_beta", "training", train.center_beta, "slow-center EMA decay"),
      PVLFF_SIZE_KEY("center_pixels_per_mask", "training", train.center_pixels_per_mask, "pixels rendered per proposal for slow centers"),
      // losses
      PVLFF_DOUBLE_KEY("w_rgb", "losses", train.weights.rgb, "photometric loss weight"),
      PVLFF_DOUBLE_KEY("w_depth", "losses", train.weights.depth, "depth loss weight"),
      PVLFF_DOUBLE_KEY("w_semantic", "losses", train.weights.semantic, "semantic distillation weight"),
      PVLFF_DOUBLE_KEY("w_contrastive", "losses", train.weights.contrastive, "contrastive loss weight"),
      PVLFF_DOUBLE_KEY("w_slow_center", "losses", train.weights.slow_center, "slow-center regularizer weight"),
      PVLFF_DOUBLE_KEY("tau", "losses", train.weights.tau, "contrastive softmax temperature"),
      // clustering
      KeyEntry{{"min_samples", "clustering", "neighbors defining the core distance"},
               [](const RunConfig& c) { return std::to_string(c.cluster.min_samples); },
               [](RunConfig& c, const std::string& v) {
                 c.cluster.min_samples = static_cast<int>(parse_size("min_samples", v));
               }},
      KeyEntry{{"min_cluster_size", "clustering", "smallest surviving condensed-tree cluster"},
               [](const RunConfig& c) { return std::to_string(c.cluster.min_cluster_size); },
               [](RunConfig& c, const std::string& v) {
                 c.cluster.min_cluster_size = static_cast<std::uint32_t>(parse_size("min_cluster_size", v));
               }},
      PVLFF_SIZE_KEY("cluster_sample", "inference", cluster_sample, "feature rows clustered before scene-wide assignment"),
      // run
      KeyEntry{{"seed", "run", "seed for every random choice in the run"},
               [](const RunConfig& c) { return std::to_string(c.train.seed); },
               [](RunConfig& c, const std::string& v) {
                 std::uint64_t s = 0;
                 const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                 if (ec != std::errc() || ptr != v.data() + v.size()) {
                   bad_value("seed", v, "a non-negative integer");
                 }
                 c.train.seed = s;
               }},
      PVLFF_SIZE_KEY("threads", "run", threads, "worker threads (results are identical for any value)"),
  };
  return entries;
}

#undef PVLFF_SIZE_KEY
#undef PVLFF_DOUBLE_KEY
#undef PVLFF_BOOL_KEY

const KeyEntry& find_entry(const std::string& key) {
  for (const KeyEntry& e : registry()) {
    if (e.info.key == key) return e;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<RunConfigKeyInfo>& run_config_keys() {
  static const std::vector<RunConfigKeyInfo> infos = [] {
    std::vector<RunConfigKeyInfo> v;
    for (const KeyEntry& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  find_entry(key).set(*this, value);
  explicit_.insert(key);
}

std::string RunConfig::get(const std::string& key) const { return find_entry(key).get(*this); }

bool RunConfig::was_set(const std::string& key) const { return explicit_.count(key) != 0; }

void RunConfig::apply_file(const std::string& path) {
  for (const KvLine& kv : read_kv_file(path)) {
    try {
      set(kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

void RunConfig::write_resolved(std::ostream& out) const {
  std::string module;
  for (const KeyEntry& e : registry()) {
    if (e.info.module != module) {
      module = e.info.module;
      out << "\n# " << module << "\n";
    }
    out << e.info.key << " = " << e.get(*this) << "\n";
  }
}

void RunConfig::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write resolved config to " + path);
  out << "# resolved run configuration\n";
  write_resolved(out);
  out.flush();
  if (!out) throw DataError("failed while writing resolved config to " + path);
}

void RunConfig::validate() const {
  field.validate();
  train.validate();
  cluster.validate();
  if (cluster_sample < 2) throw ConfigError("cluster_sample must be at least 2");
  if (threads == 0) throw ConfigError("threads must be positive");
}

}  // namespace pvlff
