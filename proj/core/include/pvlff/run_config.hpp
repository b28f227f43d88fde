// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "pvlff/field_model.hpp"
#include "pvlff/hdbscan.hpp"
#include "pvlff/trainer.hpp"

namespace pvlff {

// Union of every tunable knob in the pipeline, addressable by a flat string
// key: encoding layout, model widths, training schedule, loss weights,
// clustering parameters, seed and thread count. Values come from a key=value
// config file plus command-line overrides; every consumer writes the fully
// resolved set back out so runs are reproducible from their artifacts.
struct RunConfig {
  FieldConfig field;      // grid_* and model width keys
  TrainConfig train;      // schedule, optimizer, loss weight and seed keys
  HdbscanConfig cluster;  // min_samples / min_cluster_size
  std::size_t cluster_sample = 4096;  // rows clustered before scene-wide assignment
  std::size_t threads = 1;

  // Assigns one key. Unknown keys and unparseable values raise ConfigError.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  // True once `key` was assigned through set()/apply_file().
  bool was_set(const std::string& key) const;

  // Applies every assignment in the file, in order. Errors carry file:line.
  void apply_file(const std::string& path);

  // Echoes every key as `key = value`, grouped by owning module. The output
  // parses back through apply_file to the same configuration.
  void write_resolved(std::ostream& out) const;
  void write_file(const std::string& path) const;

  void validate() const;

 private:
  std::set<std::string> explicit_;
};

// One registry row: the key, the module that owns it, and a help line.
struct RunConfigKeyInfo {
  std::string key;
  std::string module;
  std::string description;
};

// Every key in registry (= output) order.
const std::vector<RunConfigKeyInfo>& run_config_keys();

}  // namespace pvlff
