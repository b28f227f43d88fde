// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pvlff/rng.hpp"
#include "pvlff/tensor.hpp"

namespace pvlff {

// One named trainable tensor with its gradient and Adam moment buffers.
struct ParamEntry {
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  // Per-entry learning-rate multiplier (hash tables train faster than MLPs).
  double lr_scale = 1.0;
};

// Named parameter tensors plus optimizer state. Iteration is always in name
// order (std::map), which makes the update order deterministic.
class ParamStore {
 public:
  Tensor& create(const std::string& name, std::vector<std::size_t> shape, double lr_scale = 1.0);
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  Tensor& value(const std::string& name) { return entry(name).value; }
  const Tensor& value(const std::string& name) const { return entry(name).value; }
  Tensor& grad(const std::string& name) { return entry(name).grad; }
  const Tensor& grad(const std::string& name) const { return entry(name).grad; }
  double lr_scale(const std::string& name) const { return entry(name).lr_scale; }

  ParamEntry& entry(const std::string& name);
  const ParamEntry& entry(const std::string& name) const;
  std::map<std::string, ParamEntry>& entries() { return entries_; }
  const std::map<std::string, ParamEntry>& entries() const { return entries_; }

  std::size_t step_count() const { return step_count_; }
  std::size_t total_parameter_count() const;

  void zero_grad();

  // Standard Adam with bias correction. The effective rate for an entry is
  // lr * entry.lr_scale. Aborts without touching any parameter if a gradient
  // contains a non-finite value, reporting the offending entry.
  void adam_step(double lr, double beta1, double beta2, double eps);

  // Exponential moving average tracking: this <- decay*this + (1-decay)*live.
  // Entry sets must match; optimizer state is not blended.
  void ema_update_from(const ParamStore& live, double decay);

  // Deep copy of values only (fresh zero grads/moments, step counter 0).
  ParamStore clone_values() const;

  // Tensor records: (name length u32, name bytes, rank u32, dims u32...,
  // values as 64-bit little-endian floats) per entry, in name order.
  void write_tensor_records(std::ostream& out) const;
  // Reads records until EOF, creating entries (lr_scale defaults to 1; call
  // sites re-apply scales after load).
  void read_tensor_records(std::istream& in);

 private:
  std::map<std::string, ParamEntry> entries_;
  std::size_t step_count_ = 0;
};

// Initializes an MLP's weights and biases under names
// "<name>.l<k>.w" (out x in) and "<name>.l<k>.b" (out). Hidden layers use
// ReLU (applied by mlp_forward); weights are Kaiming-uniform, biases zero.
void register_mlp(ParamStore& store, const std::string& name, std::size_t in_dim,
                  std::size_t hidden_dim, std::size_t out_dim, std::size_t n_layers, Rng& rng);

}  // namespace pvlff
