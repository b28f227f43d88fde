// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "pvlff/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace pvlff {

Tensor& ParamStore::create(const std::string& name, std::vector<std::size_t> shape, double lr_scale) {
  PVLFF_CHECK(!has(name), "ParamStore::create: duplicate parameter '" + name + "'");
  ParamEntry e;
  e.value = Tensor(shape);
  e.grad = Tensor(shape);
  e.adam_m = Tensor(shape);
  e.adam_v = Tensor(std::move(shape));
  e.lr_scale = lr_scale;
  return entries_.emplace(name, std::move(e)).first->second.value;
}

ParamEntry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamStore::total_parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.set_zero();
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  // Validate every gradient before mutating anything so a bad step leaves
  // the store untouched.
  for (const auto& [name, e] : entries_) {
    if (!e.grad.all_finite()) {
      throw NumericError("adam_step: non-finite gradient in '" + name + "'");
    }
  }
  ++step_count_;
  double t = static_cast<double>(step_count_);
  double bc1 = 1.0 - std::pow(beta1, t);
  double bc2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, e] : entries_) {
    double rate = lr * e.lr_scale;
    const std::size_t n = e.value.size();
    double* p = e.value.data();
    const double* g = e.grad.data();
    double* m = e.adam_m.data();
    double* v = e.adam_v.data();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      p[i] -= rate * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

void ParamStore::ema_update_from(const ParamStore& live, double decay) {
  PVLFF_CHECK(entries_.size() == live.entries_.size(), "ema_update_from: entry sets differ");
  auto it = entries_.begin();
  auto jt = live.entries_.begin();
  for (; it != entries_.end(); ++it, ++jt) {
    PVLFF_CHECK(it->first == jt->first, "ema_update_from: entry names differ");
    Tensor& mine = it->second.value;
    const Tensor& theirs = jt->second.value;
    PVLFF_CHECK(mine.same_shape(theirs), "ema_update_from: shape mismatch");
    const std::size_t n = mine.size();
    for (std::size_t i = 0; i < n; ++i) {
      mine[i] = decay * mine[i] + (1.0 - decay) * theirs[i];
    }
  }
}

ParamStore ParamStore::clone_values() const {
  ParamStore out;
  for (const auto& [name, e] : entries_) {
    out.create(name, e.value.shape(), e.lr_scale) = e.value;
  }
  return out;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("tensor record: truncated file");
  return v;
}

}  // namespace

void ParamStore::write_tensor_records(std::ostream& out) const {
  for (const auto& [name, e] : entries_) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t d : e.value.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(e.value.data()),
              static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
}

void ParamStore::read_tensor_records(std::istream& in) {
  while (true) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.eof()) break;
    if (!in) throw DataError("tensor record: read failure");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("tensor record: truncated name");
    std::uint32_t rank = read_u32(in);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) shape[i] = read_u32(in);
    Tensor& t = create(name, std::move(shape));
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw DataError("tensor record: truncated values in '" + name + "'");
  }
}

void register_mlp(ParamStore& store, const std::string& name, std::size_t in_dim,
                  std::size_t hidden_dim, std::size_t out_dim, std::size_t n_layers, Rng& rng) {
  PVLFF_CHECK(n_layers >= 1, "register_mlp: need at least one layer");
  for (std::size_t k = 0; k < n_layers; ++k) {
    std::size_t fan_in = (k == 0) ? in_dim : hidden_dim;
    std::size_t fan_out = (k + 1 == n_layers) ? out_dim : hidden_dim;
    std::string base = name + ".l" + std::to_string(k);
    Tensor& w = store.create(base + ".w", {fan_out, fan_in});
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    store.create(base + ".b", std::vector<std::size_t>{fan_out});
  }
}

}  // namespace pvlff
