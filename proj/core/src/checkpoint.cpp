// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pvlff/errors.hpp"

namespace pvlff {

namespace {

constexpr char kMagic[4] = {'P', 'V', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError(std::string("checkpoint: truncated ") + what);
  return v;
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& in, const char* what) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError(std::string("checkpoint: truncated ") + what);
  return v;
}

void write_config(std::ostream& out, const FieldConfig& c) {
  write_u32(out, static_cast<std::uint32_t>(c.grid.levels));
  write_u32(out, static_cast<std::uint32_t>(c.grid.base_resolution));
  write_f64(out, c.grid.growth);
  write_u32(out, static_cast<std::uint32_t>(c.grid.features));
  write_u32(out, static_cast<std::uint32_t>(c.grid.table_size));
  write_u32(out, static_cast<std::uint32_t>(c.grid.dense_threshold));
  write_u32(out, static_cast<std::uint32_t>(c.fg_width));
  write_u32(out, static_cast<std::uint32_t>(c.semantic_width));
  write_u32(out, static_cast<std::uint32_t>(c.instance_width));
  write_u32(out, static_cast<std::uint32_t>(c.hidden_width));
  write_u32(out, static_cast<std::uint32_t>(c.head_layers));
  write_u32(out, static_cast<std::uint32_t>(c.arch));
}

FieldConfig read_config(std::istream& in) {
  FieldConfig c;
  c.grid.levels = read_u32(in, "grid levels");
  c.grid.base_resolution = read_u32(in, "grid base resolution");
  c.grid.growth = read_f64(in, "grid growth");
  c.grid.features = read_u32(in, "grid features");
  c.grid.table_size = read_u32(in, "grid table size");
  c.grid.dense_threshold = read_u32(in, "grid dense threshold");
  c.fg_width = read_u32(in, "fg width");
  c.semantic_width = read_u32(in, "semantic width");
  c.instance_width = read_u32(in, "instance width");
  c.hidden_width = read_u32(in, "hidden width");
  c.head_layers = read_u32(in, "head layers");
  std::uint32_t arch = read_u32(in, "architecture flag");
  if (arch > static_cast<std::uint32_t>(InstanceArch::kStacked)) {
    throw DataError("checkpoint: unknown architecture flag " + std::to_string(arch));
  }
  c.arch = static_cast<InstanceArch>(arch);
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const FieldConfig& config, const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_config(out, config);
  params.write_tensor_records(out);
  if (!out) throw DataError("checkpoint: write failure on '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic in '" + path + "'");
  }
  std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config = read_config(in);
  ck.params.read_tensor_records(in);
  return ck;
}

}  // namespace pvlff
