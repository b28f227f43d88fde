// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/feature_map.hpp"

#include <fstream>

#include "pvlff/binio.hpp"
#include "pvlff/errors.hpp"

namespace pvlff {
namespace {

constexpr char kMagic[4] = {'P', 'V', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void FeatureMap::validate() const {
  const std::size_t n = element_count();
  const std::size_t have = dtype == FeatureDType::kF32   ? f32.size()
                           : dtype == FeatureDType::kU16 ? u16.size()
                                                         : u8.size();
  if (have != n) {
    throw DataError("feature map payload has " + std::to_string(have) +
                    " elements, header implies " + std::to_string(n));
  }
  const std::size_t others = f32.size() + u16.size() + u8.size() - have;
  if (others != 0) throw DataError("feature map carries payload of a foreign dtype");
}

FeatureMap FeatureMap::from_f32(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                                std::vector<float> data) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.dtype = FeatureDType::kF32;
  m.f32 = std::move(data);
  m.validate();
  return m;
}

FeatureMap FeatureMap::from_u16(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                                std::vector<std::uint16_t> data) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.dtype = FeatureDType::kU16;
  m.u16 = std::move(data);
  m.validate();
  return m;
}

FeatureMap FeatureMap::from_u8(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                               std::vector<std::uint8_t> data) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.dtype = FeatureDType::kU8;
  m.u8 = std::move(data);
  m.validate();
  return m;
}

void write_feature_map(std::ostream& out, const FeatureMap& map) {
  map.validate();
  out.write(kMagic, 4);
  binio::write_u32(out, kVersion);
  binio::write_u32(out, map.height);
  binio::write_u32(out, map.width);
  binio::write_u32(out, map.channels);
  binio::write_u32(out, static_cast<std::uint32_t>(map.dtype));
  switch (map.dtype) {
    case FeatureDType::kF32:
      for (float v : map.f32) binio::write_f32(out, v);
      break;
    case FeatureDType::kU16:
      for (std::uint16_t v : map.u16) binio::write_u16(out, v);
      break;
    case FeatureDType::kU8:
      for (std::uint8_t v : map.u8) binio::write_u8(out, v);
      break;
  }
  if (!out) throw DataError("feature map write failed");
}

FeatureMap read_feature_map(std::istream& in, const std::string& context) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError(context + ": not a feature map file (bad magic)");
  }
  const std::uint32_t version = binio::read_u32(in, context + " header");
  if (version != kVersion) {
    throw DataError(context + ": unsupported feature map version " + std::to_string(version));
  }
  FeatureMap m;
  m.height = binio::read_u32(in, context + " header");
  m.width = binio::read_u32(in, context + " header");
  m.channels = binio::read_u32(in, context + " header");
  const std::uint32_t tag = binio::read_u32(in, context + " header");
  if (tag > 2) throw DataError(context + ": unknown dtype tag " + std::to_string(tag));
  m.dtype = static_cast<FeatureDType>(tag);

  const std::size_t n = m.element_count();
  const std::string what = context + " payload";
  switch (m.dtype) {
    case FeatureDType::kF32:
      m.f32.reserve(n);
      for (std::size_t i = 0; i < n; ++i) m.f32.push_back(binio::read_f32(in, what));
      break;
    case FeatureDType::kU16:
      m.u16.reserve(n);
      for (std::size_t i = 0; i < n; ++i) m.u16.push_back(binio::read_u16(in, what));
      break;
    case FeatureDType::kU8:
      m.u8.reserve(n);
      for (std::size_t i = 0; i < n; ++i) m.u8.push_back(binio::read_u8(in, what));
      break;
  }
  return m;
}

void write_feature_map_file(const std::string& path, const FeatureMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_feature_map(out, map);
  out.flush();
  if (!out) throw DataError("write to " + path + " failed");
}

FeatureMap read_feature_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  FeatureMap m = read_feature_map(in, path);
  if (in.peek() != EOF) throw DataError(path + ": trailing bytes after payload");
  return m;
}

}  // namespace pvlff
