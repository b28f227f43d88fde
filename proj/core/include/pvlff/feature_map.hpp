// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pvlff {

// Dense raster container for one H x W x C map. On disk: magic "PVFM",
// version u32, H u32, W u32, C u32, dtype tag u32, then the payload as
// little-endian row-major scalars. Round trips are byte-exact on any host.
enum class FeatureDType : std::uint32_t { kF32 = 0, kU16 = 1, kU8 = 2 };

struct FeatureMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  FeatureDType dtype = FeatureDType::kF32;
  // Exactly the vector matching `dtype` is populated (H*W*C entries).
  std::vector<float> f32;
  std::vector<std::uint16_t> u16;
  std::vector<std::uint8_t> u8;

  std::size_t element_count() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  void validate() const;

  static FeatureMap from_f32(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                             std::vector<float> data);
  static FeatureMap from_u16(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                             std::vector<std::uint16_t> data);
  static FeatureMap from_u8(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                            std::vector<std::uint8_t> data);
};

void write_feature_map(std::ostream& out, const FeatureMap& map);
// `context` names the source (file path) in error messages.
FeatureMap read_feature_map(std::istream& in, const std::string& context);

void write_feature_map_file(const std::string& path, const FeatureMap& map);
// Rejects trailing bytes after the payload.
FeatureMap read_feature_map_file(const std::string& path);

}  // namespace pvlff
