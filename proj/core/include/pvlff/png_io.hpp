// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pvlff {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  std::size_t pixel_count() const { return width * height; }
};

void write_png_rgb(const std::string& path, const RgbImage& image);
RgbImage read_png_rgb(const std::string& path);

// Deterministic preview color for a label id (golden-angle hue walk);
// label 0 renders near-black so unlabeled regions stay visually quiet.
void label_color(std::uint32_t label, std::uint8_t rgb[3]);

// Renders a label raster with label_color — inspection aid for class and
// instance maps.
RgbImage colorize_labels(std::size_t width, std::size_t height,
                         const std::vector<std::uint32_t>& labels);

}  // namespace pvlff
