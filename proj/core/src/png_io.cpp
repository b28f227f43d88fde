// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>

#include "pvlff/errors.hpp"

namespace pvlff {
namespace {

struct FileHandle {
  std::FILE* fp = nullptr;
  ~FileHandle() {
    if (fp) std::fclose(fp);
  }
};

}  // namespace

void write_png_rgb(const std::string& path, const RgbImage& image) {
  if (image.width == 0 || image.height == 0) {
    throw DataError("cannot write empty image to " + path);
  }
  if (image.pixels.size() != 3 * image.pixel_count()) {
    throw DataError("image buffer for " + path + " has " + std::to_string(image.pixels.size()) +
                    " bytes, expected " + std::to_string(3 * image.pixel_count()));
  }

  FileHandle file;
  file.fp = std::fopen(path.c_str(), "wb");
  if (!file.fp) throw DataError("cannot open " + path + " for writing");

  std::vector<png_bytep> rows(image.height);
  for (std::size_t v = 0; v < image.height; ++v) {
    rows[v] = const_cast<png_bytep>(image.pixels.data() + 3 * image.width * v);
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng info allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng failed writing " + path);
  }
  png_init_io(png, file.fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RgbImage read_png_rgb(const std::string& path) {
  FileHandle file;
  file.fp = std::fopen(path.c_str(), "rb");
  if (!file.fp) throw DataError("cannot open " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError(path + ": not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng info allocation failed");
  }

  RgbImage image;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng failed reading " + path);
  }
  png_init_io(png, file.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  // Only the writer's own format is accepted; anything else is a data error.
  if (png_get_bit_depth(png, info) != 8 ||
      png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path + ": expected 8-bit RGB PNG");
  }
  image.width = png_get_image_width(png, info);
  image.height = png_get_image_height(png, info);
  image.pixels.resize(3 * image.pixel_count());
  rows.resize(image.height);
  for (std::size_t v = 0; v < image.height; ++v) {
    rows[v] = image.pixels.data() + 3 * image.width * v;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void label_color(std::uint32_t label, std::uint8_t rgb[3]) {
  if (label == 0) {
    rgb[0] = rgb[1] = rgb[2] = 24;
    return;
  }
  // Golden-angle hue walk: consecutive ids land far apart on the wheel.
  const double hue = std::fmod(static_cast<double>(label) * 0.618033988749895, 1.0) * 6.0;
  const double s = 0.62, v = 0.92;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (sector % 6) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    case 5: r = v, g = p, b = q; break;
  }
  rgb[0] = static_cast<std::uint8_t>(std::lround(255.0 * r));
  rgb[1] = static_cast<std::uint8_t>(std::lround(255.0 * g));
  rgb[2] = static_cast<std::uint8_t>(std::lround(255.0 * b));
}

RgbImage colorize_labels(std::size_t width, std::size_t height,
                         const std::vector<std::uint32_t>& labels) {
  if (labels.size() != width * height) {
    throw DataError("label raster has " + std::to_string(labels.size()) +
                    " entries, expected " + std::to_string(width * height));
  }
  RgbImage image;
  image.width = width;
  image.height = height;
  image.pixels.resize(3 * labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    label_color(labels[p], image.pixels.data() + 3 * p);
  }
  return image;
}

}  // namespace pvlff
