// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/mask.hpp"

#include <algorithm>
#include <fstream>

#include "pvlff/binio.hpp"
#include "pvlff/errors.hpp"

namespace pvlff {

RleMask RleMask::from_pixels(const std::vector<std::uint32_t>& sorted_pixels) {
  RleMask m;
  std::size_t i = 0;
  while (i < sorted_pixels.size()) {
    std::uint32_t start = sorted_pixels[i];
    std::uint32_t len = 1;
    PVLFF_CHECK(i == 0 || sorted_pixels[i] > sorted_pixels[i - 1],
                "RleMask::from_pixels: pixels must be strictly increasing");
    while (i + 1 < sorted_pixels.size() && sorted_pixels[i + 1] == sorted_pixels[i] + 1) {
      ++i;
      ++len;
    }
    m.runs.emplace_back(start, len);
    ++i;
  }
  return m;
}

std::vector<std::uint32_t> RleMask::pixels() const {
  std::vector<std::uint32_t> out;
  out.reserve(pixel_count());
  for (const auto& [start, len] : runs) {
    for (std::uint32_t k = 0; k < len; ++k) out.push_back(start + k);
  }
  return out;
}

std::size_t RleMask::pixel_count() const {
  std::size_t n = 0;
  for (const auto& [start, len] : runs) n += len;
  return n;
}

bool RleMask::contains(std::uint32_t pixel) const {
  auto it = std::upper_bound(runs.begin(), runs.end(), pixel,
                             [](std::uint32_t p, const auto& run) { return p < run.first; });
  if (it == runs.begin()) return false;
  --it;
  return pixel >= it->first && pixel < it->first + it->second;
}

std::uint32_t RleMask::extent() const {
  if (runs.empty()) return 0;
  return runs.back().first + runs.back().second;
}

void write_masks(std::ostream& out, const std::vector<MaskProposal>& proposals) {
  binio::write_u32(out, static_cast<std::uint32_t>(proposals.size()));
  for (const MaskProposal& p : proposals) {
    binio::write_u32(out, p.id);
    binio::write_u32(out, static_cast<std::uint32_t>(p.mask.runs.size()));
    for (const auto& [start, len] : p.mask.runs) {
      binio::write_u32(out, start);
      binio::write_u32(out, len);
    }
  }
}

std::vector<MaskProposal> read_masks(std::istream& in, std::uint32_t frame,
                                     std::size_t pixel_limit, const std::string& context) {
  std::vector<MaskProposal> out;
  std::uint32_t count = binio::read_u32(in, context + ": proposal count");
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    MaskProposal p;
    p.frame = frame;
    p.id = binio::read_u32(in, context + ": proposal id");
    std::uint32_t n_runs = binio::read_u32(in, context + ": run count");
    p.mask.runs.reserve(n_runs);
    std::uint32_t prev_end = 0;
    for (std::uint32_t r = 0; r < n_runs; ++r) {
      std::uint32_t start = binio::read_u32(in, context + ": run start");
      std::uint32_t len = binio::read_u32(in, context + ": run length");
      if (len == 0) throw DataError(context + ": zero-length run");
      if (r > 0 && start < prev_end)
        throw DataError(context + ": runs out of order or overlapping");
      prev_end = start + len;
      p.mask.runs.emplace_back(start, len);
    }
    if (p.mask.pixel_count() == 0) throw DataError(context + ": empty proposal mask");
    if (p.mask.extent() > pixel_limit)
      throw DataError(context + ": mask exceeds frame resolution");
    out.push_back(std::move(p));
  }
  return out;
}

void write_masks_file(const std::string& path, const std::vector<MaskProposal>& proposals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open mask file for writing: " + path);
  write_masks(out, proposals);
  if (!out) throw DataError("failed writing mask file: " + path);
}

std::vector<MaskProposal> read_masks_file(const std::string& path, std::uint32_t frame,
                                          std::size_t pixel_limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mask file: " + path);
  return read_masks(in, frame, pixel_limit, path);
}

}  // namespace pvlff
