// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pvlff {

// Run-length encoded binary mask over a row-major pixel index space.
// Runs are (start, length) pairs, sorted, non-overlapping, length >= 1.
struct RleMask {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;

  static RleMask from_pixels(const std::vector<std::uint32_t>& sorted_pixels);
  std::vector<std::uint32_t> pixels() const;
  std::size_t pixel_count() const;
  bool contains(std::uint32_t pixel) const;
  // Largest pixel index + 1; 0 for an empty mask.
  std::uint32_t extent() const;
};

// One instance-segment hypothesis for a single frame. Ids are local to the
// frame: proposals are not associated across frames.
struct MaskProposal {
  std::uint32_t frame = 0;
  std::uint32_t id = 0;
  RleMask mask;
};

// Binary proposal file: count u32, then per proposal
// (id u32, run count u32, runs as (start, length) u32 pairs).
void write_masks(std::ostream& out, const std::vector<MaskProposal>& proposals);
std::vector<MaskProposal> read_masks(std::istream& in, std::uint32_t frame,
                                     std::size_t pixel_limit, const std::string& context);

void write_masks_file(const std::string& path, const std::vector<MaskProposal>& proposals);
std::vector<MaskProposal> read_masks_file(const std::string& path, std::uint32_t frame,
                                          std::size_t pixel_limit);

}  // namespace pvlff
