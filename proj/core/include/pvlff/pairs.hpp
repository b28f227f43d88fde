// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pvlff/mask.hpp"
#include "pvlff/rng.hpp"

namespace pvlff {

// One contrastive batch over a single frame. The anchor's drawn proposal is
// binding: with overlapping (multi-level) proposals a pixel can anchor one
// level and serve as a negative for a sibling level.
struct PairBatch {
  std::size_t negs_per_anchor = 0;
  std::vector<std::uint32_t> anchor_pixels;
  std::vector<std::size_t> anchor_proposals;   // index into the frame's list
  std::vector<std::uint32_t> positive_pixels;  // one per anchor, same proposal
  std::vector<std::uint32_t> negative_pixels;  // negs_per_anchor per anchor

  std::size_t size() const { return anchor_pixels.size(); }
};

// Draws anchors proposal-balanced (uniform over proposals, then uniform over
// that proposal's pixels), one positive from the anchor's proposal (a
// different pixel whenever the proposal has more than one), and negatives
// from uniformly chosen *other* proposals. Requires >= 2 proposals; callers
// skip the contrastive terms for frames that do not qualify.
PairBatch sample_pairs(const std::vector<MaskProposal>& proposals, std::size_t anchors_per_step,
                       std::size_t negs_per_anchor, Rng& rng);

}  // namespace pvlff
