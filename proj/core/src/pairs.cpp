// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/pairs.hpp"

#include "pvlff/errors.hpp"

namespace pvlff {

PairBatch sample_pairs(const std::vector<MaskProposal>& proposals, std::size_t anchors_per_step,
                       std::size_t negs_per_anchor, Rng& rng) {
  if (proposals.size() < 2)
    throw DataError("sample_pairs: frame needs at least 2 proposals");
  PVLFF_CHECK(anchors_per_step >= 1 && negs_per_anchor >= 1,
              "sample_pairs: empty batch requested");

  std::vector<std::vector<std::uint32_t>> pixels(proposals.size());
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    pixels[k] = proposals[k].mask.pixels();
    PVLFF_CHECK(!pixels[k].empty(), "sample_pairs: proposal with empty mask");
  }

  PairBatch batch;
  batch.negs_per_anchor = negs_per_anchor;
  batch.anchor_pixels.reserve(anchors_per_step);
  batch.anchor_proposals.reserve(anchors_per_step);
  batch.positive_pixels.reserve(anchors_per_step);
  batch.negative_pixels.reserve(anchors_per_step * negs_per_anchor);

  for (std::size_t a = 0; a < anchors_per_step; ++a) {
    std::size_t k = static_cast<std::size_t>(rng.next_below(proposals.size()));
    const auto& own = pixels[k];
    std::size_t ai = static_cast<std::size_t>(rng.next_below(own.size()));
    batch.anchor_pixels.push_back(own[ai]);
    batch.anchor_proposals.push_back(k);
    if (own.size() == 1) {
      batch.positive_pixels.push_back(own[ai]);  // singleton: positive = anchor
    } else {
      std::size_t pi = static_cast<std::size_t>(rng.next_below(own.size() - 1));
      if (pi >= ai) ++pi;  // uniform over the other pixels
      batch.positive_pixels.push_back(own[pi]);
    }
    for (std::size_t n = 0; n < negs_per_anchor; ++n) {
      std::size_t other = static_cast<std::size_t>(rng.next_below(proposals.size() - 1));
      if (other >= k) ++other;
      const auto& theirs = pixels[other];
      batch.negative_pixels.push_back(
          theirs[static_cast<std::size_t>(rng.next_below(theirs.size()))]);
    }
  }
  return batch;
}

}  // namespace pvlff
