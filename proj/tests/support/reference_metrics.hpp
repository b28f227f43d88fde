// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pvlff/inference.hpp"

namespace pvlff::refimpl {

// Brute-force evaluation oracles. Everything below recomputes overlaps with
// plain nested pixel scans — no confusion maps, no shared counting code with
// the library — so the two implementations only agree if both are right.

struct RefSemantic {
  bool defined = false;
  double miou = 0.0;
  double macc = 0.0;
};

RefSemantic semantic_oracle(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& gt,
                            const std::vector<char>& ignore,
                            const std::vector<std::uint32_t>& class_set);

struct RefPanoptic {
  bool defined = false;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
};

RefPanoptic panoptic_oracle(const pvlff::PanopticMap& pred, const pvlff::PanopticMap& gt,
                            const std::vector<char>& ignore);

struct RefCoverage {
  bool defined = false;
  double mcov = 0.0;
  double mwcov = 0.0;
};

RefCoverage coverage_oracle(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& gt,
                            const std::vector<char>& ignore);

}  // namespace pvlff::refimpl
