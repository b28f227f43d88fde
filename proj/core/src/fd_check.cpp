// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/fd_check.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "pvlff/errors.hpp"
#include "pvlff/rng.hpp"

namespace pvlff {

double finite_difference_check(const LossFn& loss_fn, ParamStore& store, double eps,
                               std::size_t samples, std::uint64_t rng_seed) {
  if (eps <= 0.0) throw ConfigError("finite_difference_check: eps must be positive");

  store.zero_grad();
  double base = loss_fn(store, true);
  if (!std::isfinite(base)) throw NumericError("finite_difference_check: non-finite loss");

  // Flat index space over every parameter entry, in name order.
  std::vector<std::pair<const std::string*, std::size_t>> flat;
  for (const auto& [name, e] : store.entries()) {
    for (std::size_t i = 0; i < e.value.size(); ++i) flat.emplace_back(&name, i);
  }
  PVLFF_CHECK(!flat.empty(), "finite_difference_check: store has no parameters");

  Rng rng(rng_seed);
  std::vector<std::size_t> picks;
  if (samples >= flat.size()) {
    picks.resize(flat.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  } else {
    picks = rng.sample_without_replacement(flat.size(), samples);
  }

  double max_rel = 0.0;
  for (std::size_t pick : picks) {
    const std::string& name = *flat[pick].first;
    std::size_t idx = flat[pick].second;
    double analytic = store.grad(name)[idx];

    Tensor& values = store.value(name);
    double saved = values[idx];
    values[idx] = saved + eps;
    double f_plus = loss_fn(store, false);
    values[idx] = saved - eps;
    double f_minus = loss_fn(store, false);
    values[idx] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw NumericError("finite_difference_check: non-finite loss at perturbed '" + name + "'");
    }

    double numeric = (f_plus - f_minus) / (2.0 * eps);
    // The denominator floor absorbs central-difference roundoff
    // (~|loss|*2^-53/eps) on entries whose true gradient is zero.
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
    max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
  }
  return max_rel;
}

}  // namespace pvlff
