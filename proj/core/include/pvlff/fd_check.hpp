// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include "pvlff/param_store.hpp"

namespace pvlff {

// Loss callable used by the gradient checker. When `record_grads` is true
// the function must accumulate dLoss/dParam into the store's gradient
// buffers (on top of whatever is there; the checker zeroes them first);
// either way it returns the scalar loss. Must be deterministic for a fixed
// store.
using LossFn = std::function<double(ParamStore& store, bool record_grads)>;

// Compares analytic gradients against central finite differences on
// `samples` randomly chosen parameter entries and returns the maximum
// relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
double finite_difference_check(const LossFn& loss_fn, ParamStore& store, double eps,
                               std::size_t samples, std::uint64_t rng_seed);

}  // namespace pvlff
