// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "pvlff/field_model.hpp"
#include "pvlff/param_store.hpp"

namespace pvlff {

// Checkpoint file: magic "PVLF", format version u32, a fixed-width binary
// FieldConfig header (so inference can reject mismatched architectures),
// then tensor records until EOF. Round trips are byte-exact.
struct Checkpoint {
  FieldConfig config;
  ParamStore params;
};

void save_checkpoint(const std::string& path, const FieldConfig& config, const ParamStore& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pvlff
