// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pvlff {

// Invalid user-supplied configuration (bad key, out-of-range value, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unreadable input data (scene files, checkpoints, images).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Internal invariant violation; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// Numerical failure during optimization (non-finite loss or gradient).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

#define PVLFF_CHECK(cond, msg)                    \
  do {                                            \
    if (!(cond)) throw ::pvlff::InternalError(msg); \
  } while (0)

}  // namespace pvlff
