// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace pvlff {

// One `key = value` assignment from a config file. Lines are independent:
// '#' starts a comment, blank lines are skipped, keys are [A-Za-z0-9_]+ and
// values are the trimmed remainder (which may contain spaces).
struct KvLine {
  std::size_t line = 0;  // 1-based
  std::string key;
  std::string value;
};

// Parses the whole stream; malformed lines raise ConfigError as
// "<context>:<line>: <reason>".
std::vector<KvLine> parse_kv_lines(std::istream& in, const std::string& context);
std::vector<KvLine> read_kv_file(const std::string& path);

}  // namespace pvlff
