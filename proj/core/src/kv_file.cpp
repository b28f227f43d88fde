// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/kv_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "pvlff/errors.hpp"

namespace pvlff {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

std::vector<KvLine> parse_kv_lines(std::istream& in, const std::string& context) {
  std::vector<KvLine> out;
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& reason) {
    throw ConfigError(context + ":" + std::to_string(line_no) + ": " + reason);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    KvLine kv;
    kv.line = line_no;
    kv.key = trim(body.substr(0, eq));
    kv.value = trim(body.substr(eq + 1));
    if (!valid_key(kv.key)) fail("invalid key '" + kv.key + "'");
    if (kv.value.empty()) fail("missing value for key '" + kv.key + "'");
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KvLine> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_kv_lines(in, path);
}

}  // namespace pvlff
