// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/scene_spec.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "pvlff/errors.hpp"
#include "pvlff/kv_file.hpp"

namespace pvlff {
namespace {

class SpecReader {
 public:
  SpecReader(std::istream& in, std::string context) : context_(std::move(context)) {
    lines_ = parse_kv_lines(in, context_);
  }

  SyntheticSceneSpec run() {
    for (const KvLine& kv : lines_) {
      line_ = kv.line;
      dispatch(kv.key, kv.value);
    }
    line_ = 0;
    try {
      spec_.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(context_ + ": " + e.what());
    }
    return spec_;
  }

 private:
  [[noreturn]] void fail(const std::string& reason) const {
    if (line_ == 0) throw ConfigError(context_ + ": " + reason);
    throw ConfigError(context_ + ":" + std::to_string(line_) + ": " + reason);
  }

  void once(const std::string& key) {
    if (!seen_.insert(key).second) fail("duplicate key '" + key + "'");
  }

  // Tokenized numeric/word reads off one value string, with exact-arity checks.
  std::vector<std::string> tokens(const std::string& value) const {
    std::istringstream in(value);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

  double num(const std::string& key, const std::string& tok) const {
    std::istringstream in(tok);
    double v = 0.0;
    if (!(in >> v) || !in.eof() || !std::isfinite(v)) {
      fail("key '" + key + "': expected a finite number, got '" + tok + "'");
    }
    return v;
  }

  std::size_t size_of(const std::string& key, const std::string& tok) const {
    const double v = num(key, tok);
    if (v < 0.0 || v != std::floor(v)) {
      fail("key '" + key + "': expected a non-negative integer, got '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
  }

  std::uint32_t class_of(const std::string& name) const {
    const auto it = class_ids_.find(name);
    if (it == class_ids_.end()) {
      fail("unknown class '" + name + "' (declare classes before primitives)");
    }
    return it->second;
  }

  void add_class(const std::string& value) {
    const auto t = tokens(value);
    if (t.size() != 2 || (t[1] != "thing" && t[1] != "stuff")) {
      fail("key 'class': expected '<name> thing|stuff'");
    }
    if (class_ids_.count(t[0])) fail("duplicate class name '" + t[0] + "'");
    class_ids_[t[0]] = static_cast<std::uint32_t>(spec_.classes.size());
    spec_.classes.push_back({t[0], t[1] == "thing"});
  }

  void add_primitive(const std::string& key, const std::string& value, bool sphere) {
    const auto t = tokens(value);
    const std::size_t want = sphere ? 7 : 9;
    if (t.size() != want) {
      fail("key '" + key + "': expected " + std::to_string(want) +
           " fields (class instance parent center " + (sphere ? "radius" : "edges") + ")");
    }
    Primitive p;
    p.shape = sphere ? Primitive::Shape::kSphere : Primitive::Shape::kBox;
    p.class_id = class_of(t[0]);
    p.instance_id = static_cast<std::uint32_t>(size_of(key, t[1]));
    p.parent_instance = static_cast<std::uint32_t>(size_of(key, t[2]));
    p.center = Point3(num(key, t[3]), num(key, t[4]), num(key, t[5]));
    if (sphere) {
      const double r = num(key, t[6]);
      p.size = Point3(r, r, r);
    } else {
      p.size = Point3(num(key, t[6]), num(key, t[7]), num(key, t[8]));
    }
    spec_.primitives.push_back(p);
  }

  void dispatch(const std::string& key, const std::string& value) {
    const auto scalar = [&](auto&& assign) {
      once(key);
      assign();
    };
    if (key == "width") scalar([&] { spec_.width = size_of(key, value); });
    else if (key == "height") scalar([&] { spec_.height = size_of(key, value); });
    else if (key == "embed_width") scalar([&] { spec_.embed_width = size_of(key, value); });
    else if (key == "bbox") scalar([&] {
      const auto t = tokens(value);
      if (t.size() != 6) fail("key 'bbox': expected 6 numbers (lo xyz, hi xyz)");
      spec_.bbox.lo = Point3(num(key, t[0]), num(key, t[1]), num(key, t[2]));
      spec_.bbox.hi = Point3(num(key, t[3]), num(key, t[4]), num(key, t[5]));
    });
    else if (key == "orbit_target") scalar([&] {
      const auto t = tokens(value);
      if (t.size() != 3) fail("key 'orbit_target': expected 3 numbers");
      spec_.orbit.target = Point3(num(key, t[0]), num(key, t[1]), num(key, t[2]));
    });
    else if (key == "orbit_radius") scalar([&] { spec_.orbit.radius = num(key, value); });
    else if (key == "orbit_height") scalar([&] { spec_.orbit.height = num(key, value); });
    else if (key == "orbit_views") scalar([&] { spec_.orbit.views = size_of(key, value); });
    else if (key == "fov_deg") scalar([&] { spec_.orbit.fov_deg = num(key, value); });
    else if (key == "embed_noise") scalar([&] { spec_.embed_noise = num(key, value); });
    else if (key == "split_prob") scalar([&] { spec_.corruption.split_prob = num(key, value); });
    else if (key == "drop_prob") scalar([&] { spec_.corruption.drop_prob = num(key, value); });
    else if (key == "erosion_radius") scalar([&] {
      spec_.corruption.erosion_radius = static_cast<std::uint32_t>(size_of(key, value));
    });
    else if (key == "multi_level") scalar([&] {
      if (value != "true" && value != "false") fail("key 'multi_level': expected true or false");
      spec_.corruption.multi_level = value == "true";
    });
    else if (key == "class") add_class(value);
    else if (key == "sphere") add_primitive(key, value, true);
    else if (key == "box") add_primitive(key, value, false);
    else fail("unknown scene key '" + key + "'");
  }

  std::string context_;
  std::vector<KvLine> lines_;
  std::size_t line_ = 0;
  SyntheticSceneSpec spec_;
  std::set<std::string> seen_;
  std::map<std::string, std::uint32_t> class_ids_;
};

}  // namespace

SyntheticSceneSpec parse_scene_spec(std::istream& in, const std::string& context) {
  return SpecReader(in, context).run();
}

SyntheticSceneSpec read_scene_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene spec " + path);
  return parse_scene_spec(in, path);
}

}  // namespace pvlff
