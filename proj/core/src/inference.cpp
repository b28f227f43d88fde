// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"

namespace pvlff {

namespace {

constexpr double kZeroNorm = 1e-12;

double row_norm(const Tensor& t, std::size_t row) {
  double s = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) s += t(row, c) * t(row, c);
  return std::sqrt(s);
}

// Pixels of every instance segment (id > 0) grouped with per-class counts;
// ordered maps keep iteration deterministic and ascending.
std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> segment_class_counts(
    const std::vector<std::uint32_t>& class_ids, const std::vector<std::uint32_t>& instance_ids,
    const std::vector<char>& valid) {
  std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> counts;
  for (std::size_t p = 0; p < class_ids.size(); ++p) {
    if (!valid.empty() && !valid[p]) continue;
    if (instance_ids[p] == 0) continue;
    ++counts[instance_ids[p]][class_ids[p]];
  }
  return counts;
}

// Modal class, ties toward the lowest class id.
std::uint32_t modal_class(const std::map<std::uint32_t, std::size_t>& counts) {
  std::uint32_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [cls, count] : counts) {
    if (count > best_count) {  // ascending keys: strict > keeps the lowest id
      best = cls;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

std::size_t PromptSet::embed_width() const {
  return classes.empty() ? 0 : classes.front().embedding.size();
}

void PromptSet::validate() const {
  if (classes.empty()) throw DataError("prompt set has no classes");
  std::set<std::string> names;
  const std::size_t width = embed_width();
  for (const PromptClass& c : classes) {
    if (c.name.empty()) throw DataError("prompt class with empty name");
    if (!names.insert(c.name).second) throw DataError("duplicate prompt class '" + c.name + "'");
    if (c.embedding.size() != width || width == 0) {
      throw DataError("prompt class '" + c.name + "' has embedding width " +
                      std::to_string(c.embedding.size()) + ", expected " + std::to_string(width));
    }
    if (!c.embedding.all_finite()) {
      throw DataError("prompt class '" + c.name + "' has a non-finite embedding");
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < c.embedding.size(); ++i) {
      norm += c.embedding[i] * c.embedding[i];
    }
    if (std::sqrt(norm) <= kZeroNorm) {
      throw DataError("prompt class '" + c.name + "' has a zero embedding");
    }
  }
}

PromptSet parse_prompts(std::istream& in) {
  PromptSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    PromptClass cls;
    std::string kind;
    tokens >> cls.name >> kind;
    if (kind == "thing") {
      cls.thing = true;
    } else if (kind == "stuff") {
      cls.thing = false;
    } else {
      throw DataError("prompt line " + std::to_string(line_no) + ": expected thing|stuff, got '" +
                      kind + "'");
    }
    std::vector<double> values;
    double v = 0.0;
    while (tokens >> v) values.push_back(v);
    if (!tokens.eof()) {
      throw DataError("prompt line " + std::to_string(line_no) + ": malformed embedding value");
    }
    if (values.empty()) {
      throw DataError("prompt line " + std::to_string(line_no) + ": missing embedding values");
    }
    cls.embedding = Tensor(1, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) cls.embedding[i] = values[i];
    out.classes.push_back(std::move(cls));
  }
  out.validate();
  return out;
}

PromptSet read_prompts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prompt file " + path);
  try {
    return parse_prompts(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_prompts(std::ostream& out, const PromptSet& prompts) {
  prompts.validate();
  for (const PromptClass& c : prompts.classes) {
    out << c.name << ' ' << (c.thing ? "thing" : "stuff");
    char buf[32];
    for (std::size_t i = 0; i < c.embedding.size(); ++i) {
      std::snprintf(buf, sizeof(buf), " %.17g", c.embedding[i]);
      out << buf;
    }
    out << '\n';
  }
}

void write_prompts_file(const std::string& path, const PromptSet& prompts) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write prompt file " + path);
  write_prompts(out, prompts);
  if (!out) throw DataError("failed writing prompt file " + path);
}

SemanticAssignment assign_semantics(const Tensor& features, const PromptSet& prompts) {
  prompts.validate();
  if (features.cols() != prompts.embed_width()) {
    throw DataError("feature width " + std::to_string(features.cols()) +
                    " does not match prompt width " + std::to_string(prompts.embed_width()));
  }
  if (!features.all_finite()) throw DataError("semantic features must be finite");
  const std::size_t n = features.rows();
  const std::size_t k = prompts.size();
  std::vector<double> prompt_norm(k);
  for (std::size_t c = 0; c < k; ++c) prompt_norm[c] = row_norm(prompts.classes[c].embedding, 0);

  SemanticAssignment out;
  out.class_ids.assign(n, 0);
  out.similarities.assign(n, 0.0);
  out.valid.assign(n, 0);
  ThreadPool::global().for_chunks(n, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double fn = row_norm(features, p);
      if (fn <= kZeroNorm) continue;  // invalid pixel
      std::uint32_t best = 0;
      double best_sim = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        double dot = 0.0;
        const Tensor& e = prompts.classes[c].embedding;
        for (std::size_t i = 0; i < features.cols(); ++i) dot += features(p, i) * e[i];
        const double sim = dot / (fn * prompt_norm[c]);
        if (sim > best_sim) {  // ascending c: strict > keeps the lowest id
          best_sim = sim;
          best = static_cast<std::uint32_t>(c);
        }
      }
      out.class_ids[p] = best;
      out.similarities[p] = best_sim;
      out.valid[p] = 1;
    }
  });
  return out;
}

InstanceSegmentation segment_instances(const Tensor& features, const std::vector<char>& valid,
                                       const HdbscanConfig& config) {
  config.validate();
  if (!valid.empty() && valid.size() != features.rows()) {
    throw DataError("validity mask does not match feature rows");
  }
  if (!features.all_finite()) throw DataError("instance features must be finite");
  const std::size_t n = features.rows();

  InstanceSegmentation out;
  out.instance_ids.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (valid.empty() || valid[p]) out.tree_sources.push_back(static_cast<std::uint32_t>(p));
  }
  const std::size_t n_valid = out.tree_sources.size();
  if (n_valid == 0) return out;

  FeaturePointSet set;
  set.points = Tensor(n_valid, features.cols());
  set.sources = out.tree_sources;
  for (std::size_t r = 0; r < n_valid; ++r) {
    const std::size_t src = set.sources[r];
    double norm = row_norm(features, src);
    if (norm <= kZeroNorm) norm = 1.0;  // leave zero rows at the origin
    for (std::size_t c = 0; c < features.cols(); ++c) {
      set.points(r, c) = features(src, c) / norm;
    }
  }

  const HdbscanResult result = hdbscan(set.points, config);
  out.tree = result.tree;
  if (result.labeling.cluster_count() == 0) {
    // Too few points for a core distance, or everything is noise: a single
    // instance spanning the valid region.
    for (std::uint32_t src : out.tree_sources) out.instance_ids[src] = 1;
    return out;
  }
  const ClusterLabeling total = assign_noise(result.labeling, set.points);
  for (std::size_t r = 0; r < n_valid; ++r) {
    out.instance_ids[set.sources[r]] = static_cast<std::uint32_t>(total.labels[r] + 1);
  }
  return out;
}

std::vector<std::uint32_t> denoise_semantics(const std::vector<std::uint32_t>& class_ids,
                                             const std::vector<std::uint32_t>& instance_ids,
                                             const std::vector<char>& valid) {
  if (class_ids.size() != instance_ids.size() ||
      (!valid.empty() && valid.size() != class_ids.size())) {
    throw DataError("denoise maps must be aligned");
  }
  const auto counts = segment_class_counts(class_ids, instance_ids, valid);
  std::map<std::uint32_t, std::uint32_t> segment_mode;
  for (const auto& [segment, per_class] : counts) segment_mode[segment] = modal_class(per_class);

  std::vector<std::uint32_t> out = class_ids;
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (!valid.empty() && !valid[p]) continue;
    if (instance_ids[p] == 0) continue;
    out[p] = segment_mode.at(instance_ids[p]);
  }
  return out;
}

PanopticMap fuse_panoptic(const std::vector<std::uint32_t>& class_ids,
                          const std::vector<std::uint32_t>& instance_ids,
                          const PromptSet& prompts, const std::vector<char>& valid,
                          std::size_t width, std::size_t height) {
  prompts.validate();
  if (class_ids.size() != width * height || instance_ids.size() != class_ids.size() ||
      (!valid.empty() && valid.size() != class_ids.size())) {
    throw DataError("panoptic fusion maps must be aligned with the raster size");
  }
  for (std::size_t p = 0; p < class_ids.size(); ++p) {
    if (!valid.empty() && !valid[p]) continue;
    if (class_ids[p] >= prompts.size()) {
      throw DataError("class id " + std::to_string(class_ids[p]) + " outside the prompt set");
    }
  }

  const auto counts = segment_class_counts(class_ids, instance_ids, valid);
  std::map<std::uint32_t, std::uint32_t> segment_mode;
  for (const auto& [segment, per_class] : counts) segment_mode[segment] = modal_class(per_class);

  // Dense per-class renumbering of thing segments, ascending original ids.
  std::map<std::uint32_t, std::uint32_t> dense_id;
  std::map<std::uint32_t, std::uint32_t> next_per_class;
  for (const auto& [segment, mode] : segment_mode) {
    if (prompts.classes[mode].thing) dense_id[segment] = ++next_per_class[mode];
  }

  PanopticMap out;
  out.width = width;
  out.height = height;
  out.class_ids = class_ids;
  out.instance_ids.assign(class_ids.size(), 0);
  out.valid = valid.empty() ? std::vector<char>(class_ids.size(), 1) : valid;
  for (std::size_t p = 0; p < class_ids.size(); ++p) {
    if (!out.valid[p]) {
      out.class_ids[p] = 0;
      continue;
    }
    const std::uint32_t segment = instance_ids[p];
    if (segment == 0) continue;
    const std::uint32_t mode = segment_mode.at(segment);
    if (prompts.classes[mode].thing && class_ids[p] == mode) {
      out.instance_ids[p] = dense_id.at(segment);
    }
  }
  return out;
}

}  // namespace pvlff
