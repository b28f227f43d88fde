// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/scene_generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "pvlff/camera.hpp"
#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"
#include "pvlff/png_io.hpp"
#include "pvlff/scene_io.hpp"

namespace pvlff {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHitEps = 1e-9;
// Miss pixels render this flat color (exact u8 levels, so PNG is lossless).
constexpr double kBackground[3] = {26.0 / 255.0, 26.0 / 255.0, 31.0 / 255.0};

// Rasters are rounded to the storage grid at creation (u8 for RGB, f32 for
// depth and embeddings) so save_scene -> load_scene returns them unchanged.
double f32_round(double v) { return static_cast<double>(static_cast<float>(v)); }
double u8_round(double v) {
  return std::lround(255.0 * std::min(1.0, std::max(0.0, v))) / 255.0;
}

bool hit_sphere(const Point3& o, const Point3& d, const Primitive& prim, double& t, Point3& n) {
  const double radius = prim.size.x();
  const Point3 oc = o - prim.center;
  const double b = 2.0 * d.dot(oc);
  const double c = oc.squaredNorm() - radius * radius;
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double root = (-b - sq) / 2.0;
  if (root <= kHitEps) root = (-b + sq) / 2.0;
  if (root <= kHitEps) return false;
  t = root;
  n = (o + t * d - prim.center) / radius;
  return true;
}

bool hit_box(const Point3& o, const Point3& d, const Primitive& prim, double& t, Point3& n) {
  const Point3 lo = prim.center - prim.size / 2.0;
  const Point3 hi = prim.center + prim.size / 2.0;
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = -1, exit_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    const double inv = 1.0 / d[a];
    double ta = (lo[a] - o[a]) * inv;
    double tb = (hi[a] - o[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t_enter) {
      t_enter = ta;
      enter_axis = a;
    }
    if (tb < t_exit) {
      t_exit = tb;
      exit_axis = a;
    }
  }
  if (t_enter > t_exit || t_exit <= kHitEps) return false;
  n = Point3::Zero();
  if (t_enter > kHitEps) {
    t = t_enter;
    n[enter_axis] = d[enter_axis] > 0.0 ? -1.0 : 1.0;
  } else {  // origin inside the box: hit the exit face from within
    t = t_exit;
    n[exit_axis] = d[exit_axis] > 0.0 ? 1.0 : -1.0;
  }
  return true;
}

std::uint32_t root_instance(const Primitive& prim) {
  return prim.parent_instance > 0 ? prim.parent_instance : prim.instance_id;
}

// Base color key: instance id for things; class id offset past the instance
// palette for stuff primitives.
void base_color(const Primitive& prim, double rgb[3]) {
  const std::uint32_t key =
      prim.instance_id > 0 ? root_instance(prim) : 0x100u + prim.class_id;
  std::uint8_t c[3];
  label_color(key, c);
  for (int ch = 0; ch < 3; ++ch) rgb[ch] = c[ch] / 255.0;
}

void check_inside(const Primitive& prim, const Aabb& bbox, std::size_t index) {
  const Point3 half = prim.shape == Primitive::Shape::kSphere
                          ? Point3::Constant(prim.size.x())
                          : Point3(prim.size / 2.0);
  const Point3 lo = prim.center - half;
  const Point3 hi = prim.center + half;
  if ((lo.array() < bbox.lo.array()).any() || (hi.array() > bbox.hi.array()).any()) {
    throw ConfigError("primitive " + std::to_string(index) + " extends outside the scene bbox");
  }
}

}  // namespace

void MaskCorruption::validate() const {
  if (split_prob < 0.0 || split_prob > 1.0 || drop_prob < 0.0 || drop_prob > 1.0) {
    throw ConfigError("mask corruption probabilities must lie in [0,1]");
  }
}

void SyntheticSceneSpec::validate() const {
  if (width == 0 || height == 0) throw ConfigError("scene resolution must be positive");
  if (bbox.degenerate()) throw ConfigError("scene bbox is degenerate");
  if (classes.empty()) throw ConfigError("scene needs a class table");
  if (classes[0].thing) throw ConfigError("class 0 is the background and must be stuff");
  if (embed_width < classes.size()) {
    throw ConfigError("embed_width " + std::to_string(embed_width) + " cannot hold one unit axis per class (" +
                      std::to_string(classes.size()) + ")");
  }
  std::set<std::string> names;
  for (const ClassSpec& c : classes) {
    if (c.name.empty()) throw ConfigError("class names must be non-empty");
    if (!names.insert(c.name).second) throw ConfigError("duplicate class name '" + c.name + "'");
  }
  if (orbit.views == 0) throw ConfigError("camera orbit needs at least one view");
  if (orbit.radius * orbit.radius + orbit.height * orbit.height <= 0.0) {
    throw ConfigError("camera orbit coincides with its target");
  }
  if (orbit.fov_deg <= 0.0 || orbit.fov_deg >= 180.0) {
    throw ConfigError("field of view must lie in (0, 180) degrees");
  }
  if (embed_noise < 0.0) throw ConfigError("embedding noise must be non-negative");
  corruption.validate();

  std::set<std::uint32_t> parents;  // instance ids referenced as a parent
  for (const Primitive& p : primitives) {
    if (p.parent_instance > 0) parents.insert(p.parent_instance);
  }
  std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> id_use;  // id -> (root, class)
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    if (p.class_id >= classes.size()) {
      throw ConfigError("primitive " + std::to_string(i) + " uses class id " +
                        std::to_string(p.class_id) + " outside the class table");
    }
    if ((p.size.array() <= 0.0).any()) {
      throw ConfigError("primitive " + std::to_string(i) + " has non-positive size");
    }
    check_inside(p, bbox, i);
    const bool thing = classes[p.class_id].thing;
    if (thing && p.instance_id == 0) {
      throw ConfigError("primitive " + std::to_string(i) + " is a thing and needs an instance id");
    }
    if (!thing && (p.instance_id != 0 || p.parent_instance != 0)) {
      throw ConfigError("primitive " + std::to_string(i) +
                        " is stuff and cannot carry instance or parent ids");
    }
    if (p.parent_instance > 0 && parents.count(p.instance_id) > 0) {
      throw ConfigError("primitive " + std::to_string(i) +
                        " is both a part and a parent; hierarchies are single-level");
    }
    if (p.instance_id > 0) {
      const auto use = std::make_pair(root_instance(p), p.class_id);
      const auto [it, fresh] = id_use.emplace(p.instance_id, use);
      if (!fresh && it->second != use) {
        throw ConfigError("instance id " + std::to_string(p.instance_id) +
                          " used with conflicting object or class assignments");
      }
    }
  }
  // A parent grouping must agree on one class across its parts.
  std::map<std::uint32_t, std::uint32_t> root_class;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    if (p.instance_id == 0) continue;
    const auto [it, fresh] = root_class.emplace(root_instance(p), p.class_id);
    if (!fresh && it->second != p.class_id) {
      throw ConfigError("object " + std::to_string(root_instance(p)) +
                        " mixes classes across its parts");
    }
  }
}

std::vector<std::uint32_t> erode_pixels(const std::vector<std::uint32_t>& sorted_pixels,
                                        std::size_t width, std::size_t height,
                                        std::uint32_t radius) {
  if (radius == 0) return sorted_pixels;
  std::vector<char> in(width * height, 0);
  for (std::uint32_t p : sorted_pixels) {
    if (p >= in.size()) throw DataError("mask pixel " + std::to_string(p) + " outside the image");
    in[p] = 1;
  }
  const auto r = static_cast<std::ptrdiff_t>(radius);
  std::vector<std::uint32_t> out;
  for (std::uint32_t p : sorted_pixels) {
    const auto u = static_cast<std::ptrdiff_t>(p % width);
    const auto v = static_cast<std::ptrdiff_t>(p / width);
    bool keep = true;
    for (std::ptrdiff_t dv = -r; keep && dv <= r; ++dv) {
      for (std::ptrdiff_t du = -r; du <= r; ++du) {
        const std::ptrdiff_t uu = u + du, vv = v + dv;
        if (uu < 0 || vv < 0 || uu >= static_cast<std::ptrdiff_t>(width) ||
            vv >= static_cast<std::ptrdiff_t>(height) || !in[vv * width + uu]) {
          keep = false;
          break;
        }
      }
    }
    if (keep) out.push_back(p);
  }
  return out;
}

std::vector<MaskProposal> corrupt_masks(const std::vector<std::uint32_t>& gt_instance,
                                        std::size_t width, std::size_t height,
                                        const MaskCorruption& config, std::uint32_t frame,
                                        Rng& rng) {
  config.validate();
  if (gt_instance.size() != width * height) {
    throw DataError("instance map has " + std::to_string(gt_instance.size()) +
                    " pixels, expected " + std::to_string(width * height));
  }
  std::map<std::uint32_t, std::vector<std::uint32_t>> masks;
  for (std::size_t p = 0; p < gt_instance.size(); ++p) {
    if (gt_instance[p] > 0) masks[gt_instance[p]].push_back(static_cast<std::uint32_t>(p));
  }

  std::vector<MaskProposal> out;
  auto emit = [&](const std::vector<std::uint32_t>& px) {
    const std::vector<std::uint32_t> kept = erode_pixels(px, width, height, config.erosion_radius);
    if (kept.empty()) return;  // emptied by erosion
    MaskProposal mp;
    mp.frame = frame;
    mp.id = static_cast<std::uint32_t>(out.size()) + 1;
    mp.mask = RleMask::from_pixels(kept);
    out.push_back(std::move(mp));
  };

  for (const auto& [id, px] : masks) {
    if (rng.uniform() < config.drop_prob) continue;
    const bool split = rng.uniform() < config.split_prob && px.size() >= 2;
    if (!split) {
      emit(px);
      continue;
    }
    // Straight-line cut: order by projection onto a random direction and
    // break at the median, so both parts are non-empty.
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double nx = std::cos(angle), ny = std::sin(angle);
    std::vector<std::pair<double, std::uint32_t>> proj(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
      proj[i] = {nx * static_cast<double>(px[i] % width) + ny * static_cast<double>(px[i] / width),
                 px[i]};
    }
    std::sort(proj.begin(), proj.end());
    std::vector<std::uint32_t> lower, upper;
    for (std::size_t i = 0; i < proj.size(); ++i) {
      (i < proj.size() / 2 ? lower : upper).push_back(proj[i].second);
    }
    std::sort(lower.begin(), lower.end());
    std::sort(upper.begin(), upper.end());
    emit(lower);
    emit(upper);
    if (config.multi_level) emit(px);
  }
  return out;
}

Scene generate_scene(const SyntheticSceneSpec& spec, std::uint64_t seed) {
  spec.validate();

  Scene scene;
  scene.width = spec.width;
  scene.height = spec.height;
  scene.embed_width = spec.embed_width;
  scene.seed = seed;
  scene.bbox = spec.bbox;
  scene.provenance.embed_noise = spec.embed_noise;
  scene.provenance.split_prob = spec.corruption.split_prob;
  scene.provenance.drop_prob = spec.corruption.drop_prob;
  scene.provenance.erosion_radius = spec.corruption.erosion_radius;
  scene.provenance.multi_level = spec.corruption.multi_level;

  scene.intrinsics.width = spec.width;
  scene.intrinsics.height = spec.height;
  scene.intrinsics.fx =
      (static_cast<double>(spec.width) / 2.0) / std::tan(spec.orbit.fov_deg * kPi / 360.0);
  scene.intrinsics.fy = scene.intrinsics.fx;
  scene.intrinsics.cx = static_cast<double>(spec.width) / 2.0;
  scene.intrinsics.cy = static_cast<double>(spec.height) / 2.0;

  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    ClassInfo info;
    info.name = spec.classes[c].name;
    info.thing = spec.classes[c].thing;
    info.embedding = Tensor(1, spec.embed_width);
    info.embedding[c] = 1.0;
    scene.classes.push_back(std::move(info));
  }

  const std::size_t n = scene.pixel_count();
  std::vector<std::size_t> all_pixels(n);
  for (std::size_t p = 0; p < n; ++p) all_pixels[p] = p;

  scene.frames.resize(spec.orbit.views);
  const Rng base(seed);
  ThreadPool::global().for_chunks(spec.orbit.views, 1, [&](std::size_t, std::size_t begin,
                                                           std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      Rng rng = base.fork(f);
      Frame& frame = scene.frames[f];

      const double phi = 2.0 * kPi * static_cast<double>(f) / static_cast<double>(spec.orbit.views);
      const Point3 eye = spec.orbit.target + Point3(spec.orbit.radius * std::cos(phi),
                                                    spec.orbit.radius * std::sin(phi),
                                                    spec.orbit.height);
      frame.cam_to_world = look_at(eye, spec.orbit.target, Point3::UnitZ());

      const std::vector<Ray> rays =
          generate_rays(frame.cam_to_world, scene.intrinsics, all_pixels, scene.bbox);

      frame.rgb = Tensor(n, 3);
      frame.depth = Tensor(n, 1);
      frame.depth_valid.assign(n, false);
      frame.embed = Tensor(n, spec.embed_width);
      frame.gt_class.assign(n, 0);
      frame.gt_instance.assign(n, 0);
      std::vector<std::int32_t> prim_of(n, -1);

      for (std::size_t p = 0; p < n; ++p) {
        double best_t = std::numeric_limits<double>::infinity();
        int best = -1;
        Point3 best_n = Point3::UnitZ();
        for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
          double t = 0.0;
          Point3 normal;
          const bool hit = spec.primitives[k].shape == Primitive::Shape::kSphere
                               ? hit_sphere(rays[p].origin, rays[p].dir, spec.primitives[k], t, normal)
                               : hit_box(rays[p].origin, rays[p].dir, spec.primitives[k], t, normal);
          if (hit && t < best_t) {  // overlapping primitives: nearest hit wins
            best_t = t;
            best = static_cast<int>(k);
            best_n = normal;
          }
        }

        std::uint32_t cls = 0;
        double rgb[3] = {kBackground[0], kBackground[1], kBackground[2]};
        if (best >= 0) {
          const Primitive& prim = spec.primitives[best];
          cls = prim.class_id;
          prim_of[p] = best;
          frame.gt_instance[p] = prim.instance_id > 0 ? root_instance(prim) : 0;
          frame.depth[p] = f32_round(best_t);
          frame.depth_valid[p] = true;
          const double lambert = std::max(0.0, -rays[p].dir.dot(best_n));
          double base_rgb[3];
          base_color(prim, base_rgb);
          for (int ch = 0; ch < 3; ++ch) rgb[ch] = u8_round(base_rgb[ch] * (0.25 + 0.75 * lambert));
        }
        frame.gt_class[p] = cls;
        for (int ch = 0; ch < 3; ++ch) frame.rgb(p, ch) = rgb[ch];

        // Distillation target: the class unit vector, optionally perturbed
        // and re-normalized.
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.embed_width));
        e[cls] = 1.0;
        if (spec.embed_noise > 0.0) {
          for (Eigen::Index i = 0; i < e.size(); ++i) e[i] += spec.embed_noise * rng.normal();
          const double norm = e.norm();
          if (norm < 1e-9) {
            e.setZero();
            e[cls] = 1.0;
          } else {
            e /= norm;
          }
        }
        for (Eigen::Index i = 0; i < e.size(); ++i) {
          frame.embed(p, static_cast<std::size_t>(i)) = f32_round(e[i]);
        }
      }

      frame.proposals = corrupt_masks(frame.gt_instance, spec.width, spec.height, spec.corruption,
                                      static_cast<std::uint32_t>(f), rng);
      if (spec.corruption.multi_level) {
        // Geometric part proposals: each part primitive's visible pixels.
        for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
          if (spec.primitives[k].parent_instance == 0) continue;
          std::vector<std::uint32_t> px;
          for (std::size_t p = 0; p < n; ++p) {
            if (prim_of[p] == static_cast<std::int32_t>(k)) px.push_back(static_cast<std::uint32_t>(p));
          }
          const std::vector<std::uint32_t> kept =
              erode_pixels(px, spec.width, spec.height, spec.corruption.erosion_radius);
          if (kept.empty()) continue;
          MaskProposal mp;
          mp.frame = static_cast<std::uint32_t>(f);
          mp.id = static_cast<std::uint32_t>(frame.proposals.size()) + 1;
          mp.mask = RleMask::from_pixels(kept);
          frame.proposals.push_back(std::move(mp));
        }
      }
    }
  });
  return scene;
}

void generate_scene_dir(const SyntheticSceneSpec& spec, std::uint64_t seed,
                        const std::string& out_dir) {
  save_scene(out_dir, generate_scene(spec, seed));
}

}  // namespace pvlff
