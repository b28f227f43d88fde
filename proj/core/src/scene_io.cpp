// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/scene_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "json.hpp"
#include "pvlff/errors.hpp"
#include "pvlff/feature_map.hpp"
#include "pvlff/mask.hpp"
#include "pvlff/png_io.hpp"

namespace pvlff {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string frame_file(const std::string& stem, std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%04zu.%s", i, ext);
  return stem + buf;
}

std::string pose_file(std::size_t i) { return frame_file("poses/pose", i, "txt"); }

const json& need(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key)) throw DataError(file + ": missing field '" + key + "'");
  return j.at(key);
}

void expect_map(const FeatureMap& m, FeatureDType dtype, std::size_t h, std::size_t w,
                std::size_t c, const std::string& path) {
  static const char* kNames[] = {"f32", "u16", "u8"};
  if (m.dtype != dtype) {
    throw DataError(path + ": dtype " + kNames[static_cast<int>(m.dtype)] + ", expected " +
                    kNames[static_cast<int>(dtype)]);
  }
  if (m.height != h || m.width != w || m.channels != c) {
    throw DataError(path + ": shape " + std::to_string(m.height) + "x" +
                    std::to_string(m.width) + "x" + std::to_string(m.channels) +
                    ", expected " + std::to_string(h) + "x" + std::to_string(w) + "x" +
                    std::to_string(c));
  }
}

std::vector<float> tensor_to_f32(const Tensor& t) {
  std::vector<float> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<float>(t[i]);
  return out;
}

void write_pose(const std::string& path, const Eigen::Matrix4d& pose) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(17);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << pose(r, c) << (c == 3 ? "" : " ");
    out << "\n";
  }
  if (!out) throw DataError("write to " + path + " failed");
}

Eigen::Matrix4d read_pose(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Eigen::Matrix4d pose;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!(in >> pose(r, c))) throw DataError(path + ": expected 16 numeric values");
      if (!std::isfinite(pose(r, c))) throw DataError(path + ": non-finite entry");
    }
  }
  const Eigen::RowVector4d bottom = pose.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw DataError(path + ": bottom row must be 0 0 0 1");
  }
  const Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw DataError(path + ": rotation not orthonormal");
  }
  return pose;
}

std::vector<std::uint16_t> ids_to_u16(const std::vector<std::uint32_t>& ids,
                                      const std::string& what) {
  std::vector<std::uint16_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] > 0xffff) {
      throw DataError(what + " id " + std::to_string(ids[i]) + " exceeds the u16 file format");
    }
    out[i] = static_cast<std::uint16_t>(ids[i]);
  }
  return out;
}

}  // namespace

void save_scene(const std::string& dir, const Scene& scene) {
  if (scene.width == 0 || scene.height == 0) throw DataError("scene resolution is zero");
  if (scene.frames.empty()) throw DataError("scene has no frames");
  if (scene.classes.empty()) throw DataError("scene has no class table");
  const std::size_t n = scene.pixel_count();

  for (const char* sub : {"poses", "rgb", "depth", "embed", "masks", "gt_class", "gt_instance"}) {
    fs::create_directories(fs::path(dir) / sub);
  }

  json j;
  j["format"] = "pvlff-scene";
  j["version"] = 1;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["frame_count"] = scene.frames.size();
  j["embed_width"] = scene.embed_width;
  j["seed"] = scene.seed;
  j["intrinsics"] = {{"fx", scene.intrinsics.fx},
                     {"fy", scene.intrinsics.fy},
                     {"cx", scene.intrinsics.cx},
                     {"cy", scene.intrinsics.cy}};
  j["bbox"] = {{"lo", {scene.bbox.lo.x(), scene.bbox.lo.y(), scene.bbox.lo.z()}},
               {"hi", {scene.bbox.hi.x(), scene.bbox.hi.y(), scene.bbox.hi.z()}}};
  j["generator"] = {{"embed_noise", scene.provenance.embed_noise},
                    {"split_prob", scene.provenance.split_prob},
                    {"drop_prob", scene.provenance.drop_prob},
                    {"erosion_radius", scene.provenance.erosion_radius},
                    {"multi_level", scene.provenance.multi_level}};
  json classes = json::array();
  for (const ClassInfo& c : scene.classes) {
    if (c.embedding.size() != scene.embed_width) {
      throw DataError("class '" + c.name + "' embedding width " +
                      std::to_string(c.embedding.size()) + " != " +
                      std::to_string(scene.embed_width));
    }
    std::vector<double> embed(c.embedding.size());
    for (std::size_t i = 0; i < embed.size(); ++i) embed[i] = c.embedding[i];
    classes.push_back({{"name", c.name}, {"thing", c.thing}, {"embedding", embed}});
  }
  j["classes"] = classes;
  json poses = json::array();
  for (std::size_t i = 0; i < scene.frames.size(); ++i) poses.push_back(pose_file(i));
  j["poses"] = poses;

  {
    const std::string path = (fs::path(dir) / "manifest.json").string();
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write to " + path + " failed");
  }

  const auto h32 = static_cast<std::uint32_t>(scene.height);
  const auto w32 = static_cast<std::uint32_t>(scene.width);
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const Frame& f = scene.frames[i];
    if (f.rgb.rows() != n || f.rgb.cols() != 3 || f.depth.size() != n ||
        f.depth_valid.size() != n || f.embed.rows() != n ||
        f.embed.cols() != scene.embed_width || f.gt_class.size() != n ||
        f.gt_instance.size() != n) {
      throw DataError("frame " + std::to_string(i) + " rasters disagree with the manifest shape");
    }
    write_pose((fs::path(dir) / pose_file(i)).string(), f.cam_to_world);

    RgbImage rgb;
    rgb.width = scene.width;
    rgb.height = scene.height;
    rgb.pixels.resize(3 * n);
    for (std::size_t p = 0; p < n; ++p) {
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::min(1.0, std::max(0.0, f.rgb(p, ch)));
        rgb.pixels[3 * p + ch] = static_cast<std::uint8_t>(std::lround(255.0 * v));
      }
    }
    write_png_rgb((fs::path(dir) / frame_file("rgb/frame", i, "png")).string(), rgb);

    write_feature_map_file((fs::path(dir) / frame_file("depth/frame", i, "pvfm")).string(),
                           FeatureMap::from_f32(h32, w32, 1, tensor_to_f32(f.depth)));
    std::vector<std::uint8_t> valid(n);
    for (std::size_t p = 0; p < n; ++p) valid[p] = f.depth_valid[p] ? 1 : 0;
    write_feature_map_file((fs::path(dir) / frame_file("depth/valid", i, "pvfm")).string(),
                           FeatureMap::from_u8(h32, w32, 1, std::move(valid)));
    write_feature_map_file(
        (fs::path(dir) / frame_file("embed/frame", i, "pvfm")).string(),
        FeatureMap::from_f32(h32, w32, static_cast<std::uint32_t>(scene.embed_width),
                             tensor_to_f32(f.embed)));
    write_masks_file((fs::path(dir) / frame_file("masks/frame", i, "msk")).string(), f.proposals);
    write_feature_map_file((fs::path(dir) / frame_file("gt_class/frame", i, "pvfm")).string(),
                           FeatureMap::from_u16(h32, w32, 1, ids_to_u16(f.gt_class, "class")));
    write_feature_map_file(
        (fs::path(dir) / frame_file("gt_instance/frame", i, "pvfm")).string(),
        FeatureMap::from_u16(h32, w32, 1, ids_to_u16(f.gt_instance, "instance")));
  }
}

Scene load_scene(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) throw DataError("cannot open " + manifest_path);
  json j;
  try {
    j = json::parse(manifest_in);
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }

  Scene scene;
  std::size_t frame_count = 0;
  std::vector<std::string> pose_paths;
  try {
    scene.width = need(j, "width", manifest_path).get<std::size_t>();
    scene.height = need(j, "height", manifest_path).get<std::size_t>();
    frame_count = need(j, "frame_count", manifest_path).get<std::size_t>();
    scene.embed_width = need(j, "embed_width", manifest_path).get<std::size_t>();
    scene.seed = need(j, "seed", manifest_path).get<std::uint64_t>();
    const json& intr = need(j, "intrinsics", manifest_path);
    scene.intrinsics.fx = need(intr, "fx", manifest_path).get<double>();
    scene.intrinsics.fy = need(intr, "fy", manifest_path).get<double>();
    scene.intrinsics.cx = need(intr, "cx", manifest_path).get<double>();
    scene.intrinsics.cy = need(intr, "cy", manifest_path).get<double>();
    const json& bbox = need(j, "bbox", manifest_path);
    const auto lo = need(bbox, "lo", manifest_path).get<std::vector<double>>();
    const auto hi = need(bbox, "hi", manifest_path).get<std::vector<double>>();
    if (lo.size() != 3 || hi.size() != 3) {
      throw DataError(manifest_path + ": bbox lo/hi must have 3 entries");
    }
    scene.bbox.lo = Point3(lo[0], lo[1], lo[2]);
    scene.bbox.hi = Point3(hi[0], hi[1], hi[2]);
    if (j.contains("generator")) {
      const json& g = j.at("generator");
      scene.provenance.embed_noise = need(g, "embed_noise", manifest_path).get<double>();
      scene.provenance.split_prob = need(g, "split_prob", manifest_path).get<double>();
      scene.provenance.drop_prob = need(g, "drop_prob", manifest_path).get<double>();
      scene.provenance.erosion_radius =
          need(g, "erosion_radius", manifest_path).get<std::uint32_t>();
      scene.provenance.multi_level = need(g, "multi_level", manifest_path).get<bool>();
    }
    for (const json& c : need(j, "classes", manifest_path)) {
      ClassInfo info;
      info.name = need(c, "name", manifest_path).get<std::string>();
      info.thing = need(c, "thing", manifest_path).get<bool>();
      const auto embed = need(c, "embedding", manifest_path).get<std::vector<double>>();
      if (embed.size() != scene.embed_width) {
        throw DataError(manifest_path + ": class '" + info.name + "' embedding has " +
                        std::to_string(embed.size()) + " entries, expected " +
                        std::to_string(scene.embed_width));
      }
      info.embedding = Tensor(1, scene.embed_width);
      for (std::size_t i = 0; i < embed.size(); ++i) {
        if (!std::isfinite(embed[i])) {
          throw DataError(manifest_path + ": class '" + info.name + "' embedding not finite");
        }
        info.embedding[i] = embed[i];
      }
      scene.classes.push_back(std::move(info));
    }
    pose_paths = need(j, "poses", manifest_path).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }

  if (scene.width == 0 || scene.height == 0) {
    throw DataError(manifest_path + ": field 'width'/'height' must be positive");
  }
  if (frame_count == 0) throw DataError(manifest_path + ": field 'frame_count' must be positive");
  if (scene.embed_width == 0) {
    throw DataError(manifest_path + ": field 'embed_width' must be positive");
  }
  if (scene.intrinsics.fx <= 0 || scene.intrinsics.fy <= 0) {
    throw DataError(manifest_path + ": intrinsics fx/fy must be positive");
  }
  if (scene.bbox.degenerate()) throw DataError(manifest_path + ": field 'bbox' is degenerate");
  if (scene.classes.empty()) throw DataError(manifest_path + ": field 'classes' is empty");
  if (pose_paths.size() != frame_count) {
    throw DataError(manifest_path + ": field 'poses' lists " + std::to_string(pose_paths.size()) +
                    " files for " + std::to_string(frame_count) + " frames");
  }
  scene.intrinsics.width = scene.width;
  scene.intrinsics.height = scene.height;

  const std::size_t n = scene.pixel_count();
  const auto h32 = scene.height;
  const auto w32 = scene.width;
  std::map<std::uint32_t, std::uint32_t> instance_class;  // cross-frame consistency
  for (std::size_t i = 0; i < frame_count; ++i) {
    Frame f;
    f.cam_to_world = read_pose((fs::path(dir) / pose_paths[i]).string());

    const std::string rgb_path = (fs::path(dir) / frame_file("rgb/frame", i, "png")).string();
    const RgbImage rgb = read_png_rgb(rgb_path);
    if (rgb.width != scene.width || rgb.height != scene.height) {
      throw DataError(rgb_path + ": image is " + std::to_string(rgb.width) + "x" +
                      std::to_string(rgb.height) + ", manifest says " +
                      std::to_string(scene.width) + "x" + std::to_string(scene.height));
    }
    f.rgb = Tensor(n, 3);
    for (std::size_t p = 0; p < n; ++p) {
      for (int ch = 0; ch < 3; ++ch) f.rgb(p, ch) = rgb.pixels[3 * p + ch] / 255.0;
    }

    const std::string depth_path = (fs::path(dir) / frame_file("depth/frame", i, "pvfm")).string();
    const FeatureMap depth = read_feature_map_file(depth_path);
    expect_map(depth, FeatureDType::kF32, h32, w32, 1, depth_path);
    const std::string valid_path = (fs::path(dir) / frame_file("depth/valid", i, "pvfm")).string();
    const FeatureMap valid = read_feature_map_file(valid_path);
    expect_map(valid, FeatureDType::kU8, h32, w32, 1, valid_path);
    f.depth = Tensor(n, 1);
    f.depth_valid.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      f.depth[p] = depth.f32[p];
      f.depth_valid[p] = valid.u8[p] != 0;
      if (f.depth_valid[p] && !(std::isfinite(f.depth[p]) && f.depth[p] > 0.0)) {
        throw DataError(depth_path + ": pixel " + std::to_string(p) +
                        " marked valid but depth is not a positive finite value");
      }
    }

    const std::string embed_path = (fs::path(dir) / frame_file("embed/frame", i, "pvfm")).string();
    const FeatureMap embed = read_feature_map_file(embed_path);
    expect_map(embed, FeatureDType::kF32, h32, w32, scene.embed_width, embed_path);
    f.embed = Tensor(n, scene.embed_width);
    for (std::size_t e = 0; e < embed.f32.size(); ++e) {
      if (!std::isfinite(embed.f32[e])) throw DataError(embed_path + ": non-finite value");
      f.embed[e] = embed.f32[e];
    }

    const std::string cls_path = (fs::path(dir) / frame_file("gt_class/frame", i, "pvfm")).string();
    const FeatureMap cls = read_feature_map_file(cls_path);
    expect_map(cls, FeatureDType::kU16, h32, w32, 1, cls_path);
    const std::string inst_path =
        (fs::path(dir) / frame_file("gt_instance/frame", i, "pvfm")).string();
    const FeatureMap inst = read_feature_map_file(inst_path);
    expect_map(inst, FeatureDType::kU16, h32, w32, 1, inst_path);
    f.gt_class.resize(n);
    f.gt_instance.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      f.gt_class[p] = cls.u16[p];
      f.gt_instance[p] = inst.u16[p];
      if (f.gt_class[p] >= scene.classes.size()) {
        throw DataError(cls_path + ": class id " + std::to_string(f.gt_class[p]) +
                        " outside the manifest class table");
      }
      const ClassInfo& info = scene.classes[f.gt_class[p]];
      if (!info.thing && f.gt_instance[p] != 0) {
        throw DataError(inst_path + ": stuff-class pixel " + std::to_string(p) +
                        " carries instance id " + std::to_string(f.gt_instance[p]));
      }
      if (f.gt_instance[p] != 0) {
        const auto [it, fresh] = instance_class.emplace(f.gt_instance[p], f.gt_class[p]);
        if (!fresh && it->second != f.gt_class[p]) {
          throw DataError(inst_path + ": instance " + std::to_string(f.gt_instance[p]) +
                          " maps to class " + std::to_string(f.gt_class[p]) + " here but class " +
                          std::to_string(it->second) + " elsewhere");
        }
      }
    }

    f.proposals = read_masks_file((fs::path(dir) / frame_file("masks/frame", i, "msk")).string(),
                                  static_cast<std::uint32_t>(i), n);
    scene.frames.push_back(std::move(f));
  }
  return scene;
}

}  // namespace pvlff
