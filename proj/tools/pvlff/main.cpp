// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line pipeline: generate -> train -> render -> segment -> evaluate
// -> tree. Progress goes to stderr, machine-readable outputs to files; every
// configurable subcommand echoes its resolved configuration next to its
// artifacts. Exit codes: 0 success, 1 invalid configuration or input data,
// 2 runtime failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pvlff/checkpoint.hpp"
#include "pvlff/errors.hpp"
#include "pvlff/feature_map.hpp"
#include "pvlff/parallel.hpp"
#include "pvlff/pipeline.hpp"
#include "pvlff/png_io.hpp"
#include "pvlff/run_config.hpp"
#include "pvlff/scene_generator.hpp"
#include "pvlff/scene_io.hpp"
#include "pvlff/scene_spec.hpp"

namespace fs = std::filesystem;
using namespace pvlff;

namespace {

std::string frame_file(const std::string& stem, std::size_t index, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%04zu.", index);
  return stem + buf + ext;
}

// One --<key> override option per registry entry; file values are applied
// first, then whichever flags the user passed.
struct KeyOverrides {
  std::vector<std::string> values;
  std::vector<CLI::Option*> options;

  void add_to(CLI::App& sub) {
    const auto& keys = run_config_keys();
    values.resize(keys.size());
    options.resize(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      RunConfig defaults;
      options[i] = sub.add_option("--" + keys[i].key, values[i],
                                  "[" + keys[i].module + "] " + keys[i].description +
                                      " (default: " + defaults.get(keys[i].key) + ")");
    }
  }

  RunConfig resolve(const std::string& config_file) const {
    RunConfig cfg;
    if (!config_file.empty()) cfg.apply_file(config_file);
    const auto& keys = run_config_keys();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (options[i] != nullptr && options[i]->count() > 0) cfg.set(keys[i].key, values[i]);
    }
    return cfg;
  }
};

std::vector<float> tensor_to_f32(const Tensor& t) {
  std::vector<float> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<float>(t[i]);
  return out;
}

FeatureMap u16_map(std::size_t h, std::size_t w, const std::vector<std::uint32_t>& ids,
                   const std::string& what) {
  std::vector<std::uint16_t> v(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] > 0xffff) {
      throw DataError(what + " id " + std::to_string(ids[i]) + " exceeds the u16 file format");
    }
    v[i] = static_cast<std::uint16_t>(ids[i]);
  }
  return FeatureMap::from_u16(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w), 1, v);
}

FeatureMap u8_map(std::size_t h, std::size_t w, const std::vector<char>& flags) {
  std::vector<std::uint8_t> v(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) v[i] = flags[i] ? 1 : 0;
  return FeatureMap::from_u8(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w), 1, v);
}

RgbImage tensor_to_image(std::size_t w, std::size_t h, const Tensor& rgb) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(3 * w * h);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::min(1.0, std::max(0.0, rgb[i]));
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return img;
}

std::vector<std::uint32_t> map_to_ids(const FeatureMap& m, const std::string& what) {
  if (m.dtype != FeatureDType::kU16) throw DataError(what + ": expected a u16 raster");
  return std::vector<std::uint32_t>(m.u16.begin(), m.u16.end());
}

std::vector<char> map_to_flags(const FeatureMap& m, const std::string& what) {
  if (m.dtype != FeatureDType::kU8) throw DataError(what + ": expected a u8 raster");
  std::vector<char> out(m.u8.size());
  for (std::size_t i = 0; i < m.u8.size(); ++i) out[i] = m.u8[i] ? 1 : 0;
  return out;
}

void expect_raster_shape(const FeatureMap& m, std::size_t h, std::size_t w,
                         const std::string& path) {
  if (m.height != h || m.width != w || m.channels != 1) {
    throw DataError(path + ": raster is " + std::to_string(m.height) + "x" +
                    std::to_string(m.width) + "x" + std::to_string(m.channels) + ", expected " +
                    std::to_string(h) + "x" + std::to_string(w) + "x1");
  }
}

// ---------------------------------------------------------------------------
// generate

void run_generate(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed,
                  std::size_t threads) {
  ThreadPool::set_global_threads(threads);
  const SyntheticSceneSpec spec = read_scene_spec_file(spec_path);
  std::cerr << "generating " << spec.orbit.views << " views at " << spec.width << "x"
            << spec.height << " (seed " << seed << ")\n";
  generate_scene_dir(spec, seed, out_dir);
  std::cerr << "wrote scene to " << out_dir << "\n";
}

// ---------------------------------------------------------------------------
// train

void run_train(const std::string& scene_dir, const std::string& out_dir,
               const std::string& config_file, const KeyOverrides& overrides) {
  RunConfig cfg = overrides.resolve(config_file);
  ThreadPool::set_global_threads(cfg.threads);
  std::cerr << "loading scene " << scene_dir << "\n";
  const Scene scene = load_scene(scene_dir);
  if (!cfg.was_set("semantic_width")) cfg.field.semantic_width = scene.embed_width;
  cfg.validate();
  fs::create_directories(out_dir);
  cfg.write_file(out_dir + "/run_config.txt");
  std::cerr << "training " << cfg.train.steps << " steps on " << scene.frames.size()
            << " frames\n";
  train_to_dir(scene, cfg.field, cfg.train, out_dir, &std::cerr);
  std::cerr << "wrote " << out_dir << "/checkpoint.pvlf\n";
}

// ---------------------------------------------------------------------------
// render

void run_render(const std::string& checkpoint_path, const std::string& scene_dir,
                const std::string& out_dir, std::size_t frame, const std::string& config_file,
                const KeyOverrides& overrides) {
  RunConfig cfg = overrides.resolve(config_file);
  ThreadPool::set_global_threads(cfg.threads);
  const Scene scene = load_scene(scene_dir);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  const FieldModel model = FieldModel::attach(ck.config, ck.params);
  RenderChannels ch;
  ch.color = ch.depth = ch.semantic = ch.instance = true;
  std::cerr << "rendering frame " << frame << "\n";
  const FrameRender r =
      render_frame(model, ck.params, scene, frame, ch, cfg.train.samples_per_ray);

  fs::create_directories(out_dir);
  cfg.write_file(out_dir + "/run_config.txt");
  const std::size_t h = scene.height, w = scene.width;
  write_png_rgb(out_dir + "/" + frame_file("rgb", frame, "png"), tensor_to_image(w, h, r.color));
  std::vector<float> depth(r.depth.begin(), r.depth.end());
  write_feature_map_file(out_dir + "/" + frame_file("depth", frame, "pvfm"),
                         FeatureMap::from_f32(static_cast<std::uint32_t>(h),
                                              static_cast<std::uint32_t>(w), 1, depth));
  write_feature_map_file(out_dir + "/" + frame_file("depth_valid", frame, "pvfm"),
                         u8_map(h, w, r.depth_valid));
  write_feature_map_file(
      out_dir + "/" + frame_file("semantic", frame, "pvfm"),
      FeatureMap::from_f32(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w),
                           static_cast<std::uint32_t>(r.semantic.cols()),
                           tensor_to_f32(r.semantic)));
  write_feature_map_file(
      out_dir + "/" + frame_file("instance", frame, "pvfm"),
      FeatureMap::from_f32(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w),
                           static_cast<std::uint32_t>(r.instance.cols()),
                           tensor_to_f32(r.instance)));
  std::cerr << "wrote renders to " << out_dir << "\n";
}

// ---------------------------------------------------------------------------
// segment

void write_segmentation(const std::string& out_dir, const Scene& scene, const PromptSet& prompts,
                        const SceneSegmentation& seg) {
  fs::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["format"] = "pvlff-seg";
  manifest["version"] = 1;
  manifest["width"] = seg.width;
  manifest["height"] = seg.height;
  manifest["frame_count"] = seg.raw_class.size();
  nlohmann::json classes = nlohmann::json::array();
  for (const PromptClass& c : prompts.classes) {
    classes.push_back({{"name", c.name}, {"thing", c.thing}});
  }
  manifest["classes"] = classes;
  std::ofstream mf(out_dir + "/seg_manifest.json");
  if (!mf) throw DataError("cannot write " + out_dir + "/seg_manifest.json");
  mf << manifest.dump(2) << "\n";

  const std::size_t h = scene.height, w = scene.width;
  for (std::size_t f = 0; f < seg.raw_class.size(); ++f) {
    const auto path = [&](const char* stem, const char* ext) {
      return out_dir + "/" + frame_file(stem, f, ext);
    };
    write_feature_map_file(path("sem_raw", "pvfm"), u16_map(h, w, seg.raw_class[f], "class"));
    write_feature_map_file(path("sem", "pvfm"), u16_map(h, w, seg.denoised_class[f], "class"));
    write_feature_map_file(path("instance", "pvfm"), u16_map(h, w, seg.instances[f], "instance"));
    write_feature_map_file(path("valid", "pvfm"), u8_map(h, w, seg.valid[f]));
    write_feature_map_file(path("pan_class", "pvfm"),
                           u16_map(h, w, seg.panoptic[f].class_ids, "class"));
    write_feature_map_file(path("pan_instance", "pvfm"),
                           u16_map(h, w, seg.panoptic[f].instance_ids, "instance"));
    write_png_rgb(path("sem", "png"), colorize_labels(w, h, seg.denoised_class[f]));
    write_png_rgb(path("instance", "png"), colorize_labels(w, h, seg.instances[f]));
    // Panoptic preview: one color per (class, id) pair.
    std::vector<std::uint32_t> keys(seg.panoptic[f].size());
    for (std::size_t p = 0; p < keys.size(); ++p) {
      keys[p] = seg.panoptic[f].valid[p]
                    ? seg.panoptic[f].class_ids[p] * 0x10000u + seg.panoptic[f].instance_ids[p]
                    : 0;
    }
    write_png_rgb(path("panoptic", "png"), colorize_labels(w, h, keys));
  }
}

void run_segment(const std::string& checkpoint_path, const std::string& scene_dir,
                 const std::string& out_dir, const std::string& prompts_file,
                 const std::string& config_file, const KeyOverrides& overrides) {
  RunConfig cfg = overrides.resolve(config_file);
  ThreadPool::set_global_threads(cfg.threads);
  const Scene scene = load_scene(scene_dir);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  const FieldModel model = FieldModel::attach(ck.config, ck.params);
  const PromptSet prompts =
      prompts_file.empty() ? scene_prompts(scene) : read_prompts_file(prompts_file);
  SegmentOptions opt;
  opt.cluster = cfg.cluster;
  opt.sample_size = cfg.cluster_sample;
  opt.samples_per_ray = cfg.train.samples_per_ray;
  opt.seed = cfg.train.seed;
  const SceneSegmentation seg = segment_scene(model, ck.params, scene, prompts, opt, &std::cerr);
  write_segmentation(out_dir, scene, prompts, seg);
  cfg.write_file(out_dir + "/run_config.txt");
  std::cerr << "wrote segmentation to " << out_dir << "\n";
}

// ---------------------------------------------------------------------------
// evaluate

void run_evaluate(const std::string& seg_dir, const std::string& scene_dir,
                  std::string csv_path) {
  const Scene scene = load_scene(scene_dir);
  const std::string manifest_path = seg_dir + "/seg_manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw DataError("cannot open " + manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  std::vector<std::string> class_names;
  std::size_t frames = 0;
  try {
    if (manifest.at("width").get<std::size_t>() != scene.width ||
        manifest.at("height").get<std::size_t>() != scene.height) {
      throw DataError("segmentation resolution does not match the scene");
    }
    frames = manifest.at("frame_count").get<std::size_t>();
    for (const auto& c : manifest.at("classes")) {
      class_names.push_back(c.at("name").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  if (frames != scene.frames.size()) {
    throw DataError("segmentation has " + std::to_string(frames) + " frames, scene has " +
                    std::to_string(scene.frames.size()));
  }

  std::vector<std::vector<std::uint32_t>> raw(frames), den(frames), inst(frames);
  std::vector<std::vector<char>> valid(frames);
  std::vector<PanopticMap> pan(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto load = [&](const char* stem) {
      const std::string path = seg_dir + "/" + frame_file(stem, f, "pvfm");
      FeatureMap m = read_feature_map_file(path);
      expect_raster_shape(m, scene.height, scene.width, path);
      return m;
    };
    raw[f] = map_to_ids(load("sem_raw"), "sem_raw");
    den[f] = map_to_ids(load("sem"), "sem");
    inst[f] = map_to_ids(load("instance"), "instance");
    valid[f] = map_to_flags(load("valid"), "valid");
    pan[f].width = scene.width;
    pan[f].height = scene.height;
    pan[f].class_ids = map_to_ids(load("pan_class"), "pan_class");
    pan[f].instance_ids = map_to_ids(load("pan_instance"), "pan_instance");
    pan[f].valid = valid[f];
  }

  const SegmentationScores scores = score_segmentation(scene, raw, den, inst, valid, pan);

  if (csv_path.empty()) csv_path = seg_dir + "/metrics.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write " + csv_path);
  write_metrics_csv(csv, scores, class_names);
  csv.flush();
  if (!csv) throw DataError("failed while writing " + csv_path);
  std::cerr << "wrote " << csv_path << "\n";

  const auto name_of = [&](std::uint32_t id) {
    return id < class_names.size() ? class_names[id] : std::to_string(id);
  };
  char line[160];
  if (scores.semantic.defined) {
    std::snprintf(line, sizeof(line), "semantic   mIoU %.4f  mAcc %.4f  (raw mIoU %.4f)",
                  scores.semantic.miou, scores.semantic.macc, scores.raw_semantic.miou);
    std::cout << line << "\n";
    for (const auto& [id, iou] : scores.semantic.class_iou) {
      std::snprintf(line, sizeof(line), "  iou %-16s %.4f", name_of(id).c_str(), iou);
      std::cout << line << "\n";
    }
  }
  if (scores.cov.defined) {
    std::snprintf(line, sizeof(line), "instances  mCov %.4f  mWCov %.4f", scores.cov.mcov,
                  scores.cov.mwcov);
    std::cout << line << "\n";
  }
  if (scores.scene_pq.defined) {
    std::snprintf(line, sizeof(line), "panoptic   PQ %.4f  SQ %.4f  RQ %.4f", scores.scene_pq.pq,
                  scores.scene_pq.sq, scores.scene_pq.rq);
    std::cout << line << "\n";
  }
}

// ---------------------------------------------------------------------------
// tree

void write_tree_outline(std::ostream& out, const CondensedTree& tree) {
  out << "# condensed cluster tree: " << tree.nodes.size() << " nodes over " << tree.point_count
      << " points\n";
  if (tree.nodes.empty()) return;
  std::vector<std::vector<std::uint32_t>> children(tree.nodes.size());
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    children[tree.nodes[i].parent].push_back(static_cast<std::uint32_t>(i));
  }
  const std::function<void(std::uint32_t, std::size_t)> emit = [&](std::uint32_t id,
                                                                   std::size_t depth) {
    const CondensedNode& node = tree.nodes[id];
    out << std::string(2 * depth, ' ') << "node " << id << ": size=" << node.size
        << " birth=" << node.lambda_birth << " death=" << node.lambda_death
        << " stability=" << node.stability << " direct_points=" << node.points.size()
        << " children=" << children[id].size() << "\n";
    for (std::uint32_t c : children[id]) emit(c, depth + 1);
  };
  emit(0, 0);
}

void run_tree(const std::string& checkpoint_path, const std::string& scene_dir,
              const std::string& out_path, const std::string& config_file,
              const KeyOverrides& overrides) {
  RunConfig cfg = overrides.resolve(config_file);
  ThreadPool::set_global_threads(cfg.threads);
  const Scene scene = load_scene(scene_dir);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  const FieldModel model = FieldModel::attach(ck.config, ck.params);
  SegmentOptions opt;
  opt.cluster = cfg.cluster;
  opt.sample_size = cfg.cluster_sample;
  opt.samples_per_ray = cfg.train.samples_per_ray;
  opt.seed = cfg.train.seed;
  const SceneSegmentation seg =
      segment_scene(model, ck.params, scene, scene_prompts(scene), opt, &std::cerr);

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  out << "# resolved run configuration\n";
  std::ostringstream cfg_text;
  cfg.write_resolved(cfg_text);
  std::istringstream cfg_lines(cfg_text.str());
  std::string line;
  while (std::getline(cfg_lines, line)) {
    if (!line.empty() && line[0] != '#') out << "# " << line << "\n";
  }
  write_tree_outline(out, seg.tree);
  out.flush();
  if (!out) throw DataError("failed while writing " + out_path);
  std::cerr << "wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoptic vision-language feature fields: synthetic scenes, training, "
               "open-vocabulary segmentation and evaluation"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // generate
  auto* gen = app.add_subcommand("generate", "Render a synthetic scene directory from a spec");
  std::string gen_spec_pos, gen_spec_flag, gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_threads = 1;
  gen->add_option("spec-file", gen_spec_pos, "scene spec file");
  gen->add_option("--spec", gen_spec_flag, "scene spec file (alternative to the positional)");
  gen->add_option("--out", gen_out, "output scene directory")->required();
  gen->add_option("--seed", gen_seed, "generator seed (default: 0)");
  gen->add_option("--threads", gen_threads, "worker threads (default: 1)");
  gen->callback([&] {
    if (gen_spec_pos.empty() == gen_spec_flag.empty()) {
      throw ConfigError("generate: pass exactly one scene spec (positional or --spec)");
    }
    run_generate(gen_spec_pos.empty() ? gen_spec_flag : gen_spec_pos, gen_out, gen_seed,
                 gen_threads);
  });

  // train
  auto* train = app.add_subcommand("train", "Optimize a feature field on a scene directory");
  std::string train_scene, train_out, train_config;
  KeyOverrides train_keys;
  train->add_option("scene", train_scene, "input scene directory")->required();
  train->add_option("--out", train_out, "output run directory")->required();
  train->add_option("--config", train_config, "key=value config file");
  train_keys.add_to(*train);
  train->callback([&] { run_train(train_scene, train_out, train_config, train_keys); });

  // render
  auto* render = app.add_subcommand("render", "Render one frame from a checkpoint");
  std::string render_ck, render_scene, render_out, render_config;
  std::size_t render_frame_idx = 0;
  KeyOverrides render_keys;
  render->add_option("checkpoint", render_ck, "checkpoint file")->required();
  render->add_option("scene", render_scene, "scene directory (poses and intrinsics)")->required();
  render->add_option("--out", render_out, "output directory")->required();
  render->add_option("--frame", render_frame_idx, "frame index (default: 0)");
  render->add_option("--config", render_config, "key=value config file");
  render_keys.add_to(*render);
  render->callback([&] {
    run_render(render_ck, render_scene, render_out, render_frame_idx, render_config, render_keys);
  });

  // segment
  auto* seg = app.add_subcommand("segment", "Segment every frame of a scene from a checkpoint");
  std::string seg_ck, seg_scene, seg_out, seg_prompts, seg_config;
  KeyOverrides seg_keys;
  seg->add_option("checkpoint", seg_ck, "checkpoint file")->required();
  seg->add_option("scene", seg_scene, "scene directory")->required();
  seg->add_option("--out", seg_out, "output segmentation directory")->required();
  seg->add_option("--prompts", seg_prompts, "prompt file (default: the scene's class table)");
  seg->add_option("--config", seg_config, "key=value config file");
  seg_keys.add_to(*seg);
  seg->callback([&] { run_segment(seg_ck, seg_scene, seg_out, seg_prompts, seg_config, seg_keys); });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score a segmentation against scene ground truth");
  std::string eval_seg, eval_scene, eval_out;
  eval->add_option("segmentation", eval_seg, "segmentation directory")->required();
  eval->add_option("scene", eval_scene, "scene directory with ground truth")->required();
  eval->add_option("--out", eval_out, "metrics CSV path (default: <segmentation>/metrics.csv)");
  eval->callback([&] { run_evaluate(eval_seg, eval_scene, eval_out); });

  // tree
  auto* tree = app.add_subcommand("tree", "Export the condensed instance-cluster tree");
  std::string tree_ck, tree_scene, tree_out, tree_config;
  KeyOverrides tree_keys;
  tree->add_option("checkpoint", tree_ck, "checkpoint file")->required();
  tree->add_option("scene", tree_scene, "scene directory")->required();
  tree->add_option("--out", tree_out, "output outline file")->required();
  tree->add_option("--config", tree_config, "key=value config file");
  tree_keys.add_to(*tree);
  tree->callback([&] { run_tree(tree_ck, tree_scene, tree_out, tree_config, tree_keys); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
