// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include "pvlff/camera.hpp"
#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"
#include "pvlff/rng.hpp"

namespace pvlff {
namespace {

constexpr double kZeroNorm = 1e-12;

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double row_norm(const Tensor& t, std::size_t row) {
  double s = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) s += t(row, c) * t(row, c);
  return std::sqrt(s);
}

}  // namespace

FrameRender render_frame(const FieldModel& model, ParamStore& params, const Scene& scene,
                         std::size_t frame_index, const RenderChannels& channels,
                         std::size_t samples_per_ray, std::size_t chunk_rays) {
  if (frame_index >= scene.frames.size()) {
    throw DataError("render_frame: frame " + std::to_string(frame_index) + " of " +
                    std::to_string(scene.frames.size()));
  }
  if (samples_per_ray < 2) throw ConfigError("render_frame: need at least 2 samples per ray");
  if (chunk_rays == 0) throw ConfigError("render_frame: chunk size must be positive");
  const Frame& frame = scene.frames[frame_index];
  const std::size_t n = scene.pixel_count();

  std::vector<std::size_t> all(n);
  for (std::size_t p = 0; p < n; ++p) all[p] = p;
  const std::vector<Ray> rays = generate_rays(frame.cam_to_world, scene.intrinsics, all, scene.bbox);

  FrameRender out;
  if (channels.color) out.color = Tensor(n, 3);
  if (channels.depth) {
    out.depth.assign(n, 0.0);
    out.depth_valid.assign(n, 0);
  }
  if (channels.semantic) out.semantic = Tensor(n, model.config().semantic_width);
  if (channels.instance) out.instance = Tensor(n, model.config().instance_width);

  // Chunks own disjoint pixel ranges; the graph under each chunk only reads
  // the store, so any thread count gives identical output.
  std::mutex err_mu;
  std::exception_ptr err;
  ThreadPool::global().for_chunks(n, chunk_rays, [&](std::size_t, std::size_t begin,
                                                     std::size_t end) {
    try {
      std::vector<Ray> kept;
      std::vector<std::size_t> pixels;
      for (std::size_t p = begin; p < end; ++p) {
        if (rays[p].valid) {
          kept.push_back(rays[p]);
          pixels.push_back(p);
        }
      }
      if (kept.empty()) return;
      Rng unused(0);  // midpoint sampling draws nothing
      std::vector<RaySampleSet> samples;
      samples.reserve(kept.size());
      for (const Ray& r : kept) samples.push_back(sample_ray(r, samples_per_ray, false, unused));

      CompGraph g(&params);
      const RenderBatch batch = render_rays(model, kept, samples, scene.bbox, channels, g);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto px = static_cast<Eigen::Index>(pixels[i]);
        if (channels.color) out.color.mat().row(px) = g.value(batch.color).mat().row(row);
        if (channels.depth) {
          out.depth[pixels[i]] = g.value(batch.depth)[i];
          out.depth_valid[pixels[i]] = batch.depth_valid[i] ? 1 : 0;
        }
        if (channels.semantic) out.semantic.mat().row(px) = g.value(batch.semantic).mat().row(row);
        if (channels.instance) out.instance.mat().row(px) = g.value(batch.instance).mat().row(row);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return out;
}

PromptSet scene_prompts(const Scene& scene) {
  PromptSet prompts;
  for (const ClassInfo& c : scene.classes) {
    prompts.classes.push_back({c.name, c.thing, c.embedding});
  }
  prompts.validate();
  return prompts;
}

SceneSegmentation segment_scene(const FieldModel& model, ParamStore& params, const Scene& scene,
                                const PromptSet& prompts, const SegmentOptions& options,
                                std::ostream* progress) {
  prompts.validate();
  options.cluster.validate();
  if (options.sample_size < 2) throw ConfigError("segment: sample size must be at least 2");
  if (scene.frames.empty()) throw DataError("segment: scene has no frames");
  if (prompts.embed_width() != model.config().semantic_width) {
    throw DataError("segment: prompts are " + std::to_string(prompts.embed_width()) +
                    "-wide but the field renders " +
                    std::to_string(model.config().semantic_width));
  }

  const std::size_t n = scene.pixel_count();
  const std::size_t n_frames = scene.frames.size();
  SceneSegmentation out;
  out.width = scene.width;
  out.height = scene.height;
  out.raw_class.resize(n_frames);
  out.denoised_class.resize(n_frames);
  out.instances.assign(n_frames, std::vector<std::uint32_t>(n, 0));
  out.valid.resize(n_frames);
  out.panoptic.resize(n_frames);

  RenderChannels ch;
  ch.semantic = ch.instance = true;
  std::vector<Tensor> inst_feats(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    FrameRender r = render_frame(model, params, scene, f, ch, options.samples_per_ray);
    const SemanticAssignment sa = assign_semantics(r.semantic, prompts);
    out.raw_class[f] = sa.class_ids;
    out.valid[f] = sa.valid;
    inst_feats[f] = std::move(r.instance);
    if (progress) {
      *progress << "rendered frame " << f + 1 << "/" << n_frames << "\n";
    }
  }

  // Cluster a bounded sample of valid pixels, then pull every valid pixel to
  // its nearest cluster centroid so ids mean the same thing in every frame.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t p = 0; p < n; ++p) {
      if (out.valid[f][p]) {
        candidates.emplace_back(static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(p));
      }
    }
  }
  Rng rng(options.seed);
  if (candidates.size() > options.sample_size) {
    rng.shuffle(candidates);
    candidates.resize(options.sample_size);
    std::sort(candidates.begin(), candidates.end());
  }
  out.sample_pixels = candidates;

  const std::size_t n_sample = candidates.size();
  const std::size_t ci = model.config().instance_width;
  Tensor sample(n_sample, ci);
  for (std::size_t r = 0; r < n_sample; ++r) {
    sample.mat().row(static_cast<Eigen::Index>(r)) =
        inst_feats[candidates[r].first].mat().row(static_cast<Eigen::Index>(candidates[r].second));
  }
  if (progress) *progress << "clustering " << n_sample << " feature rows\n";
  const InstanceSegmentation si = segment_instances(sample, {}, options.cluster);
  out.tree = si.tree;
  out.sample_labels = si.instance_ids;

  std::uint32_t n_clusters = 0;
  for (std::uint32_t id : si.instance_ids) n_clusters = std::max(n_clusters, id);
  if (n_clusters > 0) {
    // Centroids over the L2-normalized sample rows, mirroring the metric the
    // clustering itself used.
    Tensor centroids(n_clusters, ci);
    std::vector<double> counts(n_clusters, 0.0);
    for (std::size_t r = 0; r < n_sample; ++r) {
      const std::uint32_t id = si.instance_ids[r];
      double norm = row_norm(sample, r);
      if (norm <= kZeroNorm) norm = 1.0;
      for (std::size_t c = 0; c < ci; ++c) centroids(id - 1, c) += sample(r, c) / norm;
      counts[id - 1] += 1.0;
    }
    for (std::uint32_t k = 0; k < n_clusters; ++k) {
      if (counts[k] > 0.0) {
        for (std::size_t c = 0; c < ci; ++c) centroids(k, c) /= counts[k];
      }
    }
    for (std::size_t f = 0; f < n_frames; ++f) {
      for (std::size_t p = 0; p < n; ++p) {
        if (!out.valid[f][p]) continue;
        double norm = row_norm(inst_feats[f], p);
        if (norm <= kZeroNorm) norm = 1.0;
        std::uint32_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t k = 0; k < n_clusters; ++k) {
          double d = 0.0;
          for (std::size_t c = 0; c < ci; ++c) {
            const double diff = inst_feats[f](p, c) / norm - centroids(k, c);
            d += diff * diff;
          }
          if (d < best_d) {  // ties keep the smaller id
            best_d = d;
            best = k + 1;
          }
        }
        out.instances[f][p] = best;
      }
    }
  }

  // Scene-wide vote and fusion keep the per-frame outputs consistent: the
  // whole run is concatenated, processed once, and sliced back apart.
  std::vector<std::uint32_t> all_class, all_inst;
  std::vector<char> all_valid;
  all_class.reserve(n_frames * n);
  all_inst.reserve(n_frames * n);
  all_valid.reserve(n_frames * n);
  for (std::size_t f = 0; f < n_frames; ++f) {
    all_class.insert(all_class.end(), out.raw_class[f].begin(), out.raw_class[f].end());
    all_inst.insert(all_inst.end(), out.instances[f].begin(), out.instances[f].end());
    all_valid.insert(all_valid.end(), out.valid[f].begin(), out.valid[f].end());
  }
  const std::vector<std::uint32_t> denoised = denoise_semantics(all_class, all_inst, all_valid);
  const PanopticMap fused =
      fuse_panoptic(denoised, all_inst, prompts, all_valid, n_frames * n, 1);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto b = static_cast<std::ptrdiff_t>(f * n);
    const auto e = b + static_cast<std::ptrdiff_t>(n);
    out.denoised_class[f].assign(denoised.begin() + b, denoised.begin() + e);
    PanopticMap& pm = out.panoptic[f];
    pm.width = scene.width;
    pm.height = scene.height;
    pm.class_ids.assign(fused.class_ids.begin() + b, fused.class_ids.begin() + e);
    pm.instance_ids.assign(fused.instance_ids.begin() + b, fused.instance_ids.begin() + e);
    pm.valid.assign(fused.valid.begin() + b, fused.valid.begin() + e);
  }
  return out;
}

SegmentationScores score_segmentation(const Scene& scene,
                                      const std::vector<std::vector<std::uint32_t>>& raw_class,
                                      const std::vector<std::vector<std::uint32_t>>& denoised_class,
                                      const std::vector<std::vector<std::uint32_t>>& instances,
                                      const std::vector<std::vector<char>>& valid,
                                      const std::vector<PanopticMap>& panoptic) {
  const std::size_t n = scene.pixel_count();
  const std::size_t n_frames = scene.frames.size();
  if (raw_class.size() != n_frames || denoised_class.size() != n_frames ||
      instances.size() != n_frames || valid.size() != n_frames || panoptic.size() != n_frames) {
    throw DataError("score: segmentation frame count differs from the scene's");
  }

  std::vector<std::uint32_t> pred_raw, pred_den, pred_inst, gt_class, gt_inst;
  std::vector<char> ignore;
  std::vector<PanopticMap> gt_maps(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (raw_class[f].size() != n || denoised_class[f].size() != n || instances[f].size() != n ||
        valid[f].size() != n || panoptic[f].size() != n) {
      throw DataError("score: frame " + std::to_string(f) +
                      " rasters do not match the scene resolution");
    }
    pred_raw.insert(pred_raw.end(), raw_class[f].begin(), raw_class[f].end());
    pred_den.insert(pred_den.end(), denoised_class[f].begin(), denoised_class[f].end());
    pred_inst.insert(pred_inst.end(), instances[f].begin(), instances[f].end());
    const Frame& frame = scene.frames[f];
    gt_class.insert(gt_class.end(), frame.gt_class.begin(), frame.gt_class.end());
    gt_inst.insert(gt_inst.end(), frame.gt_instance.begin(), frame.gt_instance.end());
    for (std::size_t p = 0; p < n; ++p) ignore.push_back(valid[f][p] ? 0 : 1);
    PanopticMap& gm = gt_maps[f];
    gm.width = scene.width;
    gm.height = scene.height;
    gm.class_ids = frame.gt_class;
    gm.instance_ids = frame.gt_instance;
    gm.valid.assign(n, 1);
  }

  SegmentationScores scores;
  scores.raw_semantic = miou_macc(pred_raw, gt_class, ignore);
  scores.semantic = miou_macc(pred_den, gt_class, ignore);
  scores.cov = coverage(pred_inst, gt_inst, ignore);
  scores.scene_pq = pq_scene(panoptic, gt_maps);
  return scores;
}

SegmentationScores score_segmentation(const Scene& scene, const SceneSegmentation& seg) {
  return score_segmentation(scene, seg.raw_class, seg.denoised_class, seg.instances, seg.valid,
                            seg.panoptic);
}

void write_metrics_csv(std::ostream& out, const SegmentationScores& scores,
                       const std::vector<std::string>& class_names) {
  const auto name_of = [&](std::uint32_t id) {
    return id < class_names.size() ? class_names[id] : std::to_string(id);
  };
  out << "metric,class,value\n";
  if (scores.semantic.defined) {
    out << "miou,," << format_double(scores.semantic.miou) << "\n";
    out << "macc,," << format_double(scores.semantic.macc) << "\n";
  }
  if (scores.raw_semantic.defined) {
    out << "miou_raw,," << format_double(scores.raw_semantic.miou) << "\n";
    out << "macc_raw,," << format_double(scores.raw_semantic.macc) << "\n";
  }
  for (const auto& [id, iou] : scores.semantic.class_iou) {
    out << "iou," << name_of(id) << "," << format_double(iou) << "\n";
  }
  for (const auto& [id, acc] : scores.semantic.class_acc) {
    out << "acc," << name_of(id) << "," << format_double(acc) << "\n";
  }
  if (scores.cov.defined) {
    out << "mcov,," << format_double(scores.cov.mcov) << "\n";
    out << "mwcov,," << format_double(scores.cov.mwcov) << "\n";
  }
  if (scores.scene_pq.defined) {
    out << "pq_scene,," << format_double(scores.scene_pq.pq) << "\n";
    out << "sq_scene,," << format_double(scores.scene_pq.sq) << "\n";
    out << "rq_scene,," << format_double(scores.scene_pq.rq) << "\n";
    for (const auto& [id, pc] : scores.scene_pq.per_class) {
      out << "pq," << name_of(id) << "," << format_double(pc.pq) << "\n";
    }
  }
}

}  // namespace pvlff
