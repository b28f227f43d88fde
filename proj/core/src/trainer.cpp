// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "pvlff/errors.hpp"

namespace pvlff {

void LossWeights::validate() const {
  if (tau <= 0.0) throw ConfigError("loss weights: tau must be positive");
  if (rgb < 0 || depth < 0 || semantic < 0 || contrastive < 0 || slow_center < 0)
    throw ConfigError("loss weights: negative weight");
}

void TrainConfig::validate() const {
  weights.validate();
  if (epochs == 0) throw ConfigError("train config: epochs must be >= 1");
  if (pixel_batch == 0) throw ConfigError("train config: pixel_batch must be >= 1");
  if (samples_per_ray == 0) throw ConfigError("train config: samples_per_ray must be >= 1");
  if (anchors_per_step == 0 || negs_per_anchor == 0)
    throw ConfigError("train config: pair batch sizes must be >= 1");
  if (lr <= 0.0) throw ConfigError("train config: lr must be positive");
  if (ema_decay < 0.0 || ema_decay >= 1.0)
    throw ConfigError("train config: ema_decay must be in [0, 1)");
  if (center_beta < 0.0 || center_beta >= 1.0)
    throw ConfigError("train config: center_beta must be in [0, 1)");
  if (center_pixels_per_mask == 0)
    throw ConfigError("train config: center_pixels_per_mask must be >= 1");
}

bool SlowCenterRegistry::has(std::uint32_t frame, std::uint32_t proposal) const {
  return centers_.count({frame, proposal}) != 0;
}

const Tensor& SlowCenterRegistry::center(std::uint32_t frame, std::uint32_t proposal) const {
  auto it = centers_.find({frame, proposal});
  PVLFF_CHECK(it != centers_.end(), "SlowCenterRegistry: unknown (frame, proposal)");
  return it->second;
}

void SlowCenterRegistry::update(std::uint32_t frame, std::uint32_t proposal,
                                const Tensor& average) {
  PVLFF_CHECK(average.all_finite(), "SlowCenterRegistry: non-finite average");
  auto it = centers_.find({frame, proposal});
  if (it == centers_.end()) {
    centers_.emplace(std::make_pair(frame, proposal), average);
    return;
  }
  Tensor& c = it->second;
  PVLFF_CHECK(c.same_shape(average), "SlowCenterRegistry: center width changed");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = beta_ * c[i] + (1.0 - beta_) * average[i];
}

void slow_center_update(SlowCenterRegistry& registry, const FieldModel& model,
                        ParamStore& eval_params, const Scene& scene,
                        std::size_t pixels_per_mask, Rng& rng) {
  RenderChannels ch;
  ch.instance = true;
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const Frame& frame = scene.frames[f];
    for (const MaskProposal& proposal : frame.proposals) {
      std::vector<std::uint32_t> mask_pixels = proposal.mask.pixels();
      if (mask_pixels.empty()) continue;
      std::vector<std::size_t> pixels(pixels_per_mask);
      for (std::size_t i = 0; i < pixels_per_mask; ++i) {
        pixels[i] = mask_pixels[static_cast<std::size_t>(rng.next_below(mask_pixels.size()))];
      }
      std::vector<Ray> rays =
          generate_rays(frame.cam_to_world, scene.intrinsics, pixels, scene.bbox);
      std::vector<Ray> kept;
      for (const Ray& r : rays) {
        if (r.valid) kept.push_back(r);
      }
      if (kept.empty()) continue;
      std::vector<RaySampleSet> samples;
      samples.reserve(kept.size());
      Rng srng(0);  // unused in midpoint mode
      for (const Ray& r : kept) {
        samples.push_back(sample_ray(r, 16, false, srng));
      }
      CompGraph g(&eval_params);
      RenderBatch batch = render_rays(model, kept, samples, scene.bbox, ch, g);
      const Tensor& inst = g.value(batch.instance);
      Tensor avg(1, inst.cols());
      for (std::size_t r = 0; r < inst.rows(); ++r) {
        for (std::size_t c = 0; c < inst.cols(); ++c) avg[c] += inst(r, c);
      }
      for (std::size_t c = 0; c < avg.size(); ++c) avg[c] /= static_cast<double>(inst.rows());
      registry.update(static_cast<std::uint32_t>(f), proposal.id, avg);
    }
  }
}

Trainer::Trainer(const Scene& scene, FieldConfig field_config, TrainConfig train_config)
    : scene_(scene),
      cfg_(std::move(train_config)),
      rng_(splitmix64(cfg_.seed ^ 0x7261696e65724cULL)),
      centers_(cfg_.center_beta) {
  cfg_.validate();
  field_config.validate();
  if (scene_.frames.empty()) throw DataError("trainer: scene has no frames");
  if (field_config.semantic_width != scene_.embed_width)
    throw ConfigError("trainer: semantic width differs from the scene's embedding width");
  Rng init_rng = rng_.fork(0x696e6974);
  model_ = std::make_unique<FieldModel>(field_config, store_, init_rng);
  ema_ = store_.clone_values();
}

std::size_t Trainer::steps_per_epoch() const {
  if (cfg_.steps == 0) return 1;
  return (cfg_.steps + cfg_.epochs - 1) / cfg_.epochs;
}

std::size_t Trainer::epoch_of(std::size_t step) const { return step / steps_per_epoch() + 1; }

StepReport Trainer::step() {
  StepReport report;
  report.step = step_;
  report.epoch = epoch_of(step_);

  const std::size_t frame_idx = static_cast<std::size_t>(rng_.next_below(scene_.frames.size()));
  const Frame& frame = scene_.frames[frame_idx];
  const std::size_t n_pixels = scene_.pixel_count();

  CompGraph g(&store_);
  std::vector<NodeId> weighted_terms;

  // Pixel batch: photometric, depth, and semantic supervision.
  std::vector<std::size_t> pixels(cfg_.pixel_batch);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<std::size_t>(rng_.next_below(n_pixels));
  }
  std::vector<Ray> rays = generate_rays(frame.cam_to_world, scene_.intrinsics, pixels, scene_.bbox);
  std::vector<Ray> kept;
  std::vector<std::size_t> kept_pixels;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].valid) {
      kept.push_back(rays[i]);
      kept_pixels.push_back(pixels[i]);
    }
  }
  if (!kept.empty()) {
    std::vector<RaySampleSet> samples;
    samples.reserve(kept.size());
    for (const Ray& r : kept) {
      samples.push_back(sample_ray(r, cfg_.samples_per_ray, cfg_.stratified, rng_));
    }
    RenderChannels ch;
    ch.color = ch.depth = ch.semantic = true;
    RenderBatch batch = render_rays(*model_, kept, samples, scene_.bbox, ch, g);

    Tensor rgb_t(kept.size(), 3);
    Tensor depth_t(kept.size(), 1);
    Tensor embed_t(kept.size(), scene_.embed_width);
    std::vector<bool> depth_ok(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::size_t p = kept_pixels[i];
      rgb_t.mat().row(static_cast<Eigen::Index>(i)) =
          frame.rgb.mat().row(static_cast<Eigen::Index>(p));
      depth_t[i] = frame.depth[p];
      embed_t.mat().row(static_cast<Eigen::Index>(i)) =
          frame.embed.mat().row(static_cast<Eigen::Index>(p));
      depth_ok[i] = frame.depth_valid[p];
    }

    NodeId l_rgb = photometric_loss(batch.color, rgb_t, g);
    NodeId l_depth = depth_loss(batch.depth, depth_t, depth_ok, g);
    NodeId l_sem = semantic_loss(batch.semantic, embed_t, g);
    report.rgb = g.value(l_rgb)[0];
    report.depth = g.value(l_depth)[0];
    report.semantic = g.value(l_sem)[0];
    if (cfg_.weights.rgb > 0) weighted_terms.push_back(g.scale(l_rgb, cfg_.weights.rgb));
    if (cfg_.weights.depth > 0) weighted_terms.push_back(g.scale(l_depth, cfg_.weights.depth));
    if (cfg_.weights.semantic > 0)
      weighted_terms.push_back(g.scale(l_sem, cfg_.weights.semantic));
  }

  // Pair batch: contrastive and slow-center terms, frames with >= 2
  // proposals only.
  const bool contrastive_on = cfg_.weights.contrastive > 0 || cfg_.weights.slow_center > 0;
  if (contrastive_on && frame.proposals.size() >= 2) {
    PairBatch pb =
        sample_pairs(frame.proposals, cfg_.anchors_per_step, cfg_.negs_per_anchor, rng_);
    const std::size_t k_negs = pb.negs_per_anchor;

    // One ray list: anchors, then positives, then negatives. An anchor whose
    // own/positive/negative ray misses the scene box is dropped whole so
    // every surviving anchor keeps exactly k_negs negatives.
    std::vector<std::size_t> all_pixels;
    all_pixels.reserve(pb.size() * (2 + k_negs));
    for (std::uint32_t p : pb.anchor_pixels) all_pixels.push_back(p);
    for (std::uint32_t p : pb.positive_pixels) all_pixels.push_back(p);
    for (std::uint32_t p : pb.negative_pixels) all_pixels.push_back(p);
    std::vector<Ray> pair_rays =
        generate_rays(frame.cam_to_world, scene_.intrinsics, all_pixels, scene_.bbox);

    const std::size_t n_anchors = pb.size();
    std::vector<std::size_t> keep_anchor;
    for (std::size_t a = 0; a < n_anchors; ++a) {
      bool ok = pair_rays[a].valid && pair_rays[n_anchors + a].valid;
      for (std::size_t n = 0; ok && n < k_negs; ++n) {
        ok = pair_rays[2 * n_anchors + a * k_negs + n].valid;
      }
      if (ok) keep_anchor.push_back(a);
    }

    if (!keep_anchor.empty()) {
      std::vector<Ray> kept_rays;
      kept_rays.reserve(keep_anchor.size() * (2 + k_negs));
      for (std::size_t a : keep_anchor) kept_rays.push_back(pair_rays[a]);
      for (std::size_t a : keep_anchor) kept_rays.push_back(pair_rays[n_anchors + a]);
      for (std::size_t a : keep_anchor) {
        for (std::size_t n = 0; n < k_negs; ++n) {
          kept_rays.push_back(pair_rays[2 * n_anchors + a * k_negs + n]);
        }
      }
      std::vector<RaySampleSet> samples;
      samples.reserve(kept_rays.size());
      for (const Ray& r : kept_rays) {
        samples.push_back(sample_ray(r, cfg_.samples_per_ray, cfg_.stratified, rng_));
      }
      RenderChannels ch;
      ch.instance = true;
      RenderBatch batch = render_rays(*model_, kept_rays, samples, scene_.bbox, ch, g);

      const std::size_t kept_n = keep_anchor.size();
      std::vector<std::size_t> a_rows(kept_n), p_rows(kept_n), n_rows(kept_n * k_negs);
      for (std::size_t i = 0; i < kept_n; ++i) {
        a_rows[i] = i;
        p_rows[i] = kept_n + i;
      }
      for (std::size_t i = 0; i < kept_n * k_negs; ++i) n_rows[i] = 2 * kept_n + i;
      NodeId anchors = g.gather_rows(batch.instance, std::move(a_rows));
      NodeId positives = g.gather_rows(batch.instance, std::move(p_rows));
      NodeId negatives = g.gather_rows(batch.instance, std::move(n_rows));

      if (cfg_.weights.contrastive > 0) {
        NodeId l_con = contrastive_loss(anchors, positives, negatives, k_negs, cfg_.weights.tau, g);
        report.contrastive = g.value(l_con)[0];
        weighted_terms.push_back(g.scale(l_con, cfg_.weights.contrastive));
      }

      // The slow-center pull only starts once centers exist; the first epoch
      // trains without it.
      if (cfg_.weights.slow_center > 0 && report.epoch > 1 && centers_.size() > 0) {
        const std::size_t c_i = model_->config().instance_width;
        Tensor centers(kept_n, c_i);
        std::vector<bool> has_center(kept_n, false);
        for (std::size_t i = 0; i < kept_n; ++i) {
          std::uint32_t pid = frame.proposals[pb.anchor_proposals[keep_anchor[i]]].id;
          if (centers_.has(static_cast<std::uint32_t>(frame_idx), pid)) {
            has_center[i] = true;
            const Tensor& c = centers_.center(static_cast<std::uint32_t>(frame_idx), pid);
            centers.mat().row(static_cast<Eigen::Index>(i)) = c.mat();
          }
        }
        NodeId l_sc = slow_center_loss(anchors, centers, has_center, g);
        report.slow_center = g.value(l_sc)[0];
        weighted_terms.push_back(g.scale(l_sc, cfg_.weights.slow_center));
      }
    }
  }

  PVLFF_CHECK(!weighted_terms.empty(), "train step produced no loss terms");
  NodeId total = weighted_terms[0];
  for (std::size_t i = 1; i < weighted_terms.size(); ++i) total = g.add(total, weighted_terms[i]);
  report.total = g.value(total)[0];

  if (!std::isfinite(report.total)) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "non-finite total loss at step %zu "
                  "(rgb=%g depth=%g semantic=%g contrastive=%g slow_center=%g)",
                  step_, report.rgb, report.depth, report.semantic, report.contrastive,
                  report.slow_center);
    throw NumericError(buf);
  }

  store_.zero_grad();
  Tensor seed(1, 1);
  seed[0] = 1.0;
  g.backward(total, seed);
  store_.adam_step(cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps);
  ema_.ema_update_from(store_, cfg_.ema_decay);

  ++step_;
  return report;
}

void Trainer::update_slow_centers() {
  Rng crng = rng_.fork(0x63656e746572 ^ step_);
  slow_center_update(centers_, *model_, ema_, scene_, cfg_.center_pixels_per_mask, crng);
}

const char* Trainer::loss_csv_header() {
  return "step,rgb,depth,semantic,contrastive,slow_center,total";
}

void Trainer::run(std::ostream* loss_csv, std::ostream* progress) {
  if (loss_csv) *loss_csv << loss_csv_header() << "\n";
  const std::size_t per_epoch = steps_per_epoch();
  for (std::size_t s = 0; s < cfg_.steps; ++s) {
    if (s > 0 && s % per_epoch == 0) update_slow_centers();
    StepReport rep = step();
    if (loss_csv) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", rep.step,
                    rep.rgb, rep.depth, rep.semantic, rep.contrastive, rep.slow_center,
                    rep.total);
      *loss_csv << buf << "\n";
    }
    if (progress && (rep.step % 100 == 0 || rep.step + 1 == cfg_.steps)) {
      *progress << "step " << rep.step + 1 << "/" << cfg_.steps << " epoch " << rep.epoch
                << " total=" << rep.total << "\n";
    }
  }
}

void Trainer::save(const std::string& checkpoint_path) const {
  // The EMA evaluation copy is the inference artifact; the live parameters
  // stay internal to the run.
  save_checkpoint(checkpoint_path, model_->config(), ema_);
}

void train_to_dir(const Scene& scene, const FieldConfig& field_config,
                  const TrainConfig& train_config, const std::string& out_dir,
                  std::ostream* progress) {
  std::filesystem::create_directories(out_dir);
  Trainer trainer(scene, field_config, train_config);
  std::ofstream csv(out_dir + "/loss_log.csv");
  if (!csv) throw DataError("cannot open loss log for writing in " + out_dir);
  trainer.run(&csv, progress);
  trainer.save(out_dir + "/checkpoint.pvlf");
}

}  // namespace pvlff
