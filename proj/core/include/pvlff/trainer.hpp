// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pvlff/checkpoint.hpp"
#include "pvlff/field_model.hpp"
#include "pvlff/losses.hpp"
#include "pvlff/pairs.hpp"
#include "pvlff/render.hpp"
#include "pvlff/scene.hpp"

namespace pvlff {

struct LossWeights {
  double rgb = 1.0;
  double depth = 0.1;
  double semantic = 1.0;
  double contrastive = 0.1;
  double slow_center = 0.01;
  double tau = 0.1;

  void validate() const;
};

struct TrainConfig {
  std::size_t steps = 5000;
  std::size_t epochs = 10;
  std::size_t pixel_batch = 1024;
  std::size_t anchors_per_step = 64;
  std::size_t negs_per_anchor = 32;
  std::size_t samples_per_ray = 32;
  bool stratified = true;
  double lr = 1e-3;  // MLP rate; hash tables carry their own multiplier
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-15;
  double ema_decay = 0.99;          // evaluation-copy parameter EMA
  double center_beta = 0.9;         // slow-center EMA
  std::size_t center_pixels_per_mask = 64;
  std::uint64_t seed = 0;
  LossWeights weights;

  void validate() const;
};

// Raw (unweighted) per-term values plus the weighted total that was
// optimized.
struct StepReport {
  std::size_t step = 0;
  std::size_t epoch = 1;
  double rgb = 0.0;
  double depth = 0.0;
  double semantic = 0.0;
  double contrastive = 0.0;
  double slow_center = 0.0;
  double total = 0.0;
};

// Per-(frame, proposal id) EMA-tracked mean instance feature.
class SlowCenterRegistry {
 public:
  explicit SlowCenterRegistry(double beta = 0.9) : beta_(beta) {}

  bool has(std::uint32_t frame, std::uint32_t proposal) const;
  const Tensor& center(std::uint32_t frame, std::uint32_t proposal) const;
  // First visit copies `average`; later visits apply
  // center <- beta*center + (1-beta)*average.
  void update(std::uint32_t frame, std::uint32_t proposal, const Tensor& average);
  std::size_t size() const { return centers_.size(); }
  double beta() const { return beta_; }

 private:
  double beta_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Tensor> centers_;
};

// Refreshes every proposal's center by rendering the instance channel at
// `pixels_per_mask` uniformly drawn mask pixels against `eval_params` (the
// EMA copy). Never records gradients or touches live parameters.
void slow_center_update(SlowCenterRegistry& registry, const FieldModel& model,
                        ParamStore& eval_params, const Scene& scene,
                        std::size_t pixels_per_mask, Rng& rng);

// Owns the optimization state for one run: live parameters, the EMA
// evaluation copy, the slow-center registry, and the step counter.
class Trainer {
 public:
  Trainer(const Scene& scene, FieldConfig field_config, TrainConfig train_config);

  // One optimization step (one frame; pixel batch + pair batch).
  StepReport step();
  // Recomputes slow centers from the EMA copy; called between epochs.
  void update_slow_centers();
  // Full schedule: steps with slow-center refreshes at epoch boundaries.
  // Per-step CSV rows go to `loss_csv` (if non-null), heartbeat lines to
  // `progress` (if non-null).
  void run(std::ostream* loss_csv, std::ostream* progress = nullptr);

  std::size_t completed_steps() const { return step_; }
  std::size_t steps_per_epoch() const;
  std::size_t epoch_of(std::size_t step) const;  // 1-based

  const FieldModel& model() const { return *model_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  ParamStore& ema_params() { return ema_; }
  const SlowCenterRegistry& centers() const { return centers_; }

  // Writes the EMA evaluation copy (the parameters inference should use).
  void save(const std::string& checkpoint_path) const;

  static const char* loss_csv_header();

 private:
  const Scene& scene_;
  TrainConfig cfg_;
  ParamStore store_;
  Rng rng_;
  std::unique_ptr<FieldModel> model_;
  ParamStore ema_;
  SlowCenterRegistry centers_;
  std::size_t step_ = 0;
};

// Convenience wrapper: trains the full schedule and writes
// `out_dir/checkpoint.pvlf` plus `out_dir/loss_log.csv`. With steps = 0 the
// initialized checkpoint is still written.
void train_to_dir(const Scene& scene, const FieldConfig& field_config,
                  const TrainConfig& train_config, const std::string& out_dir,
                  std::ostream* progress = nullptr);

}  // namespace pvlff
