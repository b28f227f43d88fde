// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/render.hpp"

#include <cmath>

#include "pvlff/errors.hpp"
#include "pvlff/parallel.hpp"

namespace pvlff {

std::vector<double> transmittance(const std::vector<double>& sigmas,
                                  const std::vector<double>& deltas) {
  PVLFF_CHECK(sigmas.size() == deltas.size(), "transmittance: length mismatch");
  std::vector<double> t(sigmas.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    t[i] = std::exp(-acc);
    acc += sigmas[i] * deltas[i];
  }
  return t;
}

namespace {

struct RenderWeightsNode final : Node {
  std::vector<double> deltas;
  std::size_t samples_per_ray = 0;

  void backward(CompGraph& g) override {
    Tensor* dsigma = g.adjoint_for_accum(inputs[0]);
    if (!dsigma) return;
    const Tensor& sigma = g.value(inputs[0]);
    std::size_t n_rays = sigma.rows() / samples_per_ray;
    // dL/dsigma_j = delta_j * (u_j T_j e^{-sigma_j delta_j}
    //                          - sum_{i>j} u_i w_i),
    // computed per ray with a right-to-left suffix sum. Chunked per ray:
    // writes are disjoint.
    ThreadPool::global().for_chunks(n_rays, 64, [&](std::size_t, std::size_t rb, std::size_t re) {
      std::vector<double> tj(samples_per_ray);
      for (std::size_t r = rb; r < re; ++r) {
        std::size_t base = r * samples_per_ray;
        double optical = 0.0;
        for (std::size_t j = 0; j < samples_per_ray; ++j) {
          tj[j] = std::exp(-optical);
          optical += sigma[base + j] * deltas[base + j];
        }
        double suffix = 0.0;
        for (std::size_t j = samples_per_ray; j-- > 0;) {
          std::size_t i = base + j;
          double ej = std::exp(-sigma[i] * deltas[i]);
          (*dsigma)[i] += deltas[i] * (adjoint[i] * tj[j] * ej - suffix);
          suffix += adjoint[i] * value[i];
        }
      }
    });
  }
  const char* kind() const override { return "render_weights"; }
};

struct RenderAccumulateNode final : Node {
  std::size_t samples_per_ray = 0;

  void backward(CompGraph& g) override {
    const Tensor& w = g.value(inputs[0]);
    const Tensor& f = g.value(inputs[1]);
    std::size_t n_rays = value.rows();
    Tensor* dw = g.adjoint_for_accum(inputs[0]);
    Tensor* df = g.adjoint_for_accum(inputs[1]);
    if (!dw && !df) return;
    ThreadPool::global().for_chunks(n_rays, 64, [&](std::size_t, std::size_t rb, std::size_t re) {
      for (std::size_t r = rb; r < re; ++r) {
        auto row = static_cast<Eigen::Index>(r);
        for (std::size_t s = 0; s < samples_per_ray; ++s) {
          auto i = static_cast<Eigen::Index>(r * samples_per_ray + s);
          if (dw) (*dw)[static_cast<std::size_t>(i)] += f.mat().row(i).dot(adjoint.mat().row(row));
          if (df) df->mat().row(i) += w[static_cast<std::size_t>(i)] * adjoint.mat().row(row);
        }
      }
    });
  }
  const char* kind() const override { return "render_accumulate"; }
};

}  // namespace

NodeId render_weights(NodeId sigma, const std::vector<double>& deltas,
                      std::size_t samples_per_ray, CompGraph& g) {
  const Tensor& sv = g.value(sigma);
  PVLFF_CHECK(sv.cols() == 1 && sv.rows() == deltas.size(),
              "render_weights: sigma must be (R*S) x 1 matching deltas");
  PVLFF_CHECK(samples_per_ray > 0 && sv.rows() % samples_per_ray == 0,
              "render_weights: rows not divisible by samples_per_ray");
  auto node = std::make_unique<RenderWeightsNode>();
  node->inputs = {sigma};
  node->requires_grad = g.node(sigma).requires_grad;
  node->deltas = deltas;
  node->samples_per_ray = samples_per_ray;
  node->value = Tensor(sv.rows(), 1);
  Tensor& out = node->value;
  std::size_t n_rays = sv.rows() / samples_per_ray;
  ThreadPool::global().for_chunks(n_rays, 64, [&](std::size_t, std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      std::size_t base = r * samples_per_ray;
      double optical = 0.0;
      for (std::size_t s = 0; s < samples_per_ray; ++s) {
        std::size_t i = base + s;
        double t = std::exp(-optical);
        double sd = sv[i] * deltas[i];
        out[i] = t * (1.0 - std::exp(-sd));
        optical += sd;
      }
    }
  });
  return g.add_node(std::move(node));
}

NodeId render_accumulate(NodeId weights, NodeId features, std::size_t samples_per_ray,
                         CompGraph& g) {
  const Tensor& wv = g.value(weights);
  const Tensor& fv = g.value(features);
  PVLFF_CHECK(wv.cols() == 1 && wv.rows() == fv.rows(),
              "render_accumulate: weights must be (R*S) x 1 matching features");
  PVLFF_CHECK(samples_per_ray > 0 && wv.rows() % samples_per_ray == 0,
              "render_accumulate: rows not divisible by samples_per_ray");
  auto node = std::make_unique<RenderAccumulateNode>();
  node->inputs = {weights, features};
  node->requires_grad = g.node(weights).requires_grad || g.node(features).requires_grad;
  node->samples_per_ray = samples_per_ray;
  std::size_t n_rays = wv.rows() / samples_per_ray;
  node->value = Tensor(n_rays, fv.cols());
  Tensor& out = node->value;
  ThreadPool::global().for_chunks(n_rays, 64, [&](std::size_t, std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      auto row = static_cast<Eigen::Index>(r);
      out.mat().row(row).setZero();
      for (std::size_t s = 0; s < samples_per_ray; ++s) {
        auto i = static_cast<Eigen::Index>(r * samples_per_ray + s);
        out.mat().row(row) += wv[static_cast<std::size_t>(i)] * fv.mat().row(i);
      }
    }
  });
  return g.add_node(std::move(node));
}

RenderBatch render_rays(const FieldModel& model, const std::vector<Ray>& rays,
                        const std::vector<RaySampleSet>& samples, const Aabb& bbox,
                        const RenderChannels& channels, CompGraph& g) {
  PVLFF_CHECK(!rays.empty() && rays.size() == samples.size(),
              "render_rays: rays and sample sets must align");
  const std::size_t n_rays = rays.size();
  const std::size_t s_per = samples[0].ts.size();
  PVLFF_CHECK(s_per > 0, "render_rays: empty sample set");

  std::vector<Point3> positions(n_rays * s_per);
  std::vector<Point3> dirs;
  if (channels.color) dirs.resize(n_rays * s_per);
  std::vector<double> deltas(n_rays * s_per);
  Tensor ts(n_rays * s_per, 1);
  for (std::size_t r = 0; r < n_rays; ++r) {
    PVLFF_CHECK(samples[r].ts.size() == s_per, "render_rays: uneven sample counts");
    for (std::size_t s = 0; s < s_per; ++s) {
      std::size_t i = r * s_per + s;
      positions[i] = bbox.normalize(rays[r].origin + samples[r].ts[s] * rays[r].dir);
      deltas[i] = samples[r].deltas[s];
      ts[i] = samples[r].ts[s];
      if (channels.color) dirs[i] = rays[r].dir;
    }
  }

  RenderBatch out;
  out.n_rays = n_rays;
  out.samples_per_ray = s_per;

  FieldModel::GeometryOut geo = model.query_geometry(positions, g);
  out.weights = render_weights(geo.sigma, deltas, s_per, g);

  Tensor ones(n_rays * s_per, 1);
  ones.fill(1.0);
  out.opacity = render_accumulate(out.weights, g.input(std::move(ones)), s_per, g);

  if (channels.color) {
    NodeId rgb = model.query_color(geo.fg, dirs, g);
    out.color = render_accumulate(out.weights, rgb, s_per, g);
  }
  if (channels.depth) {
    NodeId depth_raw = render_accumulate(out.weights, g.input(std::move(ts)), s_per, g);
    out.depth = g.div(depth_raw, g.clamp_min(out.opacity, kDepthOpacityFloor));
    out.depth_valid.resize(n_rays);
    for (std::size_t r = 0; r < n_rays; ++r) {
      out.depth_valid[r] = g.value(out.opacity)[r] > kDepthOpacityFloor;
    }
  }
  if (channels.semantic) {
    NodeId sem = model.query_semantic(geo.fg, g);
    out.semantic = render_accumulate(out.weights, sem, s_per, g);
  }
  if (channels.instance) {
    NodeId inst = model.query_instance(positions, g,
                                       model.config().arch == InstanceArch::kStacked ? geo.fg
                                                                                     : FieldModel::kNoNode);
    out.instance = render_accumulate(out.weights, inst, s_per, g);
  }
  return out;
}

RenderOutput render_ray(const FieldModel& model, const Ray& ray, const RaySampleSet& samples,
                        const Aabb& bbox, CompGraph& g) {
  RenderChannels all;
  all.color = all.depth = all.semantic = all.instance = true;
  RenderBatch batch = render_rays(model, {ray}, {samples}, bbox, all, g);
  RenderOutput out;
  const Tensor& rgb = g.value(batch.color);
  out.color = Eigen::Vector3d(rgb[0], rgb[1], rgb[2]);
  out.opacity = g.value(batch.opacity)[0];
  out.depth_valid = batch.depth_valid[0];
  out.depth = out.depth_valid ? g.value(batch.depth)[0] : 0.0;
  out.semantic = g.value(batch.semantic);
  out.instance = g.value(batch.instance);
  const Tensor& w = g.value(batch.weights);
  out.weights.assign(w.data(), w.data() + w.size());
  return out;
}

}  // namespace pvlff
