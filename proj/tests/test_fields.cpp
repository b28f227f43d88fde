// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "pvlff/checkpoint.hpp"
#include "pvlff/errors.hpp"
#include "pvlff/fd_check.hpp"
#include "pvlff/field_model.hpp"

using namespace pvlff;

namespace {

FieldConfig small_config(InstanceArch arch = InstanceArch::kDecoupled) {
  FieldConfig cfg;
  cfg.grid.levels = 3;
  cfg.grid.base_resolution = 2;
  cfg.grid.growth = 1.5;
  cfg.grid.features = 2;
  cfg.grid.table_size = 1 << 8;
  cfg.grid.dense_threshold = 16;
  cfg.fg_width = 6;
  cfg.semantic_width = 4;
  cfg.instance_width = 4;
  cfg.hidden_width = 8;
  cfg.head_layers = 2;
  cfg.arch = arch;
  return cfg;
}

void zero_mlp(ParamStore& store, const std::string& name) {
  for (std::size_t k = 0;; ++k) {
    std::string base = name + ".l" + std::to_string(k);
    if (!store.has(base + ".w")) break;
    store.value(base + ".w").set_zero();
    store.value(base + ".b").set_zero();
  }
}

Tensor unit_seed() {
  Tensor s(1, 1);
  s[0] = 1.0;
  return s;
}

}  // namespace

TEST_CASE("query_geometry: raw density 0 gives sigma = ln 2") {
  ParamStore store;
  Rng rng(1);
  FieldModel model(small_config(), store, rng);
  zero_mlp(store, "geo");  // raw output all zeros
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.3, 0.4, 0.5)}, g);
  CHECK(g.value(geo.sigma)[0] == doctest::Approx(std::log(2.0)));
  for (std::size_t i = 0; i < g.value(geo.fg).size(); ++i) CHECK(g.value(geo.fg)[i] == 0.0);
}

TEST_CASE("query_geometry: large negative raw density drives sigma to 0") {
  ParamStore store;
  Rng rng(2);
  FieldModel model(small_config(), store, rng);
  zero_mlp(store, "geo");
  store.value("geo.l1.b")[0] = -50.0;  // raw density channel
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.5, 0.5, 0.5)}, g);
  CHECK(g.value(geo.sigma)[0] >= 0.0);
  CHECK(g.value(geo.sigma)[0] < 1e-20);
}

TEST_CASE("query_geometry: matches independent composition of the primitives") {
  ParamStore store;
  Rng rng(3);
  FieldConfig cfg = small_config();
  FieldModel model(cfg, store, rng);
  Point3 x(0.21, 0.77, 0.43);
  CompGraph g(&store);
  auto geo = model.query_geometry({x}, g);

  // Reference path: encode and run the MLP by hand with Eigen only.
  CompGraph g2(&store);
  NodeId enc = encode(model.hhe1(), x, g2);
  Eigen::RowVectorXd h = g2.value(enc).mat().row(0);
  for (std::size_t k = 0; k < cfg.head_layers; ++k) {
    std::string base = "geo.l" + std::to_string(k);
    if (k > 0) h = h.cwiseMax(0.0);
    h = (h * store.value(base + ".w").mat().transpose() + store.value(base + ".b").mat()).eval();
  }
  double sigma_ref = std::log1p(std::exp(h(0)));
  CHECK(g.value(geo.sigma)[0] == doctest::Approx(sigma_ref).epsilon(1e-12));
  for (std::size_t i = 0; i < cfg.fg_width; ++i) {
    CHECK(g.value(geo.fg)[i] == doctest::Approx(h(static_cast<Eigen::Index>(i + 1))).epsilon(1e-12));
  }
}

TEST_CASE("query_color: zero-weight head yields mid gray") {
  ParamStore store;
  Rng rng(4);
  FieldModel model(small_config(), store, rng);
  zero_mlp(store, "color");
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.5, 0.5, 0.5)}, g);
  NodeId rgb = model.query_color(geo.fg, {Point3(0, 0, 1)}, g);
  for (int i = 0; i < 3; ++i) CHECK(g.value(rgb)[static_cast<std::size_t>(i)] == doctest::Approx(0.5));
}

TEST_CASE("query_color: direction-independent when direction weights are zero") {
  ParamStore store;
  Rng rng(5);
  FieldConfig cfg = small_config();
  FieldModel model(cfg, store, rng);
  // Zero the first-layer columns that multiply the 9 SH coefficients.
  Tensor& w0 = store.value("color.l0.w");
  for (std::size_t r = 0; r < w0.rows(); ++r) {
    for (std::size_t c = cfg.fg_width; c < cfg.fg_width + 9; ++c) w0(r, c) = 0.0;
  }
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.4, 0.6, 0.5)}, g);
  NodeId rgb_pos = model.query_color(geo.fg, {Point3(0, 0, 1)}, g);
  NodeId rgb_neg = model.query_color(geo.fg, {Point3(0, 0, -1)}, g);
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.value(rgb_pos)[i] == doctest::Approx(g.value(rgb_neg)[i]));
}

TEST_CASE("query_color: +z direction matches hand-computed SH basis") {
  // At d = +z the degree-2 basis is (Y00, 0, Y10, 0, 0, 0, Y20(3-1), 0, 0)
  // = (0.28209479, 0, 0.48860251, 0, 0, 0, 0.63078313, 0, 0).
  auto basis = sh9(Point3(0, 0, 1));
  CHECK(basis[0] == doctest::Approx(0.28209479177387814));
  CHECK(basis[1] == 0.0);
  CHECK(basis[2] == doctest::Approx(0.4886025119029199));
  CHECK(basis[3] == 0.0);
  CHECK(basis[4] == 0.0);
  CHECK(basis[5] == 0.0);
  CHECK(basis[6] == doctest::Approx(0.6307831305050401));
  CHECK(basis[7] == 0.0);
  CHECK(basis[8] == 0.0);

  // Single linear color layer reading only the SH channels: hand-computable.
  ParamStore store;
  Rng rng(6);
  FieldConfig cfg = small_config();
  cfg.head_layers = 1;
  FieldModel model(cfg, store, rng);
  zero_mlp(store, "color");
  Tensor& w = store.value("color.l0.w");
  w(0, cfg.fg_width + 0) = 1.0;  // Y00
  w(1, cfg.fg_width + 2) = 2.0;  // Y10
  w(2, cfg.fg_width + 6) = -1.0; // Y20
  CompGraph g(&store);
  NodeId fg = g.input(Tensor(1, cfg.fg_width));
  NodeId rgb = model.query_color(fg, {Point3(0, 0, 1)}, g);
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  CHECK(g.value(rgb)[0] == doctest::Approx(sigmoid(0.28209479177387814)));
  CHECK(g.value(rgb)[1] == doctest::Approx(sigmoid(2.0 * 0.4886025119029199)));
  CHECK(g.value(rgb)[2] == doctest::Approx(sigmoid(-0.6307831305050401)));
}

TEST_CASE("query_semantic: zero weights give zero vector") {
  ParamStore store;
  Rng rng(7);
  FieldModel model(small_config(), store, rng);
  zero_mlp(store, "semantic");
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.5, 0.2, 0.9)}, g);
  NodeId sem = model.query_semantic(geo.fg, g);
  for (std::size_t i = 0; i < g.value(sem).size(); ++i) CHECK(g.value(sem)[i] == 0.0);
}

TEST_CASE("query_instance: decoupled output ignores HHE1 entries") {
  ParamStore store;
  Rng rng(8);
  FieldModel model(small_config(InstanceArch::kDecoupled), store, rng);
  Point3 x(0.33, 0.44, 0.55);
  CompGraph g1(&store);
  Tensor before = g1.value(model.query_instance({x}, g1));
  // Perturb every HHE1 entry.
  for (std::size_t l = 0; l < model.config().grid.levels; ++l) {
    Tensor& t = store.value(model.hhe1().level_param_name(l));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.37;
  }
  CompGraph g2(&store);
  Tensor after = g2.value(model.query_instance({x}, g2));
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("gradient isolation: decoupled instance loss leaves HHE1 untouched and vice versa") {
  ParamStore store;
  Rng rng(9);
  FieldModel model(small_config(InstanceArch::kDecoupled), store, rng);
  std::vector<Point3> xs = {{0.3, 0.3, 0.3}, {0.6, 0.7, 0.8}};

  store.zero_grad();
  {
    CompGraph g(&store);
    NodeId loss = g.mean_all(g.square(model.query_instance(xs, g)));
    g.backward(loss, unit_seed());
  }
  for (std::size_t l = 0; l < model.config().grid.levels; ++l) {
    const Tensor& g1 = store.grad(model.hhe1().level_param_name(l));
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == 0.0);
  }

  store.zero_grad();
  {
    CompGraph g(&store);
    auto geo = model.query_geometry(xs, g);
    NodeId loss = g.mean_all(g.square(model.query_semantic(geo.fg, g)));
    g.backward(loss, unit_seed());
  }
  for (std::size_t l = 0; l < model.config().grid.levels; ++l) {
    const Tensor& g2 = store.grad(model.hhe2().level_param_name(l));
    for (std::size_t i = 0; i < g2.size(); ++i) CHECK(g2[i] == 0.0);
  }
}

TEST_CASE("architecture modes: shared_hhe and stacked route the documented inputs") {
  // shared_hhe: perturbing HHE1 changes F_I (no HHE2 exists).
  {
    ParamStore store;
    Rng rng(10);
    FieldModel model(small_config(InstanceArch::kSharedHhe), store, rng);
    CHECK(!model.has_hhe2());
    Point3 x(0.5, 0.5, 0.5);
    CompGraph g1(&store);
    Tensor before = g1.value(model.query_instance({x}, g1));
    for (std::size_t l = 0; l < model.config().grid.levels; ++l) {
      Tensor& t = store.value(model.hhe1().level_param_name(l));
      for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.25;
    }
    CompGraph g2(&store);
    Tensor after = g2.value(model.query_instance({x}, g2));
    double diff = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) diff += std::abs(after[i] - before[i]);
    CHECK(diff > 1e-9);
  }
  // stacked: instance head consumes F_G; gradients reach the geometry MLP.
  {
    ParamStore store;
    Rng rng(11);
    FieldModel model(small_config(InstanceArch::kStacked), store, rng);
    CHECK(!model.has_hhe2());
    store.zero_grad();
    CompGraph g(&store);
    NodeId loss = g.mean_all(g.square(model.query_instance({Point3(0.4, 0.5, 0.6)}, g)));
    g.backward(loss, unit_seed());
    double geo_grad = 0.0;
    for (std::size_t i = 0; i < store.grad("geo.l0.w").size(); ++i) {
      geo_grad += std::abs(store.grad("geo.l0.w")[i]);
    }
    CHECK(geo_grad > 0.0);
  }
}

TEST_CASE("sigma is independent of view direction") {
  ParamStore store;
  Rng rng(12);
  FieldModel model(small_config(), store, rng);
  CompGraph g(&store);
  auto geo = model.query_geometry({Point3(0.3, 0.6, 0.2)}, g);
  double sigma = g.value(geo.sigma)[0];
  // Direction only enters query_color; sigma is already fixed by position.
  model.query_color(geo.fg, {Point3(1, 0, 0)}, g);
  CHECK(g.value(geo.sigma)[0] == sigma);
}

TEST_CASE("field gradients match finite differences end to end") {
  ParamStore store;
  Rng rng(13);
  FieldConfig cfg = small_config();
  FieldModel model(cfg, store, rng);
  // Move every parameter to O(1): at the near-zero init scale the ReLU
  // pre-activations sit on their kinks and central differences straddle them.
  Rng kick(55);
  for (auto& [name, entry] : store.entries()) {
    for (std::size_t i = 0; i < entry.value.size(); ++i) entry.value[i] = kick.uniform(-0.4, 0.4);
  }
  std::vector<Point3> xs = {{0.31, 0.52, 0.73}, {0.81, 0.12, 0.44}};
  std::vector<Point3> ds = {Point3(0, 0, 1), Point3(1, 0, 0)};
  LossFn fn = [&](ParamStore& s, bool record) {
    CompGraph g(&s);
    auto geo = model.query_geometry(xs, g);
    NodeId rgb = model.query_color(geo.fg, ds, g);
    NodeId sem = model.query_semantic(geo.fg, g);
    NodeId inst = model.query_instance(xs, g);
    NodeId loss = g.add(g.add(g.mean_all(g.square(rgb)), g.mean_all(g.square(sem))),
                        g.add(g.mean_all(g.square(inst)), g.mean_all(geo.sigma)));
    double v = g.value(loss)[0];
    if (record) {
      Tensor seed(1, 1);
      seed[0] = 1.0;
      g.backward(loss, seed);
    }
    return v;
  };
  CHECK(finite_difference_check(fn, store, 1e-5, 160, 77) < 1e-5);
}

TEST_CASE("checkpoint: byte-exact round trip with config header") {
  ParamStore store;
  Rng rng(14);
  FieldConfig cfg = small_config(InstanceArch::kSharedHhe);
  FieldModel model(cfg, store, rng);
  std::string path1 = "ck_roundtrip_a.pvlf";
  std::string path2 = "ck_roundtrip_b.pvlf";
  save_checkpoint(path1, cfg, store);
  Checkpoint ck = load_checkpoint(path1);
  CHECK(ck.config.arch == InstanceArch::kSharedHhe);
  CHECK(ck.config.fg_width == cfg.fg_width);
  CHECK(ck.config.grid.levels == cfg.grid.levels);
  save_checkpoint(path2, ck.config, ck.params);
  std::ifstream f1(path1, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  CHECK(!b1.empty());
  // attach validates shapes and reapplies lr scales
  FieldModel restored = FieldModel::attach(ck.config, ck.params);
  CHECK(ck.params.entry("hhe1.level0").lr_scale == 10.0);
  CompGraph g(&ck.params);
  CompGraph g0(&store);
  Tensor a = g.value(restored.query_instance({Point3(0.2, 0.4, 0.6)}, g));
  Tensor b = g0.value(model.query_instance({Point3(0.2, 0.4, 0.6)}, g0));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  std::remove(path1.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("checkpoint: bad magic rejected") {
  std::string path = "ck_badmagic.pvlf";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE12345";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("instance arch string round trip") {
  for (auto arch : {InstanceArch::kDecoupled, InstanceArch::kSharedHhe, InstanceArch::kStacked}) {
    CHECK(instance_arch_from_string(to_string(arch)) == arch);
  }
  CHECK_THROWS_AS(instance_arch_from_string("bogus"), ConfigError);
}
