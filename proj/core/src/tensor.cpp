// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/tensor.hpp"

#include <cmath>

#include "pvlff/errors.hpp"

namespace pvlff {

namespace {
std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols) : Tensor(std::vector<std::size_t>{rows, cols}) {}

Tensor Tensor::scalar(double v) {
  Tensor t(std::vector<std::size_t>{});
  t.values_[0] = v;
  return t;
}

Tensor Tensor::from_mat(const Mat& m) {
  Tensor t(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  t.mat() = m;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() < 2) return 1;
  PVLFF_CHECK(shape_.size() == 2, "Tensor: 2D view requested for rank > 2");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  if (shape_.size() == 1) return shape_[0];
  PVLFF_CHECK(shape_.size() == 2, "Tensor: 2D view requested for rank > 2");
  return shape_[1];
}

MatMap Tensor::mat() {
  return MatMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

ConstMatMap Tensor::mat() const {
  return ConstMatMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

void Tensor::fill(double v) {
  for (double& x : values_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : values_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  PVLFF_CHECK(shape_size(shape) == values_.size(), "Tensor::reshaped: size mismatch");
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = values_;
  return t;
}

}  // namespace pvlff
