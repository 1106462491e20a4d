// memvoice/tensor.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/tensor.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace memvoice {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), values_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_numel(shape_)) {
    throw std::invalid_argument("tensor: value count does not match shape " +
                                shape_str());
  }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(int rows, int cols) { return Tensor({rows, cols}); }

int Tensor::rows() const {
  if (ndim() != 2) throw std::invalid_argument("tensor: rows() on " + shape_str());
  return shape_[0];
}

int Tensor::cols() const {
  if (ndim() != 2) throw std::invalid_argument("tensor: cols() on " + shape_str());
  return shape_[1];
}

double& Tensor::at(int r, int c) {
  return values_[static_cast<std::size_t>(r) * static_cast<std::size_t>(shape_[1]) +
                 static_cast<std::size_t>(c)];
}

double Tensor::at(int r, int c) const {
  return values_[static_cast<std::size_t>(r) * static_cast<std::size_t>(shape_[1]) +
                 static_cast<std::size_t>(c)];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : values_) x = v;
}

std::string Tensor::shape_str() const {
  if (shape_.empty()) return "[scalar]";
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace memvoice
