// memvoice/gradcheck.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "memvoice/autodiff.h"

namespace memvoice {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::vector<GradCheckEntry> per_param;

  bool passed(double tol = 1e-4) const { return max_rel_error <= tol; }
};

// Scalar loss evaluated at the current parameter values. When with_grad is
// true the callee must also leave d(loss)/d(param) in each Parameter::grad
// (after resetting it). The loss must be deterministic; the checker errors
// out if two evaluations at the same point differ.
using LossFn = std::function<double(bool with_grad)>;

// Compares analytic gradients to central differences
// (L(x+eps) - L(x-eps)) / (2 eps) entry by entry and reports the worst
// relative error |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport check_gradient(const LossFn& loss_fn,
                               const std::vector<Parameter*>& params,
                               double eps = 1e-5);

}  // namespace memvoice
