// memvoice/gradcheck.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memvoice {

GradCheckReport check_gradient(const LossFn& loss_fn,
                               const std::vector<Parameter*>& params, double eps) {
  if (eps <= 0) throw std::invalid_argument("check_gradient: eps must be > 0");

  const double l0 = loss_fn(false);
  const double l1 = loss_fn(false);
  if (l0 != l1) {
    throw std::runtime_error("check_gradient: loss_fn is not deterministic (" +
                             std::to_string(l0) + " vs " + std::to_string(l1) + ")");
  }

  for (Parameter* p : params) p->reset_grad();
  loss_fn(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    GradCheckEntry entry{p.name, 0.0};
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + eps;
      const double lp = loss_fn(false);
      p.value[k] = saved - eps;
      const double lm = loss_fn(false);
      p.value[k] = saved;

      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = analytic[pi][k];
      const double rel =
          std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    if (entry.max_rel_error > report.max_rel_error) {
      report.max_rel_error = entry.max_rel_error;
      report.worst_param = entry.name;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace memvoice
