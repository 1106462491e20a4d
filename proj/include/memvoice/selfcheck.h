// memvoice/selfcheck.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MEMVOICE_SELFCHECK_H_
#define MEMVOICE_SELFCHECK_H_

#include <cstdint>

#include "memvoice/gradcheck.h"
#include "memvoice/model.h"

namespace memvoice {

// Finite-difference verification of the joint loss gradients on a fixed
// tiny instance: 2 frames, 3 feature dims, 2 memory speakers, 2 encoder
// layers with the read inserted after the first. The default seed keeps
// every gradient entry of this instance well above the noise floor of
// central differences at eps=1e-5, so the 1e-4 gate has real margin.
//
// With inject_fault the analytic gradient of the first parameter group is
// negated after the forward pass; the check must then fail, which
// exercises the failure path end to end.
GradCheckReport joint_gradient_selfcheck(Similarity similarity,
                                         std::uint64_t model_seed = 20,
                                         bool inject_fault = false);

}  // namespace memvoice

#endif  // MEMVOICE_SELFCHECK_H_
