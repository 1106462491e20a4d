// memvoice/ctc.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact CTC loss via log-domain forward-backward over the blank-augmented
// label sequence, plus a brute-force path-enumeration oracle.

#ifndef MEMVOICE_CTC_H_
#define MEMVOICE_CTC_H_

#include <stdexcept>
#include <vector>

#include "memvoice/autodiff.h"
#include "memvoice/tensor.h"

namespace memvoice {

inline constexpr int kBlank = 0;

// The target cannot be aligned within the given number of frames.
class CtcInfeasible : public std::runtime_error {
 public:
  explicit CtcInfeasible(const std::string& what) : std::runtime_error(what) {}
};

// [y1..yU] -> [blank, y1, blank, y2, ..., yU, blank]. Labels must be
// nonempty and must not contain the blank index.
std::vector<int> augment_labels(const std::vector<int>& y);

// Fewest frames that admit any alignment: U plus one per adjacent repeat.
int min_frames_for(const std::vector<int>& y);

// Forward-backward tables. Both alpha and beta include the emission at
// frame t, so sum_u alpha[t][u]*beta[t][u]/s_t(y'_u) equals the sequence
// probability at every frame.
struct CtcLattice {
  Tensor alpha;             // T x S, log domain
  Tensor beta;              // T x S, log domain
  Tensor log_probs;         // T x V, log softmax of the logits
  std::vector<int> augmented;
  double log_prob;          // log P(y | x)
};

CtcLattice ctc_lattice(const Tensor& logits, const std::vector<int>& y);

// Eq.-style posterior sum at frame t (1-based), linear domain.
double posterior_sum(const CtcLattice& lattice, int t);

struct CtcResult {
  double loss;         // -log P
  Tensor grad_logits;  // T x V
};

CtcResult ctc_loss(const Tensor& logits, const std::vector<int>& y);

// Enumerates all V^T emission strings and sums the probability of those
// collapsing to y. Refuses instances beyond T=8 or V=4. Returns +inf when
// no path collapses to y.
double ctc_loss_bruteforce(const Tensor& logits, const std::vector<int>& y);

// Tape wrapper around ctc_loss; gradient flows into the logits node.
Var ctc_loss_op(Tape& tape, Var logits, const std::vector<int>& y);

}  // namespace memvoice

#endif  // MEMVOICE_CTC_H_
