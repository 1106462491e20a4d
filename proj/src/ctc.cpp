// src/ctc.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memvoice/util.h"

namespace memvoice {

namespace {

void check_labels(const std::vector<int>& y, int vocab) {
  if (y.empty()) throw std::invalid_argument("ctc: empty label sequence");
  for (int v : y) {
    if (v == kBlank) throw std::invalid_argument("ctc: blank inside label sequence");
    if (v < 0 || v >= vocab) {
      throw std::invalid_argument("ctc: label " + std::to_string(v) +
                                  " outside vocabulary of size " +
                                  std::to_string(vocab));
    }
  }
}

Tensor log_softmax_rows(const Tensor& logits) {
  const int t_len = static_cast<int>(logits.rows());
  const int vocab = static_cast<int>(logits.cols());
  Tensor out({t_len, vocab});
  for (int t = 0; t < t_len; ++t) {
    double mx = logits.at(t, 0);
    for (int v = 1; v < vocab; ++v) mx = std::max(mx, logits.at(t, v));
    double z = 0.0;
    for (int v = 0; v < vocab; ++v) z += std::exp(logits.at(t, v) - mx);
    const double log_z = mx + std::log(z);
    for (int v = 0; v < vocab; ++v) out.at(t, v) = logits.at(t, v) - log_z;
  }
  return out;
}

}  // namespace

std::vector<int> augment_labels(const std::vector<int>& y) {
  if (y.empty()) throw std::invalid_argument("ctc: empty label sequence");
  std::vector<int> aug;
  aug.reserve(2 * y.size() + 1);
  aug.push_back(kBlank);
  for (int v : y) {
    if (v == kBlank) throw std::invalid_argument("ctc: blank inside label sequence");
    aug.push_back(v);
    aug.push_back(kBlank);
  }
  return aug;
}

int min_frames_for(const std::vector<int>& y) {
  int frames = static_cast<int>(y.size());
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] == y[i - 1]) ++frames;
  }
  return frames;
}

CtcLattice ctc_lattice(const Tensor& logits, const std::vector<int>& y) {
  if (logits.ndim() != 2) {
    throw std::invalid_argument("ctc: logits must be T x V, got " +
                                logits.shape_str());
  }
  const int t_len = static_cast<int>(logits.rows());
  const int vocab = static_cast<int>(logits.cols());
  check_labels(y, vocab);
  if (t_len < min_frames_for(y)) {
    throw CtcInfeasible("ctc: " + std::to_string(t_len) +
                        " frames cannot fit a label sequence needing " +
                        std::to_string(min_frames_for(y)));
  }

  const std::vector<int> aug = augment_labels(y);
  const int s_len = static_cast<int>(aug.size());
  Tensor lp = log_softmax_rows(logits);

  Tensor alpha({t_len, s_len});
  Tensor beta({t_len, s_len});
  alpha.fill(kLogZero);
  beta.fill(kLogZero);

  // Skipping from u-2 to u is legal when u is a label that differs from the
  // label two slots back (blanks and repeats must be visited or separated).
  auto can_skip = [&aug](int u) {
    return aug[u] != kBlank && u >= 2 && aug[u] != aug[u - 2];
  };

  alpha.at(0, 0) = lp.at(0, aug[0]);
  if (s_len > 1) alpha.at(0, 1) = lp.at(0, aug[1]);
  for (int t = 1; t < t_len; ++t) {
    for (int u = 0; u < s_len; ++u) {
      double acc = alpha.at(t - 1, u);
      if (u >= 1) acc = log_sum_exp(acc, alpha.at(t - 1, u - 1));
      if (u >= 2 && can_skip(u)) acc = log_sum_exp(acc, alpha.at(t - 1, u - 2));
      alpha.at(t, u) = acc == kLogZero ? kLogZero : acc + lp.at(t, aug[u]);
    }
  }

  beta.at(t_len - 1, s_len - 1) = lp.at(t_len - 1, aug[s_len - 1]);
  if (s_len > 1) beta.at(t_len - 1, s_len - 2) = lp.at(t_len - 1, aug[s_len - 2]);
  for (int t = t_len - 2; t >= 0; --t) {
    for (int u = s_len - 1; u >= 0; --u) {
      double acc = beta.at(t + 1, u);
      if (u + 1 < s_len) acc = log_sum_exp(acc, beta.at(t + 1, u + 1));
      if (u + 2 < s_len && can_skip(u + 2)) {
        acc = log_sum_exp(acc, beta.at(t + 1, u + 2));
      }
      beta.at(t, u) = acc == kLogZero ? kLogZero : acc + lp.at(t, aug[u]);
    }
  }

  double log_p = alpha.at(t_len - 1, s_len - 1);
  if (s_len > 1) log_p = log_sum_exp(log_p, alpha.at(t_len - 1, s_len - 2));

  CtcLattice lattice;
  lattice.alpha = std::move(alpha);
  lattice.beta = std::move(beta);
  lattice.log_probs = std::move(lp);
  lattice.augmented = aug;
  lattice.log_prob = log_p;
  return lattice;
}

double posterior_sum(const CtcLattice& lattice, int t) {
  const int t_len = static_cast<int>(lattice.alpha.rows());
  if (t < 1 || t > t_len) {
    throw std::out_of_range("posterior_sum: t=" + std::to_string(t) +
                            " outside 1.." + std::to_string(t_len));
  }
  const int row = t - 1;
  const int s_len = static_cast<int>(lattice.alpha.cols());
  double acc = kLogZero;
  for (int u = 0; u < s_len; ++u) {
    const double a = lattice.alpha.at(row, u);
    const double b = lattice.beta.at(row, u);
    if (a == kLogZero || b == kLogZero) continue;
    acc = log_sum_exp(acc, a + b - lattice.log_probs.at(row, lattice.augmented[u]));
  }
  return acc == kLogZero ? 0.0 : std::exp(acc);
}

CtcResult ctc_loss(const Tensor& logits, const std::vector<int>& y) {
  CtcLattice lattice = ctc_lattice(logits, y);
  const int t_len = static_cast<int>(logits.rows());
  const int vocab = static_cast<int>(logits.cols());
  const int s_len = static_cast<int>(lattice.augmented.size());
  const double log_p = lattice.log_prob;

  // d(-log P)/d logit[t][k] = s_t(k) - G_t(k) / (P * s_t(k)), with
  // G_t(k) = sum over states u labeled k of alpha[t][u]*beta[t][u].
  Tensor grad({t_len, vocab});
  std::vector<double> log_g(vocab);
  for (int t = 0; t < t_len; ++t) {
    std::fill(log_g.begin(), log_g.end(), kLogZero);
    for (int u = 0; u < s_len; ++u) {
      const double a = lattice.alpha.at(t, u);
      const double b = lattice.beta.at(t, u);
      if (a == kLogZero || b == kLogZero) continue;
      double& slot = log_g[lattice.augmented[u]];
      slot = log_sum_exp(slot, a + b);
    }
    for (int v = 0; v < vocab; ++v) {
      const double s = std::exp(lattice.log_probs.at(t, v));
      double g = s;
      if (log_g[v] != kLogZero) {
        g -= std::exp(log_g[v] - log_p - lattice.log_probs.at(t, v));
      }
      grad.at(t, v) = g;
    }
  }
  return {-log_p, std::move(grad)};
}

double ctc_loss_bruteforce(const Tensor& logits, const std::vector<int>& y) {
  const int t_len = static_cast<int>(logits.rows());
  const int vocab = static_cast<int>(logits.cols());
  if (t_len > 8 || vocab > 4) {
    throw std::invalid_argument("ctc_loss_bruteforce: refusing T=" +
                                std::to_string(t_len) + ", V=" +
                                std::to_string(vocab) + " (max 8, 4)");
  }
  check_labels(y, vocab);
  Tensor lp = log_softmax_rows(logits);

  std::vector<int> path(t_len, 0);
  double total = 0.0;
  for (;;) {
    // collapse: merge consecutive repeats, then drop blanks
    std::vector<int> collapsed;
    for (int t = 0; t < t_len; ++t) {
      if (t > 0 && path[t] == path[t - 1]) continue;
      if (path[t] != kBlank) collapsed.push_back(path[t]);
    }
    if (collapsed == y) {
      double log_path = 0.0;
      for (int t = 0; t < t_len; ++t) log_path += lp.at(t, path[t]);
      total += std::exp(log_path);
    }
    int i = t_len - 1;
    while (i >= 0 && path[i] == vocab - 1) path[i--] = 0;
    if (i < 0) break;
    ++path[i];
  }
  if (total == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

Var ctc_loss_op(Tape& tape, Var logits, const std::vector<int>& y) {
  CtcResult result = ctc_loss(tape.val(logits), y);
  Tensor grad = std::move(result.grad_logits);
  Tensor loss = Tensor::scalar(result.loss);
  return tape.make(loss, [logits, grad](Tape& t, int id) {
    const double g = t.grad_ref(Var{&t, id})[0];
    Tensor& gl = t.grad_ref(logits);
    for (std::size_t i = 0; i < grad.size(); ++i) gl[i] += g * grad[i];
  });
}

}  // namespace memvoice
