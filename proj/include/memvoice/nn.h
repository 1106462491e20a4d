// memvoice/nn.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "memvoice/autodiff.h"

namespace memvoice {

// Glorot-uniform init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int fan_out, int fan_in, std::mt19937_64& rng);
Parameter make_weight(const std::string& name, int out_dim, int in_dim,
                      std::mt19937_64& rng);
Parameter make_bias(const std::string& name, int dim);  // zero-initialized

enum class Direction { kForward, kBackward };

// Single-gate gated recurrent cell (update gate + candidate):
//   u_t = sigmoid(W_u x_t + U_u h_{t-1} + b_u)
//   c_t = tanh   (W_c x_t + U_c h_{t-1} + b_c)
//   h_t = (1 - u_t) * h_{t-1} + u_t * c_t
struct GatedCellParams {
  Parameter w_update, u_update, b_update;
  Parameter w_cand, u_cand, b_cand;

  static GatedCellParams init(const std::string& prefix, int in_dim, int hidden,
                              std::mt19937_64& rng);
  std::vector<Parameter*> params();
  int hidden() const { return w_update.value.rows(); }
  int input_dim() const { return w_update.value.cols(); }
};

// Per-tape handles for one cell's parameters.
struct GatedCellVars {
  Var w_u, u_u, b_u, w_c, u_c, b_c;
  static GatedCellVars bind(Tape& tape, GatedCellParams& p);
};

Var cell_step(const GatedCellVars& cell, Var x, Var h_prev);

// seq:[T x in] -> [T x hidden]. Output row t is the state after consuming
// frame t (kForward) or after consuming frames T-1..t (kBackward).
Var recurrent_layer(Tape& tape, const GatedCellVars& cell, Var seq, Direction dir);

// Per-frame concatenation [forward ; backward] -> [T x 2*hidden].
Var bidirectional(Tape& tape, const GatedCellVars& fwd, const GatedCellVars& bwd,
                  Var seq);

// One encoder layer: bidirectional cell pair followed by a linear projection
// back to `hidden` units.
struct EncoderLayerParams {
  GatedCellParams fwd, bwd;
  Parameter proj_w, proj_b;  // [hidden x 2*hidden], [hidden]

  static EncoderLayerParams init(const std::string& prefix, int in_dim, int hidden,
                                 std::mt19937_64& rng);
  std::vector<Parameter*> params();
};

Var encoder_layer(Tape& tape, EncoderLayerParams& layer, Var seq);

}  // namespace memvoice
