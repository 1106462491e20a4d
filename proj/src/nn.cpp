// memvoice/nn.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/nn.h"

#include <cmath>
#include <stdexcept>

namespace memvoice {

Tensor glorot_uniform(int fan_out, int fan_in, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t({fan_out, fan_in});
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Parameter make_weight(const std::string& name, int out_dim, int in_dim,
                      std::mt19937_64& rng) {
  return Parameter(name, glorot_uniform(out_dim, in_dim, rng));
}

Parameter make_bias(const std::string& name, int dim) {
  return Parameter(name, Tensor({dim}));
}

GatedCellParams GatedCellParams::init(const std::string& prefix, int in_dim,
                                      int hidden, std::mt19937_64& rng) {
  GatedCellParams p;
  p.w_update = make_weight(prefix + ".w_update", hidden, in_dim, rng);
  p.u_update = make_weight(prefix + ".u_update", hidden, hidden, rng);
  p.b_update = make_bias(prefix + ".b_update", hidden);
  p.w_cand = make_weight(prefix + ".w_cand", hidden, in_dim, rng);
  p.u_cand = make_weight(prefix + ".u_cand", hidden, hidden, rng);
  p.b_cand = make_bias(prefix + ".b_cand", hidden);
  return p;
}

std::vector<Parameter*> GatedCellParams::params() {
  return {&w_update, &u_update, &b_update, &w_cand, &u_cand, &b_cand};
}

GatedCellVars GatedCellVars::bind(Tape& tape, GatedCellParams& p) {
  return GatedCellVars{tape.param(p.w_update), tape.param(p.u_update),
                       tape.param(p.b_update), tape.param(p.w_cand),
                       tape.param(p.u_cand),   tape.param(p.b_cand)};
}

Var cell_step(const GatedCellVars& cell, Var x, Var h_prev) {
  Var gate = vsigmoid(add(affine(x, cell.w_u, cell.b_u), matvec(cell.u_u, h_prev)));
  Var cand = vtanh(add(affine(x, cell.w_c, cell.b_c), matvec(cell.u_c, h_prev)));
  return add(mul(one_minus(gate), h_prev), mul(gate, cand));
}

Var recurrent_layer(Tape& tape, const GatedCellVars& cell, Var seq, Direction dir) {
  const Tensor& sv = tape.val(seq);
  if (sv.ndim() != 2 || sv.rows() < 1) {
    throw std::invalid_argument("recurrent_layer: need [T x in] with T >= 1, got " +
                                sv.shape_str());
  }
  const int T = sv.rows();
  const int hidden = tape.val(cell.b_u).dim(0);
  Var h = tape.leaf(Tensor({hidden}));
  std::vector<Var> outputs(static_cast<std::size_t>(T));
  for (int step = 0; step < T; ++step) {
    const int t = dir == Direction::kForward ? step : T - 1 - step;
    h = cell_step(cell, row(seq, t), h);
    outputs[static_cast<std::size_t>(t)] = h;
  }
  return stack_rows(outputs);
}

Var bidirectional(Tape& tape, const GatedCellVars& fwd, const GatedCellVars& bwd,
                  Var seq) {
  Var f = recurrent_layer(tape, fwd, seq, Direction::kForward);
  Var b = recurrent_layer(tape, bwd, seq, Direction::kBackward);
  const int T = tape.val(seq).rows();
  std::vector<Var> rows_out(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    rows_out[static_cast<std::size_t>(t)] = concat(row(f, t), row(b, t));
  }
  return stack_rows(rows_out);
}

EncoderLayerParams EncoderLayerParams::init(const std::string& prefix, int in_dim,
                                            int hidden, std::mt19937_64& rng) {
  EncoderLayerParams p;
  p.fwd = GatedCellParams::init(prefix + ".fwd", in_dim, hidden, rng);
  p.bwd = GatedCellParams::init(prefix + ".bwd", in_dim, hidden, rng);
  p.proj_w = make_weight(prefix + ".proj_w", hidden, 2 * hidden, rng);
  p.proj_b = make_bias(prefix + ".proj_b", hidden);
  return p;
}

std::vector<Parameter*> EncoderLayerParams::params() {
  std::vector<Parameter*> out = fwd.params();
  for (Parameter* p : bwd.params()) out.push_back(p);
  out.push_back(&proj_w);
  out.push_back(&proj_b);
  return out;
}

Var encoder_layer(Tape& tape, EncoderLayerParams& layer, Var seq) {
  GatedCellVars f = GatedCellVars::bind(tape, layer.fwd);
  GatedCellVars b = GatedCellVars::bind(tape, layer.bwd);
  Var h = bidirectional(tape, f, b, seq);
  return affine(h, tape.param(layer.proj_w), tape.param(layer.proj_b));
}

}  // namespace memvoice
