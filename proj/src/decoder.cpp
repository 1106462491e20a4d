// src/decoder.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/decoder.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memvoice/ctc.h"

namespace memvoice {

namespace {

void check_token(const DecoderConfig& config, int token) {
  if (token < 0 || token >= config.vocab) {
    throw std::invalid_argument("decoder: token " + std::to_string(token) +
                                " outside vocabulary of size " +
                                std::to_string(config.vocab));
  }
}

// f[t][k] = sum_j filters[k][j] * w[t + j - pad], zero-padded at the ends.
Var location_conv(Tape& tape, Var prev_w, Var filters) {
  const Tensor& w = tape.val(prev_w);
  const Tensor& f = tape.val(filters);
  const int t_len = static_cast<int>(w.size());
  const int channels = f.rows(), width = f.cols();
  const int pad = (width - 1) / 2;
  Tensor out({t_len, channels});
  for (int t = 0; t < t_len; ++t) {
    for (int k = 0; k < channels; ++k) {
      double acc = 0.0;
      for (int j = 0; j < width; ++j) {
        const int s = t + j - pad;
        if (s >= 0 && s < t_len) acc += f.at(k, j) * w[s];
      }
      out.at(t, k) = acc;
    }
  }
  int wid = prev_w.id, fid = filters.id;
  return tape.make(std::move(out),
                   [wid, fid, t_len, channels, width, pad](Tape& t, int self) {
    const Tensor& g = t.grad_ref(Var{&t, self});
    const Tensor& wv = t.val(Var{&t, wid});
    const Tensor& fv = t.val(Var{&t, fid});
    Tensor& gw = t.grad_ref(Var{&t, wid});
    Tensor& gf = t.grad_ref(Var{&t, fid});
    for (int r = 0; r < t_len; ++r) {
      for (int k = 0; k < channels; ++k) {
        const double gv = g.at(r, k);
        for (int j = 0; j < width; ++j) {
          const int s = r + j - pad;
          if (s < 0 || s >= t_len) continue;
          gw[s] += gv * fv.at(k, j);
          gf.at(k, j) += gv * wv[s];
        }
      }
    }
  });
}

void check_targets(const DecoderConfig& config, const std::vector<int>& targets) {
  if (targets.empty()) {
    throw std::invalid_argument("decoder: empty target sequence");
  }
  if (targets.back() != kEos) {
    throw std::invalid_argument("decoder: target sequence must end with eos");
  }
  for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
    check_token(config, targets[i]);
    if (targets[i] == kBlank || targets[i] == kEos) {
      throw std::invalid_argument(
          "decoder: blank/eos inside target sequence at position " +
          std::to_string(i));
    }
  }
}

}  // namespace

void DecoderConfig::validate() const {
  if (vocab < 3) throw std::invalid_argument("decoder: vocab must cover blank, eos, unk");
  if (enc_dim < 1 || hidden < 1 || embed_dim < 1 || attn_dim < 1 ||
      loc_channels < 1) {
    throw std::invalid_argument("decoder: dimensions must be positive");
  }
  if (loc_width < 1 || loc_width % 2 == 0) {
    throw std::invalid_argument("decoder: loc_width must be odd");
  }
}

DecoderParams DecoderParams::init(const DecoderConfig& config,
                                  std::mt19937_64& rng) {
  config.validate();
  DecoderParams p;
  p.config = config;
  p.embedding = Parameter("dec.embedding",
                          glorot_uniform(config.vocab, config.embed_dim, rng));
  p.attn_enc_w = Parameter("dec.attn_enc_w",
                           glorot_uniform(config.attn_dim, config.enc_dim, rng));
  p.attn_enc_b = make_bias("dec.attn_enc_b", config.attn_dim);
  p.attn_state_w = Parameter("dec.attn_state_w",
                             glorot_uniform(config.attn_dim, config.hidden, rng));
  p.attn_loc_w = Parameter("dec.attn_loc_w",
                           glorot_uniform(config.attn_dim, config.loc_channels, rng));
  p.attn_loc_filters = Parameter("dec.attn_loc_filters",
                                 glorot_uniform(config.loc_channels,
                                                config.loc_width, rng));
  Tensor v_init = glorot_uniform(1, config.attn_dim, rng);
  p.attn_v = Parameter("dec.attn_v", Tensor({config.attn_dim}, v_init.values()));
  p.cell = GatedCellParams::init("dec.cell", config.embed_dim + config.enc_dim,
                                 config.hidden, rng);
  p.out_w = Parameter("dec.out_w",
                      glorot_uniform(config.vocab,
                                     config.hidden + config.enc_dim, rng));
  p.out_b = make_bias("dec.out_b", config.vocab);
  return p;
}

std::vector<Parameter*> DecoderParams::params() {
  std::vector<Parameter*> out{&embedding,   &attn_enc_w, &attn_enc_b,
                              &attn_state_w, &attn_loc_w, &attn_loc_filters,
                              &attn_v,      &out_w,      &out_b};
  for (Parameter* p : cell.params()) out.push_back(p);
  return out;
}

DecoderVars DecoderVars::bind(Tape& tape, DecoderParams& p) {
  DecoderVars v;
  v.config = &p.config;
  v.embedding = tape.param(p.embedding);
  v.attn_enc_w = tape.param(p.attn_enc_w);
  v.attn_enc_b = tape.param(p.attn_enc_b);
  v.attn_state_w = tape.param(p.attn_state_w);
  v.attn_loc_w = tape.param(p.attn_loc_w);
  v.attn_loc_filters = tape.param(p.attn_loc_filters);
  v.attn_v = tape.param(p.attn_v);
  v.cell = GatedCellVars::bind(tape, p.cell);
  v.out_w = tape.param(p.out_w);
  v.out_b = tape.param(p.out_b);
  return v;
}

DecoderState initial_state(Tape& tape, const DecoderVars& dv, int t_len) {
  if (t_len < 1) throw std::invalid_argument("decoder: empty encoder output");
  DecoderState s;
  s.hidden = tape.leaf(Tensor({dv.config->hidden}));
  Tensor uniform({t_len});
  uniform.fill(1.0 / t_len);
  s.weights = tape.leaf(uniform);
  s.prev_token = kEos;
  return s;
}

Var project_encoder(Tape& tape, const DecoderVars& dv, Var enc) {
  (void)tape;
  return affine(enc, dv.attn_enc_w, dv.attn_enc_b);
}

AttendResult attend(Tape& tape, const DecoderVars& dv, Var enc, Var enc_proj,
                    const DecoderState& state) {
  const int t_len = tape.val(enc).rows();
  Var loc = location_conv(tape, state.weights, dv.attn_loc_filters);
  Var zero_b = tape.leaf(Tensor({dv.config->attn_dim}));
  Var loc_proj = affine(loc, dv.attn_loc_w, zero_b);
  Var state_proj = matvec(dv.attn_state_w, state.hidden);

  std::vector<Var> scores;
  scores.reserve(t_len);
  for (int t = 0; t < t_len; ++t) {
    Var pre = add(add(row(enc_proj, t), row(loc_proj, t)), state_proj);
    scores.push_back(dot(dv.attn_v, vtanh(pre)));
  }
  Var weights = softmax(stack_scalars(scores));
  Var context = weighted_rowsum(enc, weights);
  return {context, weights};
}

StepResult decode_step(Tape& tape, const DecoderVars& dv, Var enc,
                       Var enc_proj, const DecoderState& state) {
  check_token(*dv.config, state.prev_token);
  AttendResult att = attend(tape, dv, enc, enc_proj, state);
  Var emb = row(dv.embedding, state.prev_token);
  Var new_hidden = cell_step(dv.cell, concat(emb, att.context), state.hidden);
  Var logits = affine(concat(new_hidden, att.context), dv.out_w, dv.out_b);
  StepResult out;
  out.log_dist = log_softmax(logits);
  out.state.hidden = new_hidden;
  out.state.weights = att.weights;
  out.state.prev_token = state.prev_token;  // caller advances after choosing
  return out;
}

Var attention_loss_op(Tape& tape, const DecoderVars& dv, Var enc,
                      const std::vector<int>& targets) {
  check_targets(*dv.config, targets);
  const int t_len = tape.val(enc).rows();
  Var enc_proj = project_encoder(tape, dv, enc);
  DecoderState state = initial_state(tape, dv, t_len);
  std::vector<Var> step_losses;
  step_losses.reserve(targets.size());
  for (int target : targets) {
    StepResult step = decode_step(tape, dv, enc, enc_proj, state);
    step_losses.push_back(neg(pick(step.log_dist, target)));
    state = step.state;
    state.prev_token = target;
  }
  return vsum(stack_scalars(step_losses));
}

namespace {

struct BeamEntry {
  std::vector<int> tokens;
  double score = 0.0;
  DecoderState state;
};

Hypothesis finish(const BeamEntry& e, bool terminated) {
  Hypothesis h;
  h.tokens = e.tokens;
  h.score = e.score;
  h.terminated = terminated;
  return h;
}

Hypothesis run_greedy(Tape& tape, const DecoderVars& dv, Var enc, int max_len) {
  const int t_len = tape.val(enc).rows();
  Var enc_proj = project_encoder(tape, dv, enc);
  BeamEntry cur;
  cur.state = initial_state(tape, dv, t_len);
  for (int step = 0; step < max_len; ++step) {
    StepResult sr = decode_step(tape, dv, enc, enc_proj, cur.state);
    const Tensor& log_dist = tape.val(sr.log_dist);
    int best = -1;
    for (int v = 0; v < dv.config->vocab; ++v) {
      if (v == kBlank) continue;
      if (best < 0 || log_dist[v] > log_dist[best]) best = v;
    }
    cur.score += log_dist[best];
    if (best == kEos) return finish(cur, true);
    cur.tokens.push_back(best);
    cur.state = sr.state;
    cur.state.prev_token = best;
  }
  return finish(cur, false);
}

}  // namespace

Hypothesis greedy_decode(DecoderParams& params, const Tensor& enc, int max_len) {
  if (max_len < 1) throw std::invalid_argument("decoder: max_len must be >= 1");
  Tape tape;
  DecoderVars dv = DecoderVars::bind(tape, params);
  return run_greedy(tape, dv, tape.leaf(enc), max_len);
}

Hypothesis beam_decode(DecoderParams& params, const Tensor& enc, int beam,
                       int max_len) {
  if (beam < 1) throw std::invalid_argument("decoder: beam must be >= 1");
  if (max_len < 1) throw std::invalid_argument("decoder: max_len must be >= 1");
  Tape tape;
  DecoderVars dv = DecoderVars::bind(tape, params);
  Var encv = tape.leaf(enc);
  const int t_len = enc.rows();
  Var enc_proj = project_encoder(tape, dv, encv);

  // The greedy hypothesis seeds the finished pool, so the returned score can
  // never fall below it and beam=1 reproduces greedy exactly.
  Hypothesis best = run_greedy(tape, dv, encv, max_len);

  std::vector<BeamEntry> live(1);
  live[0].state = initial_state(tape, dv, t_len);
  for (int step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<BeamEntry> candidates;
    candidates.reserve(live.size() * static_cast<std::size_t>(dv.config->vocab));
    for (BeamEntry& entry : live) {
      StepResult sr = decode_step(tape, dv, encv, enc_proj, entry.state);
      const Tensor& log_dist = tape.val(sr.log_dist);
      for (int v = 0; v < dv.config->vocab; ++v) {
        if (v == kBlank) continue;
        BeamEntry next;
        next.tokens = entry.tokens;
        next.score = entry.score + log_dist[v];
        next.state = sr.state;
        next.state.prev_token = v;
        if (v != kEos) next.tokens.push_back(v);
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const BeamEntry& a, const BeamEntry& b) {
                       return a.score > b.score;
                     });
    if (static_cast<int>(candidates.size()) > beam) candidates.resize(beam);
    live.clear();
    for (BeamEntry& c : candidates) {
      if (c.state.prev_token == kEos) {
        if (!best.terminated || c.score > best.score) best = finish(c, true);
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  if (!best.terminated) {
    for (const BeamEntry& e : live) {
      if (e.score > best.score) best = finish(e, false);
    }
  }
  return best;
}

double sequence_score(DecoderParams& params, const Tensor& enc,
                      const std::vector<int>& tokens) {
  std::vector<int> targets = tokens;
  targets.push_back(kEos);
  Tape tape;
  DecoderVars dv = DecoderVars::bind(tape, params);
  Var loss = attention_loss_op(tape, dv, tape.leaf(enc), targets);
  return -tape.val(loss)[0];
}

}  // namespace memvoice
