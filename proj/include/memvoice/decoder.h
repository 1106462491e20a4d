// memvoice/decoder.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Attention decoder: location-aware additive attention over encoder frames,
// a single gated recurrent cell, teacher-forced sequence loss, and
// greedy/beam decoding.

#ifndef MEMVOICE_DECODER_H_
#define MEMVOICE_DECODER_H_

#include <random>
#include <vector>

#include "memvoice/autodiff.h"
#include "memvoice/nn.h"
#include "memvoice/tensor.h"

namespace memvoice {

inline constexpr int kEos = 1;
inline constexpr int kUnk = 2;

struct DecoderConfig {
  int vocab = 9;         // includes blank, eos, unk
  int enc_dim = 32;      // encoder output width
  int hidden = 32;       // recurrent cell width
  int embed_dim = 8;     // token embedding width
  int attn_dim = 16;     // additive attention width
  int loc_channels = 4;  // conv channels over previous attention weights
  int loc_width = 3;     // conv width, odd

  void validate() const;
};

struct DecoderParams {
  DecoderConfig config;
  Parameter embedding;         // vocab x embed_dim
  Parameter attn_enc_w;        // attn_dim x enc_dim
  Parameter attn_enc_b;        // attn_dim
  Parameter attn_state_w;      // attn_dim x hidden
  Parameter attn_loc_w;        // attn_dim x loc_channels
  Parameter attn_loc_filters;  // loc_channels x loc_width
  Parameter attn_v;            // attn_dim
  GatedCellParams cell;        // input embed_dim + enc_dim
  Parameter out_w;             // vocab x (hidden + enc_dim)
  Parameter out_b;             // vocab

  static DecoderParams init(const DecoderConfig& config, std::mt19937_64& rng);
  std::vector<Parameter*> params();
};

struct DecoderVars {
  const DecoderConfig* config;
  Var embedding, attn_enc_w, attn_enc_b, attn_state_w, attn_loc_w,
      attn_loc_filters, attn_v, out_w, out_b;
  GatedCellVars cell;

  static DecoderVars bind(Tape& tape, DecoderParams& p);
};

// Recurrent state plus the previous step's attention weights and token.
struct DecoderState {
  Var hidden;    // cell state
  Var weights;   // previous attention weights over T frames
  int prev_token = kEos;
};

// Fresh state: zero hidden, uniform attention over T frames, eos history.
DecoderState initial_state(Tape& tape, const DecoderVars& dv, int t_len);

// One-time projection of the encoder output for the additive scores.
Var project_encoder(Tape& tape, const DecoderVars& dv, Var enc);

struct AttendResult {
  Var context;  // enc_dim
  Var weights;  // T, sums to 1
};

AttendResult attend(Tape& tape, const DecoderVars& dv, Var enc, Var enc_proj,
                    const DecoderState& state);

struct StepResult {
  Var log_dist;  // vocab, log probabilities
  DecoderState state;
};

StepResult decode_step(Tape& tape, const DecoderVars& dv, Var enc,
                       Var enc_proj, const DecoderState& state);

// Teacher-forced -sum log P(y_u | ...). targets must end with eos; earlier
// entries must be real symbols (not blank, not eos).
Var attention_loss_op(Tape& tape, const DecoderVars& dv, Var enc,
                      const std::vector<int>& targets);

struct Hypothesis {
  std::vector<int> tokens;  // emitted symbols, eos excluded
  double score = 0.0;       // sum of emitted log probabilities, eos included
  bool terminated = false;
};

// Blank is masked out at every step; decoding stops at eos or max_len.
Hypothesis greedy_decode(DecoderParams& params, const Tensor& enc, int max_len);
Hypothesis beam_decode(DecoderParams& params, const Tensor& enc, int beam,
                       int max_len);

// Log probability of emitting exactly `tokens` then eos; the exhaustive
// search oracle scores candidates with this.
double sequence_score(DecoderParams& params, const Tensor& enc,
                      const std::vector<int>& tokens);

}  // namespace memvoice

#endif  // MEMVOICE_DECODER_H_
