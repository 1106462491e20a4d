// memvoice/model.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Full recognizer: adaptive encoder, per-frame CTC head, attention decoder,
// and the frozen speaker memory when the memory variant is active.

#ifndef MEMVOICE_MODEL_H_
#define MEMVOICE_MODEL_H_

#include <random>
#include <string>
#include <vector>

#include "memvoice/decoder.h"
#include "memvoice/encoder.h"
#include "memvoice/memory.h"

namespace memvoice {

struct ModelConfig {
  EncoderConfig encoder;
  ReadHeadConfig read_head;
  int vocab = 9;          // blank + eos + unk + real symbols
  int embed_dim = 8;      // speaker embedding width D
  int dec_hidden = 32;
  int dec_embed = 8;
  int attn_dim = 16;
  int loc_channels = 4;
  int loc_width = 3;

  void validate() const;
  DecoderConfig decoder_config() const;
  // Width of the final encoder stream the heads consume.
  int encoder_out_width() const;
};

struct AsrModel {
  ModelConfig config;
  EncoderParams encoder;
  Parameter ctc_w, ctc_b;  // vocab x H, vocab
  DecoderParams decoder;
  SpeakerMemory memory;    // only meaningful for the memory variant

  static AsrModel init(const ModelConfig& config, std::mt19937_64& rng);

  // Stable order: encoder stacks, read-path projections, ctc head, decoder.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_memory(SpeakerMemory m);
};

struct ForwardLoss {
  double joint = 0.0;
  double ctc = 0.0;
  double att = 0.0;
};

// One labeled utterance through both objectives. labels are real symbols
// (no blank/eos); eos is appended internally for the attention branch.
// `external_embedding` is required exactly for the external variant.
// with_grad accumulates into Parameter::grad (caller resets).
ForwardLoss forward_loss(AsrModel& model, const Tensor& features,
                         const std::vector<int>& labels,
                         const Tensor* external_embedding, double lambda,
                         bool with_grad);

// Encode per the model's variant and beam-decode (beam=1 is greedy).
Hypothesis transcribe(AsrModel& model, const Tensor& features,
                      const Tensor* external_embedding, int beam, int max_len);

// Bitwise JSON round trip of config, parameters, and memory.
std::string model_to_json(const AsrModel& model);
AsrModel model_from_json(const std::string& text);

}  // namespace memvoice

#endif  // MEMVOICE_MODEL_H_
