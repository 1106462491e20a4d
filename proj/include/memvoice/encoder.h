// memvoice/encoder.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Split bidirectional encoder with an optional per-frame embedding read
// between two layer stacks: Enc1 (layers 1..l), read + concat + projection,
// Enc2 (layers l+1..L). l=0 adapts the raw input features.

#ifndef MEMVOICE_ENCODER_H_
#define MEMVOICE_ENCODER_H_

#include <random>
#include <vector>

#include "memvoice/autodiff.h"
#include "memvoice/memory.h"
#include "memvoice/nn.h"
#include "memvoice/tensor.h"

namespace memvoice {

enum class Adaptation { kNone, kMemory, kExternal };

const char* adaptation_name(Adaptation a);
Adaptation adaptation_from_name(const std::string& name);

struct EncoderConfig {
  int num_layers = 3;       // L
  int insertion_layer = 1;  // l in 0..L
  int hidden = 32;          // per-layer output width
  int feature_dim = 8;      // input feature width
  int post_concat = 0;      // 0 = match the width Enc2 expects
  Adaptation adaptation = Adaptation::kNone;

  void validate() const;
  // Width of the stream where the read is inserted (features when l=0).
  int insert_width() const { return insertion_layer == 0 ? feature_dim : hidden; }
  int post_concat_width() const {
    return post_concat > 0 ? post_concat : insert_width();
  }
};

struct EncoderParams {
  EncoderConfig config;
  int embed_dim = 0;                       // D; 0 when adaptation = none
  std::vector<EncoderLayerParams> layers;  // L stacks
  Parameter query_w, query_b;              // memory variant only
  Parameter concat_w, concat_b;            // memory and external variants

  static EncoderParams init(const EncoderConfig& config, int embed_dim,
                            std::mt19937_64& rng);
  std::vector<Parameter*> params();
};

struct EncodedSequence {
  Tensor hidden;             // T x H
  Tensor per_frame_weights;  // T x N when the memory read ran, else empty
  bool has_weights = false;
};

struct EncodeResult {
  Var output;                // T x H on the tape
  Tensor per_frame_weights;  // as above
  bool has_weights = false;
};

// One encode pass on the caller's tape. `memory` must be non-null for the
// memory variant; `external_embedding` must be non-null for the external
// variant; both must be null otherwise.
EncodeResult encode_on_tape(Tape& tape, EncoderParams& params, Var features,
                            const SpeakerMemory* memory,
                            const ReadHeadConfig& read_config,
                            const Tensor* external_embedding);

// Value-level wrappers running on a private tape.
EncodedSequence encode_adapted(const Tensor& features, const SpeakerMemory& memory,
                               const ReadHeadConfig& read_config,
                               EncoderParams& params);
EncodedSequence encode_baseline(const Tensor& features, EncoderParams& params);
EncodedSequence encode_external(const Tensor& features, const Tensor& embedding,
                                EncoderParams& params);

}  // namespace memvoice

#endif  // MEMVOICE_ENCODER_H_
