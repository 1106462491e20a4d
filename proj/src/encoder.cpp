// src/encoder.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/encoder.h"

#include <stdexcept>
#include <string>

namespace memvoice {

const char* adaptation_name(Adaptation a) {
  switch (a) {
    case Adaptation::kNone: return "none";
    case Adaptation::kMemory: return "memory";
    case Adaptation::kExternal: return "external";
  }
  throw std::logic_error("unreachable adaptation kind");
}

Adaptation adaptation_from_name(const std::string& name) {
  if (name == "none") return Adaptation::kNone;
  if (name == "memory") return Adaptation::kMemory;
  if (name == "external") return Adaptation::kExternal;
  throw std::invalid_argument("unknown adaptation variant '" + name +
                              "' (want none|memory|external)");
}

void EncoderConfig::validate() const {
  if (num_layers < 1) throw std::invalid_argument("encoder: need at least one layer");
  if (insertion_layer < 0 || insertion_layer > num_layers) {
    throw std::invalid_argument("encoder: insertion layer " +
                                std::to_string(insertion_layer) +
                                " outside 0.." + std::to_string(num_layers));
  }
  if (hidden < 1 || feature_dim < 1) {
    throw std::invalid_argument("encoder: widths must be positive");
  }
  if (post_concat < 0) {
    throw std::invalid_argument("encoder: post_concat must be >= 0");
  }
}

EncoderParams EncoderParams::init(const EncoderConfig& config, int embed_dim,
                                  std::mt19937_64& rng) {
  config.validate();
  if (config.adaptation != Adaptation::kNone && embed_dim < 1) {
    throw std::invalid_argument("encoder: adaptation needs an embedding dim");
  }

  EncoderParams p;
  p.config = config;
  p.embed_dim = config.adaptation == Adaptation::kNone ? 0 : embed_dim;

  // Layer i consumes: features for layer 1; the post-concat width right
  // after the insertion point; the previous layer's hidden width otherwise.
  int width = config.feature_dim;
  for (int i = 0; i < config.num_layers; ++i) {
    if (config.adaptation != Adaptation::kNone && i == config.insertion_layer) {
      width = config.post_concat_width();
    }
    p.layers.push_back(EncoderLayerParams::init("enc.layer" + std::to_string(i),
                                                width, config.hidden, rng));
    width = config.hidden;
  }

  if (config.adaptation != Adaptation::kNone) {
    const int h_in = config.insert_width();
    if (config.adaptation == Adaptation::kMemory) {
      p.query_w = make_weight("enc.query_w", embed_dim, h_in, rng);
      p.query_b = make_bias("enc.query_b", embed_dim);
    }
    p.concat_w = make_weight("enc.concat_w", config.post_concat_width(),
                             h_in + embed_dim, rng);
    p.concat_b = make_bias("enc.concat_b", config.post_concat_width());
  }
  return p;
}

std::vector<Parameter*> EncoderParams::params() {
  std::vector<Parameter*> out;
  for (EncoderLayerParams& layer : layers) {
    for (Parameter* p : layer.params()) out.push_back(p);
  }
  if (config.adaptation == Adaptation::kMemory) {
    out.push_back(&query_w);
    out.push_back(&query_b);
  }
  if (config.adaptation != Adaptation::kNone) {
    out.push_back(&concat_w);
    out.push_back(&concat_b);
  }
  return out;
}

EncodeResult encode_on_tape(Tape& tape, EncoderParams& params, Var features,
                            const SpeakerMemory* memory,
                            const ReadHeadConfig& read_config,
                            const Tensor* external_embedding) {
  const EncoderConfig& config = params.config;
  config.validate();
  const Tensor& fv = tape.val(features);
  if (fv.ndim() != 2 || fv.cols() != config.feature_dim) {
    throw std::invalid_argument("encoder: features " + fv.shape_str() +
                                " do not match feature_dim " +
                                std::to_string(config.feature_dim));
  }
  switch (config.adaptation) {
    case Adaptation::kNone:
      if (memory != nullptr || external_embedding != nullptr) {
        throw std::invalid_argument("encoder: baseline takes no embedding source");
      }
      break;
    case Adaptation::kMemory:
      if (memory == nullptr || external_embedding != nullptr) {
        throw std::invalid_argument("encoder: memory variant needs a memory only");
      }
      if (memory->dim() != params.embed_dim) {
        throw std::invalid_argument("encoder: memory dim " +
                                    std::to_string(memory->dim()) +
                                    " != configured " +
                                    std::to_string(params.embed_dim));
      }
      break;
    case Adaptation::kExternal:
      if (external_embedding == nullptr || memory != nullptr) {
        throw std::invalid_argument("encoder: external variant needs an embedding only");
      }
      if (external_embedding->ndim() != 1 ||
          static_cast<int>(external_embedding->size()) != params.embed_dim) {
        throw std::invalid_argument("encoder: embedding " +
                                    external_embedding->shape_str() +
                                    " != configured dim " +
                                    std::to_string(params.embed_dim));
      }
      break;
  }

  EncodeResult result;
  Var x = features;
  const int t_len = fv.rows();

  for (int i = 0; i < config.insertion_layer; ++i) {
    x = encoder_layer(tape, params.layers[i], x);
  }

  if (config.adaptation != Adaptation::kNone) {
    Var qw, qb;
    if (config.adaptation == Adaptation::kMemory) {
      qw = tape.param(params.query_w);
      qb = tape.param(params.query_b);
      result.per_frame_weights = Tensor({t_len, memory->size()});
      result.has_weights = true;
    }
    Var cw = tape.param(params.concat_w);
    Var cb = tape.param(params.concat_b);
    Var fixed_r;
    if (config.adaptation == Adaptation::kExternal) {
      fixed_r = tape.leaf(*external_embedding);
    }
    std::vector<Var> rows_out;
    rows_out.reserve(t_len);
    for (int t = 0; t < t_len; ++t) {
      Var h_t = row(x, t);
      Var r_t;
      if (config.adaptation == Adaptation::kMemory) {
        Var q_t = affine(h_t, qw, qb);
        ReadVars rv = memory_read(tape, q_t, *memory, read_config);
        r_t = rv.read_vector;
        const Tensor& w = tape.val(rv.weights);
        for (int n = 0; n < memory->size(); ++n) {
          result.per_frame_weights.at(t, n) = w[n];
        }
      } else {
        r_t = fixed_r;
      }
      rows_out.push_back(affine(concat(h_t, r_t), cw, cb));
    }
    x = stack_rows(rows_out);
  }

  for (int i = config.insertion_layer; i < config.num_layers; ++i) {
    x = encoder_layer(tape, params.layers[i], x);
  }
  result.output = x;
  return result;
}

namespace {

EncodedSequence run_value_level(EncoderParams& params, const Tensor& features,
                                const SpeakerMemory* memory,
                                const ReadHeadConfig& read_config,
                                const Tensor* embedding) {
  Tape tape;
  EncodeResult r = encode_on_tape(tape, params, tape.leaf(features), memory,
                                  read_config, embedding);
  EncodedSequence out;
  out.hidden = tape.val(r.output);
  out.per_frame_weights = std::move(r.per_frame_weights);
  out.has_weights = r.has_weights;
  return out;
}

}  // namespace

EncodedSequence encode_adapted(const Tensor& features, const SpeakerMemory& memory,
                               const ReadHeadConfig& read_config,
                               EncoderParams& params) {
  return run_value_level(params, features, &memory, read_config, nullptr);
}

EncodedSequence encode_baseline(const Tensor& features, EncoderParams& params) {
  return run_value_level(params, features, nullptr, {}, nullptr);
}

EncodedSequence encode_external(const Tensor& features, const Tensor& embedding,
                                EncoderParams& params) {
  return run_value_level(params, features, nullptr, {}, &embedding);
}

}  // namespace memvoice
