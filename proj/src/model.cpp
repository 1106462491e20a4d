// src/model.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/model.h"

#include <stdexcept>

#include "json.hpp"
#include "memvoice/ctc.h"

namespace memvoice {

using nlohmann::json;

void ModelConfig::validate() const {
  encoder.validate();
  if (vocab < 4) {
    throw std::invalid_argument("model: vocab must cover blank/eos/unk plus symbols");
  }
  if (embed_dim < 1 && encoder.adaptation != Adaptation::kNone) {
    throw std::invalid_argument("model: adaptation needs embed_dim >= 1");
  }
  decoder_config().validate();
}

int ModelConfig::encoder_out_width() const {
  if (encoder.adaptation != Adaptation::kNone &&
      encoder.insertion_layer == encoder.num_layers) {
    return encoder.post_concat_width();
  }
  return encoder.hidden;
}

DecoderConfig ModelConfig::decoder_config() const {
  DecoderConfig d;
  d.vocab = vocab;
  d.enc_dim = encoder_out_width();
  d.hidden = dec_hidden;
  d.embed_dim = dec_embed;
  d.attn_dim = attn_dim;
  d.loc_channels = loc_channels;
  d.loc_width = loc_width;
  return d;
}

AsrModel AsrModel::init(const ModelConfig& config, std::mt19937_64& rng) {
  config.validate();
  AsrModel m;
  m.config = config;
  m.encoder = EncoderParams::init(config.encoder, config.embed_dim, rng);
  m.ctc_w = make_weight("ctc.w", config.vocab, config.encoder_out_width(), rng);
  m.ctc_b = make_bias("ctc.b", config.vocab);
  m.decoder = DecoderParams::init(config.decoder_config(), rng);
  return m;
}

std::vector<Parameter*> AsrModel::parameters() {
  std::vector<Parameter*> out = encoder.params();
  out.push_back(&ctc_w);
  out.push_back(&ctc_b);
  for (Parameter* p : decoder.params()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> AsrModel::parameters() const {
  auto mutable_params = const_cast<AsrModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void AsrModel::set_memory(SpeakerMemory m) {
  if (m.dim() != config.embed_dim) {
    throw std::invalid_argument("model: memory dim " + std::to_string(m.dim()) +
                                " != configured embed_dim " +
                                std::to_string(config.embed_dim));
  }
  memory = std::move(m);
}

namespace {

void check_variant_inputs(const AsrModel& model, const Tensor* external) {
  const Adaptation a = model.config.encoder.adaptation;
  if (a == Adaptation::kMemory && model.memory.size() == 0) {
    throw std::invalid_argument("model: memory variant without a speaker memory");
  }
  if (a == Adaptation::kExternal && external == nullptr) {
    throw std::invalid_argument("model: external variant needs an embedding");
  }
  if (a != Adaptation::kExternal && external != nullptr) {
    throw std::invalid_argument("model: embedding given to a non-external variant");
  }
}

}  // namespace

ForwardLoss forward_loss(AsrModel& model, const Tensor& features,
                         const std::vector<int>& labels,
                         const Tensor* external_embedding, double lambda,
                         bool with_grad) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("model: lambda outside [0,1]");
  }
  check_variant_inputs(model, external_embedding);
  const Adaptation a = model.config.encoder.adaptation;

  Tape tape;
  EncodeResult enc = encode_on_tape(
      tape, model.encoder, tape.leaf(features),
      a == Adaptation::kMemory ? &model.memory : nullptr, model.config.read_head,
      external_embedding);

  Var ctc_logits = affine(enc.output, tape.param(model.ctc_w),
                          tape.param(model.ctc_b));
  Var ctc_l = ctc_loss_op(tape, ctc_logits, labels);

  DecoderVars dv = DecoderVars::bind(tape, model.decoder);
  std::vector<int> targets = labels;
  targets.push_back(kEos);
  Var att_l = attention_loss_op(tape, dv, enc.output, targets);

  Var joint = add(scale(ctc_l, lambda), scale(att_l, 1.0 - lambda));

  ForwardLoss out;
  out.joint = tape.val(joint)[0];
  out.ctc = tape.val(ctc_l)[0];
  out.att = tape.val(att_l)[0];
  if (with_grad) tape.backward(joint);
  return out;
}

Hypothesis transcribe(AsrModel& model, const Tensor& features,
                      const Tensor* external_embedding, int beam, int max_len) {
  check_variant_inputs(model, external_embedding);
  EncodedSequence enc;
  switch (model.config.encoder.adaptation) {
    case Adaptation::kNone:
      enc = encode_baseline(features, model.encoder);
      break;
    case Adaptation::kMemory:
      enc = encode_adapted(features, model.memory, model.config.read_head,
                           model.encoder);
      break;
    case Adaptation::kExternal:
      enc = encode_external(features, *external_embedding, model.encoder);
      break;
  }
  if (beam <= 1) return greedy_decode(model.decoder, enc.hidden, max_len);
  return beam_decode(model.decoder, enc.hidden, beam, max_len);
}

namespace {

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape();
  j["values"] = t.values();
  return j;
}

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<std::vector<int>>(),
                j.at("values").get<std::vector<double>>());
}

json config_to_json(const ModelConfig& c) {
  json j;
  j["encoder"] = {{"num_layers", c.encoder.num_layers},
                  {"insertion_layer", c.encoder.insertion_layer},
                  {"hidden", c.encoder.hidden},
                  {"feature_dim", c.encoder.feature_dim},
                  {"post_concat", c.encoder.post_concat},
                  {"adaptation", adaptation_name(c.encoder.adaptation)}};
  j["read_head"] = {
      {"similarity",
       c.read_head.similarity == Similarity::kCosine ? "cosine" : "scaled-dot"},
      {"gamma", c.read_head.gamma}};
  j["vocab"] = c.vocab;
  j["embed_dim"] = c.embed_dim;
  j["dec_hidden"] = c.dec_hidden;
  j["dec_embed"] = c.dec_embed;
  j["attn_dim"] = c.attn_dim;
  j["loc_channels"] = c.loc_channels;
  j["loc_width"] = c.loc_width;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  const json& e = j.at("encoder");
  c.encoder.num_layers = e.at("num_layers").get<int>();
  c.encoder.insertion_layer = e.at("insertion_layer").get<int>();
  c.encoder.hidden = e.at("hidden").get<int>();
  c.encoder.feature_dim = e.at("feature_dim").get<int>();
  c.encoder.post_concat = e.at("post_concat").get<int>();
  c.encoder.adaptation = adaptation_from_name(e.at("adaptation").get<std::string>());
  const json& r = j.at("read_head");
  const std::string sim = r.at("similarity").get<std::string>();
  if (sim == "cosine") {
    c.read_head.similarity = Similarity::kCosine;
  } else if (sim == "scaled-dot") {
    c.read_head.similarity = Similarity::kScaledDot;
  } else {
    throw std::invalid_argument("model: unknown similarity '" + sim + "'");
  }
  c.read_head.gamma = r.at("gamma").get<double>();
  c.vocab = j.at("vocab").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.dec_hidden = j.at("dec_hidden").get<int>();
  c.dec_embed = j.at("dec_embed").get<int>();
  c.attn_dim = j.at("attn_dim").get<int>();
  c.loc_width = j.at("loc_width").get<int>();
  c.loc_channels = j.at("loc_channels").get<int>();
  return c;
}

}  // namespace

std::string model_to_json(const AsrModel& model) {
  json j;
  j["version"] = 1;
  j["config"] = config_to_json(model.config);
  json params = json::object();
  for (const Parameter* p : model.parameters()) {
    params[p->name] = tensor_to_json(p->value);
  }
  j["params"] = params;
  if (model.memory.size() > 0) {
    j["memory"] = {{"ids", model.memory.speaker_ids},
                   {"matrix", tensor_to_json(model.memory.matrix)}};
  } else {
    j["memory"] = nullptr;
  }
  return j.dump();
}

AsrModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("model: unsupported checkpoint version");
  }
  std::mt19937_64 rng(0);
  AsrModel model = AsrModel::init(config_from_json(j.at("config")), rng);
  const json& params = j.at("params");
  for (Parameter* p : model.parameters()) {
    if (!params.contains(p->name)) {
      throw std::runtime_error("model: checkpoint missing parameter '" + p->name +
                               "'");
    }
    Tensor stored = tensor_from_json(params.at(p->name));
    if (!stored.same_shape(p->value)) {
      throw std::runtime_error("model: checkpoint shape mismatch for '" + p->name +
                               "': " + stored.shape_str() + " vs " +
                               p->value.shape_str());
    }
    p->value = std::move(stored);
  }
  if (!j.at("memory").is_null()) {
    const json& m = j.at("memory");
    model.set_memory(SpeakerMemory(
        tensor_from_json(m.at("matrix")),
        m.at("ids").get<std::vector<std::string>>()));
  }
  return model;
}

}  // namespace memvoice
