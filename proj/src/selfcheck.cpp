// src/selfcheck.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/selfcheck.h"

#include <random>
#include <vector>

#include "memvoice/memory.h"

namespace memvoice {
namespace {

Tensor fill_uniform(Tensor t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

GradCheckReport joint_gradient_selfcheck(Similarity similarity,
                                         std::uint64_t model_seed,
                                         bool inject_fault) {
  ModelConfig config;
  config.encoder.num_layers = 2;
  config.encoder.insertion_layer = 1;
  config.encoder.hidden = 4;
  config.encoder.feature_dim = 3;
  config.encoder.adaptation = Adaptation::kMemory;
  config.read_head.similarity = similarity;
  config.vocab = 5;
  config.embed_dim = 3;
  config.dec_hidden = 4;
  config.dec_embed = 3;
  config.attn_dim = 4;
  config.loc_channels = 2;
  config.loc_width = 3;

  std::mt19937_64 rng(model_seed);
  AsrModel model = AsrModel::init(config, rng);
  std::mt19937_64 mrng(model_seed + 1);
  model.set_memory(SpeakerMemory(fill_uniform(Tensor({3, 2}), mrng), {"a", "b"}));

  std::mt19937_64 frng(120);
  const Tensor feats = fill_uniform(Tensor({2, 3}), frng);
  const std::vector<int> labels = {3};

  auto params = model.parameters();
  const auto loss_fn = [&](bool with_grad) {
    if (with_grad) {
      for (Parameter* p : params) p->reset_grad();
    }
    const double loss =
        forward_loss(model, feats, labels, nullptr, 0.3, with_grad).joint;
    if (with_grad && inject_fault) {
      for (double& g : params.front()->grad.values()) g = -g;
    }
    return loss;
  };

  return check_gradient(loss_fn, params, 1e-5);
}

}  // namespace memvoice
