// memvoice/trainer.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Joint CTC-attention training: weighted objective, mini-batch SGD with
// global-norm gradient clipping, seeded determinism, multi-seed selection
// on dev error, and bitwise checkpointing.

#ifndef MEMVOICE_TRAINER_H_
#define MEMVOICE_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "memvoice/corpus.h"
#include "memvoice/model.h"

namespace memvoice {

struct TrainerConfig {
  double lambda = 0.2;       // weight on the CTC branch
  double learning_rate = 0.05;
  int epochs = 10;
  int batch_size = 4;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  double grad_clip = 5.0;    // global gradient norm cap
  int eval_beam = 1;         // dev metric decodes greedily by default
  int max_decode_len = 24;

  void validate() const;
};

// lambda * ctc + (1 - lambda) * att. Throws when lambda is outside [0,1].
double joint_loss(double ctc_loss, double att_loss, double lambda);

struct EpochStats {
  double train_loss = 0.0;  // mean joint loss per training utterance
  double dev_ter = 0.0;     // token error rate on the dev split
};

// Supplies the frozen embedding fed to an external-variant model. Must be
// empty for the other variants.
using EmbeddingProvider = std::function<Tensor(const Utterance&)>;

struct TrainResult {
  AsrModel model;
  std::vector<EpochStats> history;  // one entry per epoch
  std::uint64_t seed = 0;
  std::string rng_state;  // batch-order RNG stream after the last epoch
};

// Mini-batch SGD on the corpus train split. Batches are fixed-size groups of
// utterances sorted by length; their order is reshuffled each epoch from
// `seed`, so two runs with the same inputs match bitwise. A non-finite loss
// aborts with the offending batch in the message.
TrainResult train(AsrModel model, const Corpus& corpus,
                  const TrainerConfig& config, std::uint64_t seed,
                  const EmbeddingProvider& embedding = {});

// Builds the fresh model a given training seed starts from. Must be pure:
// selection may invoke it from worker threads.
using ModelFactory = std::function<AsrModel(std::uint64_t seed)>;

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<EpochStats> history;

  double final_dev_ter() const { return history.back().dev_ter; }
};

struct SelectionResult {
  AsrModel model;  // run with the lowest final dev error; ties -> lowest seed
  std::uint64_t seed = 0;
  std::string rng_state;         // the winning run's batch-order RNG stream
  std::vector<RunSummary> runs;  // in config.seeds order
};

// One training run per configured seed, up to MEMVOICE_THREADS at a time.
// Any run failure is rethrown; there is no silent skipping.
SelectionResult multi_seed_select(const ModelFactory& factory,
                                  const Corpus& corpus,
                                  const TrainerConfig& config,
                                  const EmbeddingProvider& embedding = {});

// Embedding providers for the two external conditions. Both snapshot what
// they need from the corpus, so the corpus may be destroyed afterwards.
EmbeddingProvider speaker_embedding_provider(const Corpus& corpus);
EmbeddingProvider utterance_embedding_provider(const Corpus& corpus);

struct Checkpoint {
  AsrModel model;
  TrainerConfig trainer;
  int epoch = 0;          // completed epochs
  std::string rng_state;
  std::vector<EpochStats> history;
};

// JSON on disk; save(load(save(x))) is byte-identical and the reloaded
// model reproduces forward losses bitwise.
void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace memvoice

#endif  // MEMVOICE_TRAINER_H_
