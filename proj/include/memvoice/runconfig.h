// memvoice/runconfig.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator-facing run configuration: one JSON document covering corpus
// generation, model shape, training, sweeps, and file locations. Command
// line flags override file values; everything re-validates before use.

#ifndef MEMVOICE_RUNCONFIG_H_
#define MEMVOICE_RUNCONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memvoice/corpus.h"
#include "memvoice/model.h"
#include "memvoice/trainer.h"

namespace memvoice {

struct RunPaths {
  std::string corpus_dir = "corpus";
  std::string memory_file;  // empty = <corpus_dir>/memory.json
  std::string checkpoint_dir = "runs";
  std::string metrics_dir = "metrics";
};

struct SweepSettings {
  std::vector<int> layers = {0, 1, 2, 3};
  std::vector<std::string> variants = {"memory", "external-speaker"};
};

// A variant names both the adaptation wiring and, for external models,
// where the frozen embedding comes from.
inline constexpr const char* kVariantNames[] = {
    "none", "memory", "external-speaker", "external-utterance"};

bool is_known_variant(const std::string& variant);
Adaptation variant_adaptation(const std::string& variant);

// Embedding provider the variant trains and evaluates with; empty for
// none/memory. Snapshots what it needs, so the corpus may be destroyed.
EmbeddingProvider variant_provider(const std::string& variant,
                                   const Corpus& corpus);

struct RunConfig {
  std::uint64_t seed = 7;  // corpus generation seed
  CorpusConfig corpus;

  // Model shape. Feature width, embedding width, and vocabulary follow the
  // corpus section, so those can never disagree with the data or memory.
  std::string variant = "memory";
  int num_layers = 3;
  int insertion_layer = 1;
  int hidden = 32;
  std::string similarity = "scaled-dot";  // scaled-dot / cosine
  double gamma = 1.0;
  int dec_hidden = 32;
  int dec_embed = 8;
  int attn_dim = 16;
  int loc_channels = 4;
  int loc_width = 3;

  TrainerConfig trainer;
  SweepSettings sweep;
  RunPaths paths;

  // Re-checks every cross-field constraint (insertion layer within the
  // stack, lambda in [0,1], positive dims, known variant names).
  void validate() const;

  // Model shape for this config's variant and insertion layer.
  ModelConfig model_config() const;

  std::filesystem::path memory_path() const;
};

// JSON with one object per section: seed, corpus, model, trainer, sweep,
// paths. Missing fields keep their defaults; unknown keys are rejected.
RunConfig runconfig_from_json(const std::string& text);
std::string runconfig_to_json(const RunConfig& config);
RunConfig load_runconfig(const std::filesystem::path& path);

}  // namespace memvoice

#endif  // MEMVOICE_RUNCONFIG_H_
