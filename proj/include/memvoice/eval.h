// memvoice/eval.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Token error rates and the three experiment protocols: insertion-layer
// sweep, embedding-variant comparison, and speaker-change robustness.

#ifndef MEMVOICE_EVAL_H_
#define MEMVOICE_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "memvoice/corpus.h"
#include "memvoice/model.h"
#include "memvoice/trainer.h"

namespace memvoice {

struct EditStats {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;

  int total() const { return substitutions + deletions + insertions; }
};

// Minimal-cost alignment of hyp against ref by dynamic programming; ties
// prefer substitutions, then deletions, then insertions.
EditStats edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp);

struct SplitMetrics {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_len = 0;
  int utterances = 0;

  double ter() const {
    return ref_len > 0
               ? static_cast<double>(substitutions + deletions + insertions) /
                     ref_len
               : 0.0;
  }
};

std::vector<const Utterance*> as_pointers(const std::vector<Utterance>& utts);

// Decodes every utterance and accumulates token-level error counts.
// `embedding` is required exactly for the external variant.
SplitMetrics evaluate_model(AsrModel& model,
                            const std::vector<const Utterance*>& utts,
                            const EmbeddingProvider& embedding, int beam,
                            int max_len);

// One table cell: a (experiment, variant, layer, seed, split) result.
// variant is one of none / memory / external-speaker / external-utterance;
// layer is the insertion layer, -1 for the unadapted baseline.
struct MetricsRecord {
  std::string experiment;
  std::string variant;
  int layer = 0;
  std::uint64_t seed = 0;
  std::string split;
  double ter = 0.0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_len = 0;

  bool operator==(const MetricsRecord&) const = default;
};

MetricsRecord make_record(const std::string& experiment,
                          const std::string& variant, int layer,
                          std::uint64_t seed, const std::string& split,
                          const SplitMetrics& metrics);

struct SweepRequest {
  ModelConfig base;      // adaptation and insertion layer overwritten per cell
  TrainerConfig trainer;
  std::vector<int> layers;            // subset of 0..num_layers
  std::vector<std::string> variants;  // memory / external-speaker / external-utterance
};

// Called with all records so far after each finished cell, so callers can
// flush partial results before a later cell fails.
using SweepProgress = std::function<void(const std::vector<MetricsRecord>&)>;

// Trains multi_seed_select per (layer, variant) cell plus one unadapted
// baseline and reports dev and test error for each selected model.
// Deterministic given the trainer seeds.
std::vector<MetricsRecord> layer_sweep(const Corpus& corpus,
                                       const SweepRequest& request,
                                       const SweepProgress& on_group = {});

struct SpeakerChangeRequest {
  int eval_beam = 1;
  int max_decode_len = 48;  // concatenated utterances are twice as long
  std::uint64_t pair_seed = 0;
  bool include_controls = true;  // also score self-paired utterances
  // Recorded into the result rows; the training seeds the models came from.
  std::uint64_t memory_seed = 0;
  std::uint64_t external_seed = 0;
};

// Scores a frame-level (memory) and a fixed-embedding (external) model on
// the plain test split and on cross-speaker concatenations; the external
// embedding is recomputed from each concatenated utterance. With controls,
// also scores self-paired utterances (split "test_selfpair").
std::vector<MetricsRecord> speaker_change_eval(
    AsrModel& memory_model, AsrModel& external_model, const Corpus& corpus,
    const SpeakerChangeRequest& request);

enum class MetricsFormat { kCsv, kJsonl };

// Stable order for export: experiment, variant, layer, seed, split.
void sort_metrics(std::vector<MetricsRecord>& records);

// Lossless round trip; records are sorted on export. CSV columns:
// experiment,variant,layer,seed,split,ter,S,D,I,ref_len.
void export_metrics(const std::vector<MetricsRecord>& records,
                    const std::filesystem::path& path, MetricsFormat format);
std::vector<MetricsRecord> import_metrics(const std::filesystem::path& path,
                                          MetricsFormat format);

}  // namespace memvoice

#endif  // MEMVOICE_EVAL_H_
