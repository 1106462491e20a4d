// memvoice/corpus.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic speaker-conditioned corpus: per-symbol prototype features under
// per-speaker affine transforms, feature-statistic speaker embeddings, the
// frozen memory built from training speakers, and the speaker-change
// concatenation protocol.

#ifndef MEMVOICE_CORPUS_H_
#define MEMVOICE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memvoice/memory.h"
#include "memvoice/tensor.h"

namespace memvoice {

// Real symbols occupy vocabulary indices 3.. (after blank, eos, unk) and
// print as letters starting at 'a'.
inline constexpr int kFirstSymbol = 3;

std::string labels_to_string(const std::vector<int>& labels);
std::vector<int> labels_from_string(const std::string& text);

struct CorpusConfig {
  int num_speakers = 8;
  int utts_per_speaker = 40;
  int vocab_size = 6;  // real symbols; full vocabulary adds blank/eos/unk
  int frames_per_label = 3;
  double noise_std = 0.1;
  int feature_dim = 8;
  int embed_dim = 8;
  int min_labels = 2;
  int max_labels = 5;
  double bias_range = 1.0;  // speaker bias entries drawn from +-bias_range

  void validate() const;
  int total_vocab() const { return vocab_size + kFirstSymbol; }
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string split;        // train / dev / test / test_spkchange
  Tensor features;          // T x F
  std::vector<int> labels;  // real symbols, >= kFirstSymbol
};

// Per-speaker affine feature transform; scale entries stay in [0.5, 2.0].
struct SyntheticSpeaker {
  std::string id;
  Tensor scale;  // F
  Tensor bias;   // F
};

struct Corpus {
  CorpusConfig config;
  std::uint64_t seed = 0;
  std::uint64_t embedding_map_seed = 0;
  std::vector<Utterance> utterances;
  std::vector<std::string> train_speakers, dev_speakers, test_speakers;

  // Generation metadata: symbol prototypes (vocab_size x F) and speaker
  // transforms. Not persisted; empty on a loaded corpus.
  Tensor prototypes;
  std::vector<SyntheticSpeaker> speakers;

  std::vector<const Utterance*> split(const std::string& name) const;
};

// Deterministic in (config, seed); speakers across splits are disjoint.
Corpus generate_corpus(const CorpusConfig& config, std::uint64_t seed);

// [per-dim mean ; per-dim std] of the features, length 2F.
Tensor utterance_feature_stats(const Utterance& utt);

// Feature statistics sent through a fixed random linear map (seeded
// corpus-wide) down to embed_dim.
Tensor utterance_embedding(const Corpus& corpus, const Utterance& utt);

// Mean of the speaker's utterance embeddings across the whole corpus.
Tensor extract_speaker_embedding(const Corpus& corpus,
                                 const std::string& speaker_id);

// One column per training speaker, ordered by sorted speaker id.
SpeakerMemory build_memory(const Corpus& corpus);

// Random perfect pairing of cross-speaker utterances; features and labels
// concatenated. An odd leftover is dropped and counted in *dropped.
std::vector<Utterance> concat_speaker_change(
    const std::vector<const Utterance*>& testset, std::uint64_t seed,
    int* dropped);

// Control protocol: every utterance concatenated with itself.
std::vector<Utterance> concat_self_pairs(
    const std::vector<const Utterance*>& testset);

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace memvoice

#endif  // MEMVOICE_CORPUS_H_
