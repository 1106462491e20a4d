// memvoice/memory.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Frozen speaker-embedding memory and its differentiable read head.

#ifndef MEMVOICE_MEMORY_H_
#define MEMVOICE_MEMORY_H_

#include <filesystem>
#include <string>
#include <vector>

#include "memvoice/autodiff.h"
#include "memvoice/tensor.h"

namespace memvoice {

enum class Similarity {
  kCosine,
  kScaledDot,
};

struct ReadHeadConfig {
  Similarity similarity = Similarity::kScaledDot;
  double gamma = 1.0;
};

// D x N matrix; column n is the embedding of training speaker n.
// Immutable after construction and safe to share across threads.
struct SpeakerMemory {
  Tensor matrix;
  std::vector<std::string> speaker_ids;

  SpeakerMemory() : matrix({0, 0}) {}
  SpeakerMemory(Tensor m, std::vector<std::string> ids);

  int dim() const { return static_cast<int>(matrix.rows()); }
  int size() const { return static_cast<int>(matrix.cols()); }
  Tensor column(int n) const;
};

double cosine_similarity(const Tensor& q, const Tensor& m);
double scaled_dot(const Tensor& q, const Tensor& m);

// Plain (value-level) read path.
Tensor read_weights(const Tensor& q, const SpeakerMemory& memory,
                    const ReadHeadConfig& config);
Tensor read_vector(const Tensor& weights, const SpeakerMemory& memory);

struct ReadVars {
  Var weights;      // N-vector, nonnegative, sums to 1
  Var read_vector;  // D-vector inside the convex hull of the columns
};

// Differentiable read: gradients flow into the query only; the memory
// stays frozen. Throws on degenerate queries (zero norm under cosine).
ReadVars memory_read(Tape& tape, Var query, const SpeakerMemory& memory,
                     const ReadHeadConfig& config);

void save_memory(const SpeakerMemory& memory, const std::filesystem::path& path);
SpeakerMemory load_memory(const std::filesystem::path& path);

}  // namespace memvoice

#endif  // MEMVOICE_MEMORY_H_
