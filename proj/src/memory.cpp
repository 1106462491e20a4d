// src/memory.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/memory.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "memvoice/util.h"

namespace memvoice {

namespace {

double norm(const Tensor& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

void check_query_dim(const Tensor& q, const SpeakerMemory& memory) {
  if (q.ndim() != 1 || static_cast<int>(q.size()) != memory.dim()) {
    throw std::invalid_argument("memory read: query " + q.shape_str() +
                                " does not match memory dim " +
                                std::to_string(memory.dim()));
  }
}

}  // namespace

SpeakerMemory::SpeakerMemory(Tensor m, std::vector<std::string> ids)
    : matrix(std::move(m)), speaker_ids(std::move(ids)) {
  if (matrix.ndim() != 2) {
    throw std::invalid_argument("speaker memory: matrix must be 2-d, got " +
                                matrix.shape_str());
  }
  const int n = static_cast<int>(matrix.cols());
  if (n < 1) throw std::invalid_argument("speaker memory: need at least one speaker");
  if (static_cast<int>(speaker_ids.size()) != n) {
    throw std::invalid_argument("speaker memory: " + std::to_string(n) +
                                " columns but " +
                                std::to_string(speaker_ids.size()) + " ids");
  }
  std::set<std::string> seen;
  for (const std::string& id : speaker_ids) {
    if (!seen.insert(id).second) {
      throw std::invalid_argument("speaker memory: duplicate speaker id '" + id + "'");
    }
  }
  for (int c = 0; c < n; ++c) {
    bool all_zero = true;
    for (int r = 0; r < static_cast<int>(matrix.rows()); ++r) {
      if (matrix.at(r, c) != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      throw std::invalid_argument("speaker memory: column for '" + speaker_ids[c] +
                                  "' is all-zero");
    }
  }
}

Tensor SpeakerMemory::column(int n) const {
  if (n < 0 || n >= size()) {
    throw std::out_of_range("speaker memory: column " + std::to_string(n) +
                            " out of range (N=" + std::to_string(size()) + ")");
  }
  Tensor out({dim()});
  for (int d = 0; d < dim(); ++d) out[d] = matrix.at(d, n);
  return out;
}

double cosine_similarity(const Tensor& q, const Tensor& m) {
  if (!q.same_shape(m) || q.ndim() != 1) {
    throw std::invalid_argument("cosine_similarity: shapes " + q.shape_str() +
                                " vs " + m.shape_str());
  }
  const double nq = norm(q), nm = norm(m);
  if (nq == 0.0 || nm == 0.0) {
    throw std::domain_error("cosine_similarity: zero-norm vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) dot += q[i] * m[i];
  return dot / (nq * nm);
}

double scaled_dot(const Tensor& q, const Tensor& m) {
  if (!q.same_shape(m) || q.ndim() != 1 || q.size() < 1) {
    throw std::invalid_argument("scaled_dot: shapes " + q.shape_str() + " vs " +
                                m.shape_str());
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) dot += q[i] * m[i];
  return dot / std::sqrt(static_cast<double>(q.size()));
}

Tensor read_weights(const Tensor& q, const SpeakerMemory& memory,
                    const ReadHeadConfig& config) {
  check_query_dim(q, memory);
  const int n = memory.size();
  Tensor scores({n});
  for (int c = 0; c < n; ++c) {
    const Tensor col = memory.column(c);
    const double s = config.similarity == Similarity::kCosine
                         ? cosine_similarity(q, col)
                         : scaled_dot(q, col);
    scores[c] = config.gamma * s;
  }
  double mx = scores[0];
  for (int c = 1; c < n; ++c) mx = std::max(mx, scores[c]);
  Tensor w({n});
  double z = 0.0;
  for (int c = 0; c < n; ++c) {
    w[c] = std::exp(scores[c] - mx);
    z += w[c];
  }
  for (int c = 0; c < n; ++c) w[c] /= z;
  return w;
}

Tensor read_vector(const Tensor& weights, const SpeakerMemory& memory) {
  if (weights.ndim() != 1 ||
      static_cast<int>(weights.size()) != memory.size()) {
    throw std::invalid_argument("read_vector: weights " + weights.shape_str() +
                                " vs N=" + std::to_string(memory.size()));
  }
  Tensor r({memory.dim()});
  for (int d = 0; d < memory.dim(); ++d) {
    double acc = 0.0;
    for (int c = 0; c < memory.size(); ++c) acc += weights[c] * memory.matrix.at(d, c);
    r[d] = acc;
  }
  return r;
}

namespace {

// Similarity scores against every column, differentiable in the query.
Var similarity_scores(Tape& tape, Var query, const SpeakerMemory& memory,
                      const ReadHeadConfig& config) {
  const Tensor& qv = tape.val(query);
  check_query_dim(qv, memory);
  const Tensor m = memory.matrix;  // own a copy: tape nodes may outlive callers
  const int n = memory.size();
  const std::size_t d = static_cast<std::size_t>(m.rows());

  if (config.similarity == Similarity::kScaledDot) {
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor out({n});
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += qv[i] * m.at(i, c);
      out[c] = acc * inv_scale;
    }
    return tape.make(out, [m, query, inv_scale, n, d](Tape& t, int id) {
      const Tensor& g = t.grad_ref(Var{&t, id});
      Tensor& gq = t.grad_ref(query);
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += g[c] * m.at(i, c);
        gq[i] += acc * inv_scale;
      }
    });
  }

  const double nq = norm(qv);
  if (nq == 0.0) throw std::domain_error("memory read: zero-norm query under cosine");
  std::vector<double> col_norm(n), qdot(n);
  Tensor out({n});
  for (int c = 0; c < n; ++c) {
    double nm = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      nm += m.at(i, c) * m.at(i, c);
      dot += qv[i] * m.at(i, c);
    }
    col_norm[c] = std::sqrt(nm);
    qdot[c] = dot;
    out[c] = dot / (nq * col_norm[c]);
  }
  // d s_c / d q = m_c/(|q||m_c|) - (q.m_c) q / (|q|^3 |m_c|)
  Tensor q_copy = qv;
  return tape.make(out, [m, query, q_copy, col_norm, qdot, nq, n, d](Tape& t, int id) {
    const Tensor& g = t.grad_ref(Var{&t, id});
    Tensor& gq = t.grad_ref(query);
    const double nq3 = nq * nq * nq;
    for (int c = 0; c < n; ++c) {
      const double a = g[c] / (nq * col_norm[c]);
      const double b = g[c] * qdot[c] / (nq3 * col_norm[c]);
      for (std::size_t i = 0; i < d; ++i) gq[i] += a * m.at(i, c) - b * q_copy[i];
    }
  });
}

}  // namespace

ReadVars memory_read(Tape& tape, Var query, const SpeakerMemory& memory,
                     const ReadHeadConfig& config) {
  if (!std::isfinite(config.gamma) || config.gamma < 0.0) {
    throw std::invalid_argument("memory read: gamma must be finite and >= 0");
  }
  Var scores = similarity_scores(tape, query, memory, config);
  Var weights = softmax(scale(scores, config.gamma));
  Var r = const_matvec(memory.matrix, weights);
  return {weights, r};
}

void save_memory(const SpeakerMemory& memory, const std::filesystem::path& path) {
  std::ostringstream out;
  out << memory.dim() << " " << memory.size() << "\n";
  for (int c = 0; c < memory.size(); ++c) {
    out << memory.speaker_ids[c];
    for (int r = 0; r < memory.dim(); ++r) {
      out << " " << format_double(memory.matrix.at(r, c));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

SpeakerMemory load_memory(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path.string() + ":1: empty memory file");
  }
  std::istringstream header(line);
  int dim = 0, n = 0;
  if (!(header >> dim >> n) || dim < 1 || n < 1) {
    throw std::runtime_error(path.string() + ":1: bad header, want 'D N'");
  }
  Tensor m({dim, n});
  std::vector<std::string> ids(n);
  for (int c = 0; c < n; ++c) {
    const int line_no = c + 2;
    if (!std::getline(in, line)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": missing speaker line");
    }
    std::istringstream row(line);
    if (!(row >> ids[c])) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": missing speaker id");
    }
    for (int r = 0; r < dim; ++r) {
      double v = 0.0;
      if (!(row >> v)) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": field " + std::to_string(r + 2) +
                                 ": missing or bad value");
      }
      m.at(r, c) = v;
    }
    double extra;
    if (row >> extra) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": trailing values beyond D=" + std::to_string(dim));
    }
  }
  return SpeakerMemory(std::move(m), std::move(ids));
}

}  // namespace memvoice
