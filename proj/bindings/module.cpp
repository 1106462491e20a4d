// bindings/module.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "memvoice/corpus.h"
#include "memvoice/eval.h"
#include "memvoice/runconfig.h"
#include "memvoice/selfcheck.h"

namespace py = pybind11;

namespace {

using memvoice::Similarity;

Similarity similarity_from_name(const std::string& name) {
  if (name == "scaled-dot") return Similarity::kScaledDot;
  if (name == "cosine") return Similarity::kCosine;
  throw std::invalid_argument("similarity must be scaled-dot or cosine, got " +
                              name);
}

// Summarizes a generated corpus without materializing it on disk: split
// sizes, speaker ids, and a per-speaker utterance count.
std::string corpus_summary_json(const std::string& config_json,
                                std::uint64_t seed) {
  const memvoice::RunConfig cfg = memvoice::runconfig_from_json(config_json);
  cfg.validate();
  const memvoice::Corpus corpus = memvoice::generate_corpus(cfg.corpus, seed);

  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["feature_dim"] = cfg.corpus.feature_dim;
  j["embed_dim"] = cfg.corpus.embed_dim;
  j["total_vocab"] = cfg.corpus.total_vocab();
  j["train_speakers"] = corpus.train_speakers;
  j["dev_speakers"] = corpus.dev_speakers;
  j["test_speakers"] = corpus.test_speakers;
  for (const std::string split : {"train", "dev", "test"}) {
    j["utterances"][split] = corpus.split(split).size();
  }
  const memvoice::SpeakerMemory memory = memvoice::build_memory(corpus);
  j["memory_speakers"] = memory.speaker_ids;
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "memvoice core bindings";
  m.attr("__version__") = "0.1.0";

  m.def("default_config", [] { return memvoice::runconfig_to_json({}); },
        "JSON text of the default run configuration.");

  m.def(
      "validate_config",
      [](const std::string& text) {
        memvoice::runconfig_from_json(text).validate();
      },
      py::arg("text"),
      "Parses and cross-validates a JSON run configuration; raises "
      "ValueError on any problem.");

  m.def("corpus_summary", &corpus_summary_json, py::arg("config"),
        py::arg("seed"),
        "Generates the synthetic corpus for (config, seed) in memory and "
        "returns a JSON summary of splits, speakers, and memory columns.");

  m.def(
      "edit_distance",
      [](const std::vector<int>& ref, const std::vector<int>& hyp) {
        const memvoice::EditStats s = memvoice::edit_distance(ref, hyp);
        py::dict out;
        out["substitutions"] = s.substitutions;
        out["deletions"] = s.deletions;
        out["insertions"] = s.insertions;
        return out;
      },
      py::arg("ref"), py::arg("hyp"),
      "Minimum-edit alignment counts between two label sequences.");

  m.def("labels_from_string", &memvoice::labels_from_string, py::arg("text"),
        "Maps lowercase a-z text to label ids.");

  m.def(
      "gradient_check",
      [](const std::string& similarity, std::uint64_t seed) {
        return memvoice::joint_gradient_selfcheck(similarity_from_name(similarity),
                                                  seed)
            .max_rel_error;
      },
      py::arg("similarity") = "scaled-dot", py::arg("seed") = 20,
      "Max relative error of analytic joint-loss gradients against central "
      "differences on a fixed tiny model.");
}
