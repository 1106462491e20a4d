// src/runconfig.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/runconfig.h"

#include <initializer_list>
#include <stdexcept>

#include "json.hpp"
#include "memvoice/util.h"

namespace memvoice {

using nlohmann::json;

bool is_known_variant(const std::string& variant) {
  for (const char* name : kVariantNames) {
    if (variant == name) return true;
  }
  return false;
}

Adaptation variant_adaptation(const std::string& variant) {
  if (variant == "none") return Adaptation::kNone;
  if (variant == "memory") return Adaptation::kMemory;
  if (variant == "external-speaker" || variant == "external-utterance") {
    return Adaptation::kExternal;
  }
  throw std::invalid_argument(
      "unknown variant '" + variant +
      "' (want none|memory|external-speaker|external-utterance)");
}

EmbeddingProvider variant_provider(const std::string& variant,
                                   const Corpus& corpus) {
  if (variant_adaptation(variant) != Adaptation::kExternal) return {};
  return variant == "external-speaker" ? speaker_embedding_provider(corpus)
                                       : utterance_embedding_provider(corpus);
}

namespace {

Similarity similarity_from_name(const std::string& name) {
  if (name == "cosine") return Similarity::kCosine;
  if (name == "scaled-dot") return Similarity::kScaledDot;
  throw std::invalid_argument("config: unknown similarity '" + name +
                              "' (want scaled-dot|cosine)");
}

// Reject typos early; a silently ignored key would run the wrong setup.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw std::invalid_argument("config: " + where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key " + where + "." +
                                  item.key());
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T* out) {
  if (obj.contains(key)) *out = obj.at(key).get<T>();
}

void parse_corpus(const json& obj, CorpusConfig* c) {
  check_keys(obj, "corpus",
             {"num_speakers", "utts_per_speaker", "vocab_size",
              "frames_per_label", "noise_std", "feature_dim", "embed_dim",
              "min_labels", "max_labels", "bias_range"});
  read_field(obj, "num_speakers", &c->num_speakers);
  read_field(obj, "utts_per_speaker", &c->utts_per_speaker);
  read_field(obj, "vocab_size", &c->vocab_size);
  read_field(obj, "frames_per_label", &c->frames_per_label);
  read_field(obj, "noise_std", &c->noise_std);
  read_field(obj, "feature_dim", &c->feature_dim);
  read_field(obj, "embed_dim", &c->embed_dim);
  read_field(obj, "min_labels", &c->min_labels);
  read_field(obj, "max_labels", &c->max_labels);
  read_field(obj, "bias_range", &c->bias_range);
}

void parse_model(const json& obj, RunConfig* c) {
  check_keys(obj, "model",
             {"variant", "num_layers", "insertion_layer", "hidden",
              "similarity", "gamma", "dec_hidden", "dec_embed", "attn_dim",
              "loc_channels", "loc_width"});
  read_field(obj, "variant", &c->variant);
  read_field(obj, "num_layers", &c->num_layers);
  read_field(obj, "insertion_layer", &c->insertion_layer);
  read_field(obj, "hidden", &c->hidden);
  read_field(obj, "similarity", &c->similarity);
  read_field(obj, "gamma", &c->gamma);
  read_field(obj, "dec_hidden", &c->dec_hidden);
  read_field(obj, "dec_embed", &c->dec_embed);
  read_field(obj, "attn_dim", &c->attn_dim);
  read_field(obj, "loc_channels", &c->loc_channels);
  read_field(obj, "loc_width", &c->loc_width);
}

void parse_trainer(const json& obj, TrainerConfig* c) {
  check_keys(obj, "trainer",
             {"lambda", "learning_rate", "epochs", "batch_size", "seeds",
              "grad_clip", "eval_beam", "max_decode_len"});
  read_field(obj, "lambda", &c->lambda);
  read_field(obj, "learning_rate", &c->learning_rate);
  read_field(obj, "epochs", &c->epochs);
  read_field(obj, "batch_size", &c->batch_size);
  read_field(obj, "seeds", &c->seeds);
  read_field(obj, "grad_clip", &c->grad_clip);
  read_field(obj, "eval_beam", &c->eval_beam);
  read_field(obj, "max_decode_len", &c->max_decode_len);
}

void parse_sweep(const json& obj, SweepSettings* c) {
  check_keys(obj, "sweep", {"layers", "variants"});
  read_field(obj, "layers", &c->layers);
  read_field(obj, "variants", &c->variants);
}

void parse_paths(const json& obj, RunPaths* c) {
  check_keys(obj, "paths",
             {"corpus_dir", "memory_file", "checkpoint_dir", "metrics_dir"});
  read_field(obj, "corpus_dir", &c->corpus_dir);
  read_field(obj, "memory_file", &c->memory_file);
  read_field(obj, "checkpoint_dir", &c->checkpoint_dir);
  read_field(obj, "metrics_dir", &c->metrics_dir);
}

}  // namespace

void RunConfig::validate() const {
  corpus.validate();
  if (!is_known_variant(variant)) {
    throw std::invalid_argument(
        "config: unknown variant '" + variant +
        "' (want none|memory|external-speaker|external-utterance)");
  }
  model_config().validate();
  trainer.validate();
  if (sweep.layers.empty()) {
    throw std::invalid_argument("config: sweep.layers must be non-empty");
  }
  for (int layer : sweep.layers) {
    if (layer < 0 || layer > num_layers) {
      throw std::invalid_argument("config: sweep layer " +
                                  std::to_string(layer) + " outside 0.." +
                                  std::to_string(num_layers));
    }
  }
  if (sweep.variants.empty()) {
    throw std::invalid_argument("config: sweep.variants must be non-empty");
  }
  for (const std::string& v : sweep.variants) {
    if (!is_known_variant(v) || v == "none") {
      throw std::invalid_argument("config: sweep variant '" + v +
                                  "' (want memory|external-speaker|"
                                  "external-utterance)");
    }
  }
  if (paths.corpus_dir.empty()) {
    throw std::invalid_argument("config: paths.corpus_dir must be non-empty");
  }
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.encoder.num_layers = num_layers;
  m.encoder.insertion_layer = insertion_layer;
  m.encoder.hidden = hidden;
  m.encoder.feature_dim = corpus.feature_dim;
  m.encoder.adaptation = variant_adaptation(variant);
  m.read_head.similarity = similarity_from_name(similarity);
  m.read_head.gamma = gamma;
  m.vocab = corpus.total_vocab();
  m.embed_dim = corpus.embed_dim;
  m.dec_hidden = dec_hidden;
  m.dec_embed = dec_embed;
  m.attn_dim = attn_dim;
  m.loc_channels = loc_channels;
  m.loc_width = loc_width;
  return m;
}

std::filesystem::path RunConfig::memory_path() const {
  if (!paths.memory_file.empty()) return paths.memory_file;
  return std::filesystem::path(paths.corpus_dir) / "memory.json";
}

RunConfig runconfig_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }

  RunConfig c;
  try {
    check_keys(j, "config",
               {"seed", "corpus", "model", "trainer", "sweep", "paths"});
    read_field(j, "seed", &c.seed);
    if (j.contains("corpus")) parse_corpus(j.at("corpus"), &c.corpus);
    if (j.contains("model")) parse_model(j.at("model"), &c);
    if (j.contains("trainer")) parse_trainer(j.at("trainer"), &c.trainer);
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), &c.sweep);
    if (j.contains("paths")) parse_paths(j.at("paths"), &c.paths);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

std::string runconfig_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["corpus"] = {{"num_speakers", c.corpus.num_speakers},
                 {"utts_per_speaker", c.corpus.utts_per_speaker},
                 {"vocab_size", c.corpus.vocab_size},
                 {"frames_per_label", c.corpus.frames_per_label},
                 {"noise_std", c.corpus.noise_std},
                 {"feature_dim", c.corpus.feature_dim},
                 {"embed_dim", c.corpus.embed_dim},
                 {"min_labels", c.corpus.min_labels},
                 {"max_labels", c.corpus.max_labels},
                 {"bias_range", c.corpus.bias_range}};
  j["model"] = {{"variant", c.variant},
                {"num_layers", c.num_layers},
                {"insertion_layer", c.insertion_layer},
                {"hidden", c.hidden},
                {"similarity", c.similarity},
                {"gamma", c.gamma},
                {"dec_hidden", c.dec_hidden},
                {"dec_embed", c.dec_embed},
                {"attn_dim", c.attn_dim},
                {"loc_channels", c.loc_channels},
                {"loc_width", c.loc_width}};
  j["trainer"] = {{"lambda", c.trainer.lambda},
                  {"learning_rate", c.trainer.learning_rate},
                  {"epochs", c.trainer.epochs},
                  {"batch_size", c.trainer.batch_size},
                  {"seeds", c.trainer.seeds},
                  {"grad_clip", c.trainer.grad_clip},
                  {"eval_beam", c.trainer.eval_beam},
                  {"max_decode_len", c.trainer.max_decode_len}};
  j["sweep"] = {{"layers", c.sweep.layers}, {"variants", c.sweep.variants}};
  j["paths"] = {{"corpus_dir", c.paths.corpus_dir},
                {"memory_file", c.paths.memory_file},
                {"checkpoint_dir", c.paths.checkpoint_dir},
                {"metrics_dir", c.paths.metrics_dir}};
  return j.dump(2) + "\n";
}

RunConfig load_runconfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception&) {
    throw std::invalid_argument("config file not found: " + path.string());
  }
  return runconfig_from_json(text);
}

}  // namespace memvoice
