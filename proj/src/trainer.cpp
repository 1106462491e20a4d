// src/trainer.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "memvoice/eval.h"
#include "memvoice/util.h"

namespace memvoice {

using nlohmann::json;

void TrainerConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("trainer: lambda outside [0,1]");
  }
  if (!(learning_rate >= 0.0)) {
    throw std::invalid_argument("trainer: negative learning rate");
  }
  if (epochs < 1) throw std::invalid_argument("trainer: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("trainer: batch_size must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("trainer: seeds must be non-empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("trainer: duplicate seeds");
  }
  if (!(grad_clip > 0.0)) {
    throw std::invalid_argument("trainer: grad_clip must be positive");
  }
  if (eval_beam < 1) throw std::invalid_argument("trainer: eval_beam must be >= 1");
  if (max_decode_len < 1) {
    throw std::invalid_argument("trainer: max_decode_len must be >= 1");
  }
}

double joint_loss(double ctc_loss, double att_loss, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("joint loss: lambda outside [0,1]");
  }
  return lambda * ctc_loss + (1.0 - lambda) * att_loss;
}

namespace {

void check_model_corpus(const AsrModel& model, const Corpus& corpus,
                        const EmbeddingProvider& embedding) {
  if (model.config.encoder.feature_dim != corpus.config.feature_dim) {
    throw std::invalid_argument(
        "trainer: model expects feature dim " +
        std::to_string(model.config.encoder.feature_dim) + " but corpus has " +
        std::to_string(corpus.config.feature_dim));
  }
  if (model.config.vocab < corpus.config.total_vocab()) {
    throw std::invalid_argument("trainer: model vocab " +
                                std::to_string(model.config.vocab) +
                                " smaller than corpus vocab " +
                                std::to_string(corpus.config.total_vocab()));
  }
  const Adaptation a = model.config.encoder.adaptation;
  if (a == Adaptation::kExternal && !embedding) {
    throw std::invalid_argument("trainer: external variant needs an embedding provider");
  }
  if (a != Adaptation::kExternal && embedding) {
    throw std::invalid_argument(
        "trainer: embedding provider given to a non-external variant");
  }
  if (a == Adaptation::kMemory && model.memory.size() == 0) {
    throw std::invalid_argument("trainer: memory variant without a speaker memory");
  }
}

double dev_error_rate(AsrModel& model,
                      const std::vector<const Utterance*>& dev_utts,
                      const EmbeddingProvider& embedding,
                      const TrainerConfig& config) {
  SplitMetrics metrics = evaluate_model(model, dev_utts, embedding,
                                        config.eval_beam, config.max_decode_len);
  return metrics.ter();
}

std::string batch_diagnostic(int epoch, int batch_index,
                             const std::vector<const Utterance*>& batch) {
  std::string ids;
  for (const Utterance* u : batch) {
    if (!ids.empty()) ids += ", ";
    ids += u->id;
  }
  return "epoch " + std::to_string(epoch) + ", batch " +
         std::to_string(batch_index) + " [" + ids + "]";
}

}  // namespace

TrainResult train(AsrModel model, const Corpus& corpus,
                  const TrainerConfig& config, std::uint64_t seed,
                  const EmbeddingProvider& embedding) {
  config.validate();
  check_model_corpus(model, corpus, embedding);

  std::vector<const Utterance*> train_utts = corpus.split("train");
  std::vector<const Utterance*> dev_utts = corpus.split("dev");
  if (train_utts.empty()) throw std::invalid_argument("trainer: empty train split");
  if (dev_utts.empty()) throw std::invalid_argument("trainer: empty dev split");

  // Fixed batching: group utterances of similar length, deterministically.
  std::stable_sort(train_utts.begin(), train_utts.end(),
                   [](const Utterance* a, const Utterance* b) {
                     if (a->features.rows() != b->features.rows()) {
                       return a->features.rows() < b->features.rows();
                     }
                     return a->id < b->id;
                   });
  std::vector<std::vector<const Utterance*>> batches;
  for (std::size_t i = 0; i < train_utts.size();
       i += static_cast<std::size_t>(config.batch_size)) {
    const std::size_t end =
        std::min(train_utts.size(), i + static_cast<std::size_t>(config.batch_size));
    batches.emplace_back(train_utts.begin() + i, train_utts.begin() + end);
  }

  std::mt19937_64 rng(mix_seed(seed, 0x7121));
  std::vector<Parameter*> params = model.parameters();
  const bool external = model.config.encoder.adaptation == Adaptation::kExternal;

  TrainResult result;
  result.seed = seed;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const std::vector<const Utterance*>& batch = batches[order[oi]];
      for (Parameter* p : params) p->reset_grad();

      double batch_loss = 0.0;
      for (const Utterance* u : batch) {
        Tensor ext;
        if (external) ext = embedding(*u);
        ForwardLoss fl = forward_loss(model, u->features, u->labels,
                                      external ? &ext : nullptr, config.lambda,
                                      true);
        batch_loss += fl.joint;
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "training diverged: non-finite joint loss at " +
            batch_diagnostic(epoch, static_cast<int>(oi), batch));
      }
      loss_sum += batch_loss;

      const double inv = 1.0 / static_cast<double>(batch.size());
      double sq_norm = 0.0;
      for (Parameter* p : params) {
        for (double& g : p->grad.values()) {
          g *= inv;
          sq_norm += g * g;
        }
      }
      const double norm = std::sqrt(sq_norm);
      const double clip_scale = norm > config.grad_clip ? config.grad_clip / norm : 1.0;
      for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
          p->value[i] -= config.learning_rate * clip_scale * p->grad[i];
        }
      }
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train_utts.size());
    stats.dev_ter = dev_error_rate(model, dev_utts, embedding, config);
    result.history.push_back(stats);
  }

  std::ostringstream state;
  state << rng;
  result.rng_state = state.str();
  result.model = std::move(model);
  return result;
}

SelectionResult multi_seed_select(const ModelFactory& factory,
                                  const Corpus& corpus,
                                  const TrainerConfig& config,
                                  const EmbeddingProvider& embedding) {
  config.validate();
  if (!factory) throw std::invalid_argument("selection: null model factory");

  const int n = static_cast<int>(config.seeds.size());
  std::vector<std::optional<TrainResult>> results(n);
  std::vector<std::exception_ptr> errors(n);

  const int workers = std::min(worker_count(), n);
  std::atomic<int> next{0};
  auto body = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        results[i] = train(factory(config.seeds[i]), corpus, config,
                           config.seeds[i], embedding);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
  }

  for (int i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }

  int best = 0;
  for (int i = 1; i < n; ++i) {
    const double ti = results[i]->history.back().dev_ter;
    const double tb = results[best]->history.back().dev_ter;
    if (ti < tb || (ti == tb && config.seeds[i] < config.seeds[best])) best = i;
  }

  SelectionResult out;
  out.seed = config.seeds[best];
  out.rng_state = results[best]->rng_state;
  for (int i = 0; i < n; ++i) {
    out.runs.push_back({config.seeds[i], std::move(results[i]->history)});
  }
  out.model = std::move(results[best]->model);
  return out;
}

EmbeddingProvider speaker_embedding_provider(const Corpus& corpus) {
  auto cache = std::make_shared<std::map<std::string, Tensor>>();
  std::set<std::string> speakers;
  for (const Utterance& u : corpus.utterances) speakers.insert(u.speaker_id);
  for (const std::string& id : speakers) {
    cache->emplace(id, extract_speaker_embedding(corpus, id));
  }
  return [cache](const Utterance& u) -> Tensor {
    auto it = cache->find(u.speaker_id);
    if (it == cache->end()) {
      throw std::invalid_argument("embedding provider: unknown speaker '" +
                                  u.speaker_id + "'");
    }
    return it->second;
  };
}

EmbeddingProvider utterance_embedding_provider(const Corpus& corpus) {
  // Snapshot the embedding map inputs; features come from the utterance.
  auto shell = std::make_shared<Corpus>();
  shell->config = corpus.config;
  shell->embedding_map_seed = corpus.embedding_map_seed;
  return [shell](const Utterance& u) -> Tensor {
    return utterance_embedding(*shell, u);
  };
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  json j;
  j["version"] = 1;
  j["model"] = json::parse(model_to_json(checkpoint.model));
  j["trainer"] = {{"lambda", checkpoint.trainer.lambda},
                  {"learning_rate", checkpoint.trainer.learning_rate},
                  {"epochs", checkpoint.trainer.epochs},
                  {"batch_size", checkpoint.trainer.batch_size},
                  {"seeds", checkpoint.trainer.seeds},
                  {"grad_clip", checkpoint.trainer.grad_clip},
                  {"eval_beam", checkpoint.trainer.eval_beam},
                  {"max_decode_len", checkpoint.trainer.max_decode_len}};
  j["epoch"] = checkpoint.epoch;
  j["rng_state"] = checkpoint.rng_state;
  json hist = json::array();
  for (const EpochStats& e : checkpoint.history) {
    hist.push_back({{"train_loss", e.train_loss}, {"dev_ter", e.dev_ter}});
  }
  j["history"] = hist;
  write_text_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const json j = json::parse(read_text_file(path));
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported version in " + path.string());
  }
  Checkpoint out;
  out.model = model_from_json(j.at("model").dump());
  const json& t = j.at("trainer");
  out.trainer.lambda = t.at("lambda").get<double>();
  out.trainer.learning_rate = t.at("learning_rate").get<double>();
  out.trainer.epochs = t.at("epochs").get<int>();
  out.trainer.batch_size = t.at("batch_size").get<int>();
  out.trainer.seeds = t.at("seeds").get<std::vector<std::uint64_t>>();
  out.trainer.grad_clip = t.at("grad_clip").get<double>();
  out.trainer.eval_beam = t.at("eval_beam").get<int>();
  out.trainer.max_decode_len = t.at("max_decode_len").get<int>();
  out.epoch = j.at("epoch").get<int>();
  out.rng_state = j.at("rng_state").get<std::string>();
  for (const json& e : j.at("history")) {
    out.history.push_back({e.at("train_loss").get<double>(),
                           e.at("dev_ter").get<double>()});
  }
  return out;
}

}  // namespace memvoice
