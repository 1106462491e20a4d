// src/eval.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/eval.h"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "memvoice/util.h"

namespace memvoice {

using nlohmann::json;

EditStats edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const int r = static_cast<int>(ref.size());
  const int h = static_cast<int>(hyp.size());
  std::vector<std::vector<int>> dp(r + 1, std::vector<int>(h + 1, 0));
  for (int i = 1; i <= r; ++i) dp[i][0] = i;
  for (int j = 1; j <= h; ++j) dp[0][j] = j;
  for (int i = 1; i <= r; ++i) {
    for (int j = 1; j <= h; ++j) {
      const int diag = dp[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1] ? 1 : 0);
      const int del = dp[i - 1][j] + 1;
      const int ins = dp[i][j - 1] + 1;
      dp[i][j] = std::min({diag, del, ins});
    }
  }

  // Backtrack, preferring matches/substitutions, then deletions.
  EditStats stats;
  int i = r, j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        dp[i][j] == dp[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1] ? 1 : 0)) {
      if (ref[i - 1] != hyp[j - 1]) ++stats.substitutions;
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      ++stats.deletions;
      --i;
    } else {
      ++stats.insertions;
      --j;
    }
  }
  return stats;
}

std::vector<const Utterance*> as_pointers(const std::vector<Utterance>& utts) {
  std::vector<const Utterance*> out;
  out.reserve(utts.size());
  for (const Utterance& u : utts) out.push_back(&u);
  return out;
}

SplitMetrics evaluate_model(AsrModel& model,
                            const std::vector<const Utterance*>& utts,
                            const EmbeddingProvider& embedding, int beam,
                            int max_len) {
  if (utts.empty()) throw std::invalid_argument("evaluate: no utterances");
  const bool external = model.config.encoder.adaptation == Adaptation::kExternal;
  if (external && !embedding) {
    throw std::invalid_argument("evaluate: external variant needs an embedding provider");
  }
  if (!external && embedding) {
    throw std::invalid_argument(
        "evaluate: embedding provider given to a non-external variant");
  }

  SplitMetrics metrics;
  for (const Utterance* u : utts) {
    Tensor ext;
    if (external) ext = embedding(*u);
    Hypothesis hyp =
        transcribe(model, u->features, external ? &ext : nullptr, beam, max_len);
    EditStats e = edit_distance(u->labels, hyp.tokens);
    metrics.substitutions += e.substitutions;
    metrics.deletions += e.deletions;
    metrics.insertions += e.insertions;
    metrics.ref_len += static_cast<int>(u->labels.size());
    ++metrics.utterances;
  }
  return metrics;
}

MetricsRecord make_record(const std::string& experiment,
                          const std::string& variant, int layer,
                          std::uint64_t seed, const std::string& split,
                          const SplitMetrics& metrics) {
  MetricsRecord r;
  r.experiment = experiment;
  r.variant = variant;
  r.layer = layer;
  r.seed = seed;
  r.split = split;
  r.ter = metrics.ter();
  r.substitutions = metrics.substitutions;
  r.deletions = metrics.deletions;
  r.insertions = metrics.insertions;
  r.ref_len = metrics.ref_len;
  return r;
}

namespace {

bool known_variant(const std::string& v) {
  return v == "memory" || v == "external-speaker" || v == "external-utterance";
}

}  // namespace

std::vector<MetricsRecord> layer_sweep(const Corpus& corpus,
                                       const SweepRequest& request,
                                       const SweepProgress& on_group) {
  request.trainer.validate();
  if (request.layers.empty()) throw std::invalid_argument("sweep: no layers");
  if (request.variants.empty()) throw std::invalid_argument("sweep: no variants");
  for (int layer : request.layers) {
    if (layer < 0 || layer > request.base.encoder.num_layers) {
      throw std::invalid_argument("sweep: layer " + std::to_string(layer) +
                                  " outside 0.." +
                                  std::to_string(request.base.encoder.num_layers));
    }
  }
  bool wants_memory = false;
  for (const std::string& v : request.variants) {
    if (!known_variant(v)) {
      throw std::invalid_argument("sweep: unknown variant '" + v + "'");
    }
    wants_memory = wants_memory || v == "memory";
  }

  SpeakerMemory memory;
  if (wants_memory) memory = build_memory(corpus);
  const std::vector<const Utterance*> dev = corpus.split("dev");
  const std::vector<const Utterance*> test = corpus.split("test");

  std::vector<MetricsRecord> records;
  auto run_cell = [&](const ModelConfig& cfg, const std::string& variant,
                      int layer, const EmbeddingProvider& provider) {
    ModelFactory factory;
    if (cfg.encoder.adaptation == Adaptation::kMemory) {
      factory = [cfg, &memory](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        AsrModel m = AsrModel::init(cfg, rng);
        m.set_memory(memory);
        return m;
      };
    } else {
      factory = [cfg](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return AsrModel::init(cfg, rng);
      };
    }
    SelectionResult sel = multi_seed_select(factory, corpus, request.trainer,
                                            provider);
    SplitMetrics dm = evaluate_model(sel.model, dev, provider,
                                     request.trainer.eval_beam,
                                     request.trainer.max_decode_len);
    SplitMetrics tm = evaluate_model(sel.model, test, provider,
                                     request.trainer.eval_beam,
                                     request.trainer.max_decode_len);
    records.push_back(make_record("sweep", variant, layer, sel.seed, "dev", dm));
    records.push_back(make_record("sweep", variant, layer, sel.seed, "test", tm));
    if (on_group) on_group(records);
  };

  // Unadapted baseline first; reported with layer -1.
  {
    ModelConfig cfg = request.base;
    cfg.encoder.adaptation = Adaptation::kNone;
    run_cell(cfg, "none", -1, {});
  }
  for (int layer : request.layers) {
    for (const std::string& variant : request.variants) {
      ModelConfig cfg = request.base;
      cfg.encoder.insertion_layer = layer;
      EmbeddingProvider provider;
      if (variant == "memory") {
        cfg.encoder.adaptation = Adaptation::kMemory;
      } else {
        cfg.encoder.adaptation = Adaptation::kExternal;
        provider = variant == "external-speaker"
                       ? speaker_embedding_provider(corpus)
                       : utterance_embedding_provider(corpus);
      }
      run_cell(cfg, variant, layer, provider);
    }
  }
  return records;
}

std::vector<MetricsRecord> speaker_change_eval(
    AsrModel& memory_model, AsrModel& external_model, const Corpus& corpus,
    const SpeakerChangeRequest& request) {
  if (memory_model.config.encoder.adaptation != Adaptation::kMemory) {
    throw std::invalid_argument(
        "speaker change: first model must be the memory variant");
  }
  if (external_model.config.encoder.adaptation != Adaptation::kExternal) {
    throw std::invalid_argument(
        "speaker change: second model must be the external variant");
  }

  const std::vector<const Utterance*> testset = corpus.split("test");
  if (testset.empty()) throw std::invalid_argument("speaker change: empty test split");
  int dropped = 0;
  const std::vector<Utterance> changed =
      concat_speaker_change(testset, request.pair_seed, &dropped);
  const EmbeddingProvider ext = utterance_embedding_provider(corpus);

  std::vector<MetricsRecord> records;
  auto score = [&](AsrModel& model, const std::string& variant,
                   std::uint64_t seed, const std::vector<const Utterance*>& utts,
                   const std::string& split) {
    const bool is_external =
        model.config.encoder.adaptation == Adaptation::kExternal;
    SplitMetrics m = evaluate_model(model, utts, is_external ? ext : EmbeddingProvider{},
                                    request.eval_beam, request.max_decode_len);
    records.push_back(make_record("spkchange", variant,
                                  model.config.encoder.insertion_layer, seed,
                                  split, m));
  };

  score(memory_model, "memory", request.memory_seed, testset, "test");
  score(memory_model, "memory", request.memory_seed, as_pointers(changed),
        "test_spkchange");
  score(external_model, "external-utterance", request.external_seed, testset,
        "test");
  score(external_model, "external-utterance", request.external_seed,
        as_pointers(changed), "test_spkchange");

  if (request.include_controls) {
    const std::vector<Utterance> selfs = concat_self_pairs(testset);
    score(memory_model, "memory", request.memory_seed, as_pointers(selfs),
          "test_selfpair");
    score(external_model, "external-utterance", request.external_seed,
          as_pointers(selfs), "test_selfpair");
  }
  return records;
}

void sort_metrics(std::vector<MetricsRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const MetricsRecord& a, const MetricsRecord& b) {
              return std::tie(a.experiment, a.variant, a.layer, a.seed, a.split) <
                     std::tie(b.experiment, b.variant, b.layer, b.seed, b.split);
            });
}

namespace {

constexpr const char* kCsvHeader = "experiment,variant,layer,seed,split,ter,S,D,I,ref_len";

void check_field(const std::string& value) {
  if (value.find(',') != std::string::npos ||
      value.find('\n') != std::string::npos) {
    throw std::invalid_argument("metrics: field '" + value +
                                "' contains a delimiter");
  }
}

json record_to_json(const MetricsRecord& r) {
  return {{"experiment", r.experiment}, {"variant", r.variant},
          {"layer", r.layer},           {"seed", r.seed},
          {"split", r.split},           {"ter", r.ter},
          {"substitutions", r.substitutions},
          {"deletions", r.deletions},   {"insertions", r.insertions},
          {"ref_len", r.ref_len}};
}

MetricsRecord record_from_json(const json& j) {
  MetricsRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.layer = j.at("layer").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.split = j.at("split").get<std::string>();
  r.ter = j.at("ter").get<double>();
  r.substitutions = j.at("substitutions").get<int>();
  r.deletions = j.at("deletions").get<int>();
  r.insertions = j.at("insertions").get<int>();
  r.ref_len = j.at("ref_len").get<int>();
  return r;
}

void check_consistent(const MetricsRecord& r, const std::string& where) {
  const int total = r.substitutions + r.deletions + r.insertions;
  const double expect =
      r.ref_len > 0 ? static_cast<double>(total) / r.ref_len : 0.0;
  if (r.ter != expect) {
    throw std::runtime_error(where + ": ter " + format_double(r.ter) +
                             " inconsistent with counts (expected " +
                             format_double(expect) + ")");
  }
}

}  // namespace

void export_metrics(const std::vector<MetricsRecord>& records,
                    const std::filesystem::path& path, MetricsFormat format) {
  std::vector<MetricsRecord> sorted = records;
  sort_metrics(sorted);

  std::ostringstream out;
  if (format == MetricsFormat::kCsv) {
    out << kCsvHeader << "\n";
    for (const MetricsRecord& r : sorted) {
      check_field(r.experiment);
      check_field(r.variant);
      check_field(r.split);
      out << r.experiment << "," << r.variant << "," << r.layer << "," << r.seed
          << "," << r.split << "," << format_double(r.ter) << ","
          << r.substitutions << "," << r.deletions << "," << r.insertions << ","
          << r.ref_len << "\n";
    }
  } else {
    for (const MetricsRecord& r : sorted) {
      out << record_to_json(r).dump() << "\n";
    }
  }
  write_text_file(path, out.str());
}

std::vector<MetricsRecord> import_metrics(const std::filesystem::path& path,
                                          MetricsFormat format) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<MetricsRecord> records;

  if (format == MetricsFormat::kCsv) {
    if (!std::getline(in, line) || line != kCsvHeader) {
      throw std::runtime_error(path.string() + ":1: bad metrics header");
    }
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (fields.size() != 10) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": expected 10 fields, got " +
                                 std::to_string(fields.size()));
      }
      MetricsRecord r;
      r.experiment = fields[0];
      r.variant = fields[1];
      r.layer = std::stoi(fields[2]);
      r.seed = std::stoull(fields[3]);
      r.split = fields[4];
      r.ter = std::stod(fields[5]);
      r.substitutions = std::stoi(fields[6]);
      r.deletions = std::stoi(fields[7]);
      r.insertions = std::stoi(fields[8]);
      r.ref_len = std::stoi(fields[9]);
      check_consistent(r, path.string() + ":" + std::to_string(line_no));
      records.push_back(std::move(r));
    }
  } else {
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      MetricsRecord r = record_from_json(json::parse(line));
      check_consistent(r, path.string() + ":" + std::to_string(line_no));
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace memvoice
