// tools/memvoice_main.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator entry point. Commands: gen-data, train, sweep, spkchange,
// gradcheck, export. Every command validates its configuration before any
// side effect. Exit codes: 0 success, 1 validation error, 2 runtime or
// training failure, 3 gradient-gate failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "memvoice/corpus.h"
#include "memvoice/eval.h"
#include "memvoice/gradcheck.h"
#include "memvoice/memory.h"
#include "memvoice/model.h"
#include "memvoice/runconfig.h"
#include "memvoice/selfcheck.h"
#include "memvoice/trainer.h"
#include "memvoice/util.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace memvoice;

namespace {

RunConfig make_config(const std::string& config_path,
                      const std::optional<std::uint64_t>& seed) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_runconfig(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.trainer.seeds = {*seed};
  }
  return cfg;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw std::invalid_argument(what + " not found: " + path.string());
  }
}

Corpus load_corpus_checked(const RunConfig& cfg) {
  const fs::path manifest = fs::path(cfg.paths.corpus_dir) / "manifest.json";
  if (!fs::exists(manifest)) {
    throw std::invalid_argument("corpus not found: " + manifest.string() +
                                " (run gen-data first)");
  }
  return load_corpus(cfg.paths.corpus_dir);
}

int cmd_gen_data(const RunConfig& cfg, bool force) {
  cfg.validate();
  const fs::path dir = cfg.paths.corpus_dir;
  if (fs::exists(dir) && (!fs::is_directory(dir) || !fs::is_empty(dir)) &&
      !force) {
    throw std::invalid_argument("output directory " + dir.string() +
                                " is not empty (pass --force to overwrite)");
  }

  const Corpus corpus = generate_corpus(cfg.corpus, cfg.seed);
  save_corpus(corpus, dir);
  save_memory(build_memory(corpus), cfg.memory_path());

  std::printf("corpus seed %llu: %d speakers (%zu train / %zu dev / %zu test)\n",
              static_cast<unsigned long long>(corpus.seed),
              corpus.config.num_speakers, corpus.train_speakers.size(),
              corpus.dev_speakers.size(), corpus.test_speakers.size());
  std::printf("utterances: %zu train / %zu dev / %zu test\n",
              corpus.split("train").size(), corpus.split("dev").size(),
              corpus.split("test").size());
  std::printf("wrote %s and %s\n", dir.string().c_str(),
              cfg.memory_path().string().c_str());
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const Corpus corpus = load_corpus_checked(cfg);
  const Adaptation adapt = variant_adaptation(cfg.variant);

  SpeakerMemory memory;
  if (adapt == Adaptation::kMemory) {
    require_file(cfg.memory_path(), "memory file");
    memory = load_memory(cfg.memory_path());
  }

  const ModelConfig mc = cfg.model_config();
  const ModelFactory factory = [&mc, &memory, adapt](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AsrModel m = AsrModel::init(mc, rng);
    if (adapt == Adaptation::kMemory) m.set_memory(memory);
    return m;
  };

  SelectionResult sel = multi_seed_select(factory, corpus, cfg.trainer,
                                          variant_provider(cfg.variant, corpus));

  std::vector<EpochStats> best_history;
  json runs = json::array();
  for (const RunSummary& run : sel.runs) {
    std::printf("seed %llu: final dev ter %.6f\n",
                static_cast<unsigned long long>(run.seed), run.final_dev_ter());
    json hist = json::array();
    for (const EpochStats& e : run.history) {
      hist.push_back({{"train_loss", e.train_loss}, {"dev_ter", e.dev_ter}});
    }
    runs.push_back({{"seed", run.seed}, {"history", hist}});
    if (run.seed == sel.seed) best_history = run.history;
  }

  fs::create_directories(cfg.paths.checkpoint_dir);
  const fs::path ckpt = fs::path(cfg.paths.checkpoint_dir) / "checkpoint.json";
  save_checkpoint({std::move(sel.model), cfg.trainer, cfg.trainer.epochs,
                   sel.rng_state, best_history},
                  ckpt);
  json summary = {{"variant", cfg.variant}, {"chosen_seed", sel.seed},
                  {"runs", runs}};
  const fs::path hist = fs::path(cfg.paths.checkpoint_dir) / "history.json";
  write_text_file(hist, summary.dump(2) + "\n");

  std::printf("selected seed %llu (dev ter %.6f); wrote %s\n",
              static_cast<unsigned long long>(sel.seed),
              best_history.back().dev_ter, ckpt.string().c_str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  cfg.validate();
  const Corpus corpus = load_corpus_checked(cfg);

  SweepRequest request;
  request.base = cfg.model_config();
  request.trainer = cfg.trainer;
  request.layers = cfg.sweep.layers;
  request.variants = cfg.sweep.variants;

  fs::create_directories(cfg.paths.metrics_dir);
  const fs::path csv = fs::path(cfg.paths.metrics_dir) / "sweep.csv";
  const fs::path jsonl = fs::path(cfg.paths.metrics_dir) / "sweep.jsonl";
  // Flush after every finished cell so a late failure keeps partial results.
  const auto flush = [&](const std::vector<MetricsRecord>& so_far) {
    export_metrics(so_far, csv, MetricsFormat::kCsv);
    export_metrics(so_far, jsonl, MetricsFormat::kJsonl);
  };

  const std::vector<MetricsRecord> records = layer_sweep(corpus, request, flush);
  flush(records);

  for (const MetricsRecord& r : records) {
    if (r.split != "dev") continue;
    std::printf("%-18s layer %2d  seed %llu  dev ter %.6f\n", r.variant.c_str(),
                r.layer, static_cast<unsigned long long>(r.seed), r.ter);
  }
  std::printf("wrote %s and %s (%zu records)\n", csv.string().c_str(),
              jsonl.string().c_str(), records.size());
  return 0;
}

int cmd_spkchange(const RunConfig& cfg, const std::string& checkpoints,
                  bool controls) {
  cfg.validate();
  std::vector<std::string> paths;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = checkpoints.find(',', start);
    paths.push_back(checkpoints.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (paths.size() != 2 || paths[0].empty() || paths[1].empty()) {
    throw std::invalid_argument(
        "--checkpoints wants two comma-separated paths: memory-variant,"
        "external-variant");
  }
  require_file(paths[0], "checkpoint");
  require_file(paths[1], "checkpoint");

  Checkpoint memory_ckpt = load_checkpoint(paths[0]);
  Checkpoint external_ckpt = load_checkpoint(paths[1]);
  const Corpus corpus = load_corpus_checked(cfg);

  SpeakerChangeRequest request;
  request.eval_beam = cfg.trainer.eval_beam;
  request.max_decode_len = 2 * cfg.trainer.max_decode_len;
  request.pair_seed = cfg.seed;
  request.include_controls = controls;

  std::vector<MetricsRecord> records = speaker_change_eval(
      memory_ckpt.model, external_ckpt.model, corpus, request);

  fs::create_directories(cfg.paths.metrics_dir);
  const fs::path csv = fs::path(cfg.paths.metrics_dir) / "spkchange.csv";
  const fs::path jsonl = fs::path(cfg.paths.metrics_dir) / "spkchange.jsonl";
  export_metrics(records, csv, MetricsFormat::kCsv);
  export_metrics(records, jsonl, MetricsFormat::kJsonl);

  const auto ter_of = [&records](const std::string& variant,
                                 const std::string& split) {
    for (const MetricsRecord& r : records) {
      if (r.variant == variant && r.split == split) return r.ter;
    }
    throw std::logic_error("missing record " + variant + "/" + split);
  };
  for (const std::string variant : {"memory", "external-utterance"}) {
    const double base = ter_of(variant, "test");
    const double changed = ter_of(variant, "test_spkchange");
    std::printf("%-18s test %.6f -> spkchange %.6f (delta %+.6f)\n",
                variant.c_str(), base, changed, changed - base);
    if (controls) {
      const double selfpair = ter_of(variant, "test_selfpair");
      std::printf("%-18s test %.6f -> selfpair  %.6f (delta %+.6f)\n",
                  variant.c_str(), base, selfpair, selfpair - base);
    }
  }
  std::printf("wrote %s and %s (%zu records)\n", csv.string().c_str(),
              jsonl.string().c_str(), records.size());
  return 0;
}

// Runs the fixed tiny-instance self check for both read heads and prints
// per-parameter-group worst relative errors.
int cmd_gradcheck(const std::optional<std::uint64_t>& seed, bool inject_fault) {
  const std::uint64_t model_seed = seed.value_or(20);

  double overall = 0.0;
  for (const Similarity sim : {Similarity::kScaledDot, Similarity::kCosine}) {
    const GradCheckReport report =
        joint_gradient_selfcheck(sim, model_seed, inject_fault);
    std::printf("read head %s:\n",
                sim == Similarity::kCosine ? "cosine" : "scaled-dot");
    for (const GradCheckEntry& entry : report.per_param) {
      std::printf("  %-22s %.3e\n", entry.name.c_str(), entry.max_rel_error);
    }
    std::printf("  worst: %s (%.3e)\n", report.worst_param.c_str(),
                report.max_rel_error);
    overall = std::max(overall, report.max_rel_error);
  }

  const bool ok = overall <= 1e-4;
  std::printf("gradient check max relative error %.3e (tolerance 1e-04): %s\n",
              overall, ok ? "PASS" : "FAIL");
  return ok ? 0 : 3;
}

int cmd_export(const RunConfig& cfg, const std::string& input) {
  const fs::path in = input;
  require_file(in, "metrics file");
  MetricsFormat format;
  if (in.extension() == ".csv") {
    format = MetricsFormat::kCsv;
  } else if (in.extension() == ".jsonl") {
    format = MetricsFormat::kJsonl;
  } else {
    throw std::invalid_argument("unknown metrics format (want .csv or .jsonl): " +
                                in.string());
  }

  std::vector<MetricsRecord> records;
  try {
    records = import_metrics(in, format);
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }

  fs::create_directories(cfg.paths.metrics_dir);
  const fs::path csv = fs::path(cfg.paths.metrics_dir) / "metrics.csv";
  const fs::path jsonl = fs::path(cfg.paths.metrics_dir) / "metrics.jsonl";
  export_metrics(records, csv, MetricsFormat::kCsv);
  export_metrics(records, jsonl, MetricsFormat::kJsonl);
  std::printf("exported %zu records to %s and %s\n", records.size(),
              csv.string().c_str(), jsonl.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-adapted speech recognition workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_value = 0;
  std::vector<CLI::Option*> seed_opts;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration file");
    seed_opts.push_back(sub->add_option(
        "--seed", seed_value,
        "override the run seed (corpus / training / pairing / model init)"));
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic corpus");
  bool force = false;
  std::string out_dir;
  add_common(gen);
  gen->add_option("--out", out_dir, "output corpus directory");
  gen->add_flag("--force", force, "overwrite a non-empty output directory");

  CLI::App* train = app.add_subcommand("train", "train and select over seeds");
  add_common(train);
  train->add_option("--out", out_dir, "checkpoint output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "insertion-layer sweep");
  std::vector<int> layers;
  std::vector<std::string> variants;
  add_common(sweep);
  sweep->add_option("--layers", layers, "insertion layers, e.g. 0,1,2,3")
      ->delimiter(',');
  sweep->add_option("--variants", variants,
                    "adapted variants, e.g. memory,external-speaker")
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "metrics output directory");

  CLI::App* spk = app.add_subcommand("spkchange", "speaker-change robustness");
  std::string checkpoints;
  bool controls = false;
  add_common(spk);
  spk->add_option("--checkpoints", checkpoints,
                  "memory-variant,external-variant checkpoint paths")
      ->required();
  spk->add_flag("--controls", controls, "also score self-paired controls");
  spk->add_option("--out", out_dir, "metrics output directory");

  CLI::App* grad = app.add_subcommand("gradcheck", "verify analytic gradients");
  bool inject_fault = false;
  add_common(grad);
  grad->add_flag("--inject-fault", inject_fault, "debug: flip one gradient group")
      ->group("");

  CLI::App* exp = app.add_subcommand("export", "re-export a metrics file");
  std::string export_input;
  add_common(exp);
  exp->add_option("input", export_input, "metrics file (.csv or .jsonl)")
      ->required();
  exp->add_option("--out", out_dir, "metrics output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::optional<std::uint64_t> seed;
  for (const CLI::Option* opt : seed_opts) {
    if (opt->count() > 0) seed = seed_value;
  }

  try {
    RunConfig cfg = make_config(config_path, seed);
    if (gen->parsed()) {
      if (!out_dir.empty()) cfg.paths.corpus_dir = out_dir;
      return cmd_gen_data(cfg, force);
    }
    if (train->parsed()) {
      if (!out_dir.empty()) cfg.paths.checkpoint_dir = out_dir;
      return cmd_train(cfg);
    }
    if (sweep->parsed()) {
      if (!out_dir.empty()) cfg.paths.metrics_dir = out_dir;
      if (!layers.empty()) cfg.sweep.layers = layers;
      if (!variants.empty()) cfg.sweep.variants = variants;
      return cmd_sweep(cfg);
    }
    if (spk->parsed()) {
      if (!out_dir.empty()) cfg.paths.metrics_dir = out_dir;
      return cmd_spkchange(cfg, checkpoints, controls);
    }
    if (grad->parsed()) return cmd_gradcheck(seed, inject_fault);
    if (exp->parsed()) {
      if (!out_dir.empty()) cfg.paths.metrics_dir = out_dir;
      return cmd_export(cfg, export_input);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
