// tests/test_eval.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/eval.h"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "memvoice/util.h"
#include "test_util.h"

using namespace memvoice;
using test::make_rng;
using test::random_tensor;

namespace {

// Exhaustive minimal-edit search; reference for the DP implementation.
int brute_edit(const std::vector<int>& ref, const std::vector<int>& hyp,
               std::size_t i, std::size_t j) {
  if (i == ref.size()) return static_cast<int>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<int>(ref.size() - i);
  int best = brute_edit(ref, hyp, i + 1, j + 1) + (ref[i] != hyp[j] ? 1 : 0);
  best = std::min(best, brute_edit(ref, hyp, i + 1, j) + 1);
  best = std::min(best, brute_edit(ref, hyp, i, j + 1) + 1);
  return best;
}

std::vector<int> random_seq(std::mt19937_64& rng, int max_len, int vocab) {
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> sym_dist(0, vocab - 1);
  std::vector<int> out(static_cast<std::size_t>(len_dist(rng)));
  for (int& v : out) v = sym_dist(rng);
  return out;
}

CorpusConfig micro_corpus_config() {
  CorpusConfig c;
  c.num_speakers = 4;
  c.utts_per_speaker = 4;
  c.vocab_size = 2;
  c.frames_per_label = 2;
  c.noise_std = 0.05;
  c.feature_dim = 3;
  c.embed_dim = 3;
  c.min_labels = 1;
  c.max_labels = 2;
  return c;
}

ModelConfig micro_model_config(Adaptation adaptation) {
  ModelConfig c;
  c.encoder.num_layers = 2;
  c.encoder.insertion_layer = 1;
  c.encoder.hidden = 4;
  c.encoder.feature_dim = 3;
  c.encoder.adaptation = adaptation;
  c.vocab = 5;
  c.embed_dim = 3;
  c.dec_hidden = 4;
  c.dec_embed = 3;
  c.attn_dim = 4;
  c.loc_channels = 2;
  c.loc_width = 3;
  return c;
}

TrainerConfig micro_trainer_config() {
  TrainerConfig t;
  t.epochs = 1;
  t.batch_size = 4;
  t.seeds = {1};
  t.max_decode_len = 8;
  return t;
}

std::vector<MetricsRecord> sample_records() {
  SplitMetrics a;
  a.substitutions = 2;
  a.deletions = 1;
  a.insertions = 0;
  a.ref_len = 30;
  a.utterances = 10;
  SplitMetrics b;
  b.substitutions = 0;
  b.deletions = 0;
  b.insertions = 3;
  b.ref_len = 24;
  b.utterances = 8;
  return {make_record("sweep", "memory", 2, 3, "dev", a),
          make_record("sweep", "none", -1, 1, "test", b)};
}

}  // namespace

TEST_CASE("edit distance hand cases") {
  CHECK(edit_distance({3, 4, 5}, {3, 4, 5}).total() == 0);

  EditStats sub = edit_distance({3, 4, 5}, {3, 9, 5});
  CHECK(sub.substitutions == 1);
  CHECK(sub.deletions == 0);
  CHECK(sub.insertions == 0);

  EditStats del = edit_distance({3, 4, 5}, {3, 5});
  CHECK(del.total() == 1);
  CHECK(del.deletions == 1);

  EditStats ins = edit_distance({3, 5}, {3, 4, 5});
  CHECK(ins.total() == 1);
  CHECK(ins.insertions == 1);

  CHECK(edit_distance({}, {}).total() == 0);
  CHECK(edit_distance({3, 4}, {}).deletions == 2);
  CHECK(edit_distance({}, {3, 4}).insertions == 2);

  // Tie-breaking prefers substitutions: aligning "ab" to "cd" is two
  // substitutions, never deletion plus insertion pairs.
  EditStats tie = edit_distance({3, 4}, {5, 6});
  CHECK(tie.substitutions == 2);
  CHECK(tie.deletions == 0);
  CHECK(tie.insertions == 0);
}

TEST_CASE("edit distance matches exhaustive search") {
  auto rng = make_rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> ref = random_seq(rng, 6, 3);
    std::vector<int> hyp = random_seq(rng, 6, 3);
    CHECK(edit_distance(ref, hyp).total() == brute_edit(ref, hyp, 0, 0));
  }
}

TEST_CASE("edit distance invariants") {
  auto rng = make_rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> a = random_seq(rng, 6, 3);
    std::vector<int> b = random_seq(rng, 6, 3);
    std::vector<int> c = random_seq(rng, 6, 3);

    CHECK(edit_distance(a, a).total() == 0);

    EditStats ab = edit_distance(a, b);
    EditStats ba = edit_distance(b, a);
    CHECK(ab.total() == ba.total());
    CHECK(ab.substitutions == ba.substitutions);
    CHECK(ab.deletions == ba.insertions);
    CHECK(ab.insertions == ba.deletions);

    CHECK(edit_distance(a, c).total() <=
          ab.total() + edit_distance(b, c).total());
  }
}

TEST_CASE("split metrics rate matches the counts") {
  SplitMetrics m;
  m.substitutions = 2;
  m.deletions = 1;
  m.insertions = 3;
  m.ref_len = 12;
  CHECK(m.ter() == 0.5);
  SplitMetrics empty;
  CHECK(empty.ter() == 0.0);

  MetricsRecord r = make_record("x", "memory", 1, 2, "dev", m);
  CHECK(r.ter == m.ter());
  CHECK(r.substitutions + r.deletions + r.insertions == 6);
}

TEST_CASE("evaluate_model accumulates per-utterance alignments") {
  Corpus corpus = generate_corpus(micro_corpus_config(), 3);
  auto rng = make_rng(4);
  AsrModel model = AsrModel::init(micro_model_config(Adaptation::kNone), rng);

  auto test_utts = corpus.split("test");
  SplitMetrics m = evaluate_model(model, test_utts, {}, 1, 8);
  int want_ref = 0;
  for (const Utterance* u : test_utts) want_ref += static_cast<int>(u->labels.size());
  CHECK(m.ref_len == want_ref);
  CHECK(m.utterances == static_cast<int>(test_utts.size()));
  CHECK(m.ter() >= 0.0);

  SplitMetrics again = evaluate_model(model, test_utts, {}, 1, 8);
  CHECK(again.ter() == m.ter());
  CHECK(again.substitutions == m.substitutions);

  CHECK_THROWS_AS(evaluate_model(model, {}, {}, 1, 8), std::invalid_argument);
  CHECK_THROWS_AS(
      evaluate_model(model, test_utts, utterance_embedding_provider(corpus), 1, 8),
      std::invalid_argument);

  AsrModel external = AsrModel::init(micro_model_config(Adaptation::kExternal), rng);
  CHECK_THROWS_AS(evaluate_model(external, test_utts, {}, 1, 8),
                  std::invalid_argument);
  SplitMetrics em = evaluate_model(external, test_utts,
                                   utterance_embedding_provider(corpus), 1, 8);
  CHECK(em.ref_len == want_ref);
}

TEST_CASE("metrics sort order is stable and total") {
  std::vector<MetricsRecord> records = sample_records();
  std::swap(records[0], records[1]);
  sort_metrics(records);
  CHECK(records[0].variant == "memory");
  CHECK(records[1].variant == "none");
}

TEST_CASE("metrics csv round trip") {
  auto dir = test::scratch_dir("metrics_csv");
  const auto path = dir / "metrics.csv";
  std::vector<MetricsRecord> records = sample_records();
  sort_metrics(records);

  export_metrics(records, path, MetricsFormat::kCsv);
  std::vector<MetricsRecord> loaded = import_metrics(path, MetricsFormat::kCsv);
  CHECK(loaded == records);

  // Exporting the imported records reproduces the file byte for byte.
  const auto path2 = dir / "metrics2.csv";
  export_metrics(loaded, path2, MetricsFormat::kCsv);
  CHECK(read_text_file(path) == read_text_file(path2));

  SUBCASE("empty list gives a header-only file") {
    export_metrics({}, path, MetricsFormat::kCsv);
    CHECK(read_text_file(path) ==
          "experiment,variant,layer,seed,split,ter,S,D,I,ref_len\n");
    CHECK(import_metrics(path, MetricsFormat::kCsv).empty());
  }
  SUBCASE("bad header is rejected") {
    write_text_file(path, "nope\n");
    CHECK_THROWS_AS(import_metrics(path, MetricsFormat::kCsv),
                    std::runtime_error);
  }
  SUBCASE("inconsistent ter is rejected") {
    std::string text = read_text_file(path);
    const std::string needle = format_double(records[0].ter);
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, needle.size(), "0.5");
    write_text_file(path, text);
    CHECK_THROWS_AS(import_metrics(path, MetricsFormat::kCsv),
                    std::runtime_error);
  }
  SUBCASE("delimiter in a field is refused at export") {
    std::vector<MetricsRecord> bad = records;
    bad[0].experiment = "swe,ep";
    CHECK_THROWS_AS(export_metrics(bad, path, MetricsFormat::kCsv),
                    std::invalid_argument);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics jsonl round trip") {
  auto dir = test::scratch_dir("metrics_jsonl");
  const auto path = dir / "metrics.jsonl";
  std::vector<MetricsRecord> records = sample_records();
  sort_metrics(records);

  export_metrics(records, path, MetricsFormat::kJsonl);
  const std::string text = read_text_file(path);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(records.size()));
  std::vector<MetricsRecord> loaded = import_metrics(path, MetricsFormat::kJsonl);
  CHECK(loaded == records);

  export_metrics({}, path, MetricsFormat::kJsonl);
  CHECK(read_text_file(path).empty());
  CHECK(import_metrics(path, MetricsFormat::kJsonl).empty());

  std::filesystem::remove_all(dir);
}

TEST_CASE("layer sweep emits baseline plus one group per cell") {
  Corpus corpus = generate_corpus(micro_corpus_config(), 5);
  SweepRequest request;
  request.base = micro_model_config(Adaptation::kNone);
  request.trainer = micro_trainer_config();
  request.layers = {0, 1};
  request.variants = {"memory"};

  int calls = 0;
  std::size_t last_size = 0;
  std::vector<MetricsRecord> records =
      layer_sweep(corpus, request, [&](const std::vector<MetricsRecord>& sofar) {
        ++calls;
        CHECK(sofar.size() > last_size);
        last_size = sofar.size();
      });

  // Baseline + 2 layer cells, each contributing dev and test rows.
  REQUIRE(records.size() == 6);
  CHECK(calls == 3);
  std::set<std::pair<std::string, int>> groups;
  for (const MetricsRecord& r : records) {
    groups.insert({r.variant, r.layer});
    CHECK(r.experiment == "sweep");
    CHECK((r.split == "dev" || r.split == "test"));
  }
  CHECK(groups.size() == 3);
  CHECK(groups.count({"none", -1}) == 1);
  CHECK(groups.count({"memory", 0}) == 1);
  CHECK(groups.count({"memory", 1}) == 1);

  SUBCASE("deterministic re-run") {
    std::vector<MetricsRecord> again = layer_sweep(corpus, request);
    CHECK(again == records);
  }
  SUBCASE("validation") {
    SweepRequest bad = request;
    bad.layers = {5};
    CHECK_THROWS_AS(layer_sweep(corpus, bad), std::invalid_argument);
    bad = request;
    bad.variants = {"subspace"};
    CHECK_THROWS_AS(layer_sweep(corpus, bad), std::invalid_argument);
    bad = request;
    bad.variants.clear();
    CHECK_THROWS_AS(layer_sweep(corpus, bad), std::invalid_argument);
  }
}

TEST_CASE("speaker change evaluation scores both models on both conditions") {
  Corpus corpus = generate_corpus(micro_corpus_config(), 7);
  auto rng = make_rng(8);
  AsrModel memory_model =
      AsrModel::init(micro_model_config(Adaptation::kMemory), rng);
  memory_model.set_memory(build_memory(corpus));
  AsrModel external_model =
      AsrModel::init(micro_model_config(Adaptation::kExternal), rng);

  SpeakerChangeRequest request;
  request.max_decode_len = 10;
  request.memory_seed = 11;
  request.external_seed = 12;

  std::vector<MetricsRecord> records =
      speaker_change_eval(memory_model, external_model, corpus, request);
  REQUIRE(records.size() == 6);
  int spkchange = 0, selfpair = 0, single = 0;
  for (const MetricsRecord& r : records) {
    CHECK(r.experiment == "spkchange");
    if (r.split == "test") ++single;
    if (r.split == "test_spkchange") ++spkchange;
    if (r.split == "test_selfpair") ++selfpair;
    if (r.variant == "memory") CHECK(r.seed == 11);
    if (r.variant == "external-utterance") CHECK(r.seed == 12);
  }
  CHECK(single == 2);
  CHECK(spkchange == 2);
  CHECK(selfpair == 2);

  SUBCASE("controls can be skipped") {
    request.include_controls = false;
    CHECK(speaker_change_eval(memory_model, external_model, corpus, request)
              .size() == 4);
  }
  SUBCASE("variant mismatch is rejected") {
    CHECK_THROWS_AS(
        speaker_change_eval(external_model, external_model, corpus, request),
        std::invalid_argument);
    CHECK_THROWS_AS(
        speaker_change_eval(memory_model, memory_model, corpus, request),
        std::invalid_argument);
  }
}
