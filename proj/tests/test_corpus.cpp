// tests/test_corpus.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/corpus.h"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "memvoice/util.h"
#include "test_util.h"

using namespace memvoice;

namespace {

CorpusConfig small_config() {
  CorpusConfig c;
  c.num_speakers = 6;
  c.utts_per_speaker = 8;
  c.vocab_size = 4;
  c.frames_per_label = 2;
  c.noise_std = 0.05;
  c.feature_dim = 4;
  c.embed_dim = 3;
  return c;
}

const SyntheticSpeaker& speaker_of(const Corpus& corpus, const std::string& id) {
  for (const SyntheticSpeaker& s : corpus.speakers) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("test: speaker not found");
}

bool same_features(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

// Minimal hand-assembled corpus for embedding and memory edge cases.
Corpus handmade_corpus(int feature_dim, int embed_dim) {
  Corpus corpus;
  corpus.config.num_speakers = 4;
  corpus.config.utts_per_speaker = 1;
  corpus.config.feature_dim = feature_dim;
  corpus.config.embed_dim = embed_dim;
  corpus.embedding_map_seed = 77;
  return corpus;
}

Utterance make_utt(const std::string& id, const std::string& speaker,
                   const std::string& split, Tensor features,
                   std::vector<int> labels) {
  Utterance u;
  u.id = id;
  u.speaker_id = speaker;
  u.split = split;
  u.features = std::move(features);
  u.labels = std::move(labels);
  return u;
}

}  // namespace

TEST_CASE("label string round trip") {
  const std::vector<int> labels = {kFirstSymbol, kFirstSymbol + 2, kFirstSymbol + 25};
  CHECK(labels_to_string(labels) == "acz");
  CHECK(labels_from_string("acz") == labels);
  CHECK(labels_from_string("") == std::vector<int>{});
  CHECK_THROWS_AS(labels_to_string({kFirstSymbol - 1}), std::invalid_argument);
  CHECK_THROWS_AS(labels_from_string("aB"), std::invalid_argument);
  CHECK_THROWS_AS(labels_from_string("a b"), std::invalid_argument);
}

TEST_CASE("config validation rejects degenerate settings") {
  CorpusConfig c = small_config();
  c.validate();

  CorpusConfig bad = c;
  bad.num_speakers = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.vocab_size = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.frames_per_label = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.noise_std = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.min_labels = 4;
  bad.max_labels = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_corpus(bad, 1), std::invalid_argument);
}

TEST_CASE("same seed gives a bitwise identical corpus") {
  const CorpusConfig config = small_config();
  Corpus a = generate_corpus(config, 42);
  Corpus b = generate_corpus(config, 42);

  REQUIRE(a.utterances.size() == b.utterances.size());
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    CHECK(a.utterances[i].id == b.utterances[i].id);
    CHECK(a.utterances[i].speaker_id == b.utterances[i].speaker_id);
    CHECK(a.utterances[i].split == b.utterances[i].split);
    CHECK(a.utterances[i].labels == b.utterances[i].labels);
    CHECK(same_features(a.utterances[i].features, b.utterances[i].features));
  }
  CHECK(a.train_speakers == b.train_speakers);
  CHECK(a.dev_speakers == b.dev_speakers);
  CHECK(a.test_speakers == b.test_speakers);
  CHECK(same_features(a.prototypes, b.prototypes));

  Corpus c = generate_corpus(config, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.utterances.size() && !any_diff; ++i) {
    any_diff = !same_features(a.utterances[i].features, c.utterances[i].features);
  }
  CHECK(any_diff);
}

TEST_CASE("corpus structure invariants") {
  const CorpusConfig config = small_config();
  Corpus corpus = generate_corpus(config, 7);

  CHECK(static_cast<int>(corpus.utterances.size()) ==
        config.num_speakers * config.utts_per_speaker);

  SUBCASE("speaker rosters are disjoint, sorted, and cover all speakers") {
    std::set<std::string> all;
    for (const auto* roster :
         {&corpus.train_speakers, &corpus.dev_speakers, &corpus.test_speakers}) {
      CHECK(std::is_sorted(roster->begin(), roster->end()));
      for (const std::string& id : *roster) CHECK(all.insert(id).second);
    }
    CHECK(static_cast<int>(all.size()) == config.num_speakers);
    CHECK(corpus.test_speakers.size() >= 2);
    CHECK(!corpus.dev_speakers.empty());
    CHECK(!corpus.train_speakers.empty());
  }

  SUBCASE("utterance ids are unique and splits follow the speaker roster") {
    std::set<std::string> ids;
    for (const Utterance& u : corpus.utterances) {
      CHECK(ids.insert(u.id).second);
      const bool in_train =
          std::binary_search(corpus.train_speakers.begin(),
                             corpus.train_speakers.end(), u.speaker_id);
      const bool in_dev = std::binary_search(corpus.dev_speakers.begin(),
                                             corpus.dev_speakers.end(), u.speaker_id);
      if (u.split == "train") CHECK(in_train);
      if (u.split == "dev") CHECK(in_dev);
      if (u.split == "test") CHECK((!in_train && !in_dev));
    }
  }

  SUBCASE("frame counts leave room for CTC alignment") {
    for (const Utterance& u : corpus.utterances) {
      const int n_labels = static_cast<int>(u.labels.size());
      CHECK(n_labels >= config.min_labels);
      CHECK(n_labels <= config.max_labels);
      CHECK(u.features.rows() == n_labels * config.frames_per_label);
      int repeats = 0;
      for (int i = 1; i < n_labels; ++i) {
        if (u.labels[i] == u.labels[i - 1]) ++repeats;
      }
      CHECK(u.features.rows() >= n_labels + repeats);
      for (int v : u.labels) {
        CHECK(v >= kFirstSymbol);
        CHECK(v < kFirstSymbol + config.vocab_size);
      }
    }
  }

  SUBCASE("split() filters by name") {
    std::size_t total = corpus.split("train").size() + corpus.split("dev").size() +
                        corpus.split("test").size();
    CHECK(total == corpus.utterances.size());
    for (const Utterance* u : corpus.split("dev")) CHECK(u->split == "dev");
  }
}

TEST_CASE("zero-noise features are exactly the transformed prototypes") {
  CorpusConfig config = small_config();
  config.noise_std = 0.0;
  Corpus corpus = generate_corpus(config, 11);

  for (const Utterance& u : corpus.utterances) {
    const SyntheticSpeaker& spk = speaker_of(corpus, u.speaker_id);
    for (int f = 0; f < config.feature_dim; ++f) {
      CHECK(spk.scale[f] >= 0.5);
      CHECK(spk.scale[f] <= 2.0);
    }
    for (std::size_t i = 0; i < u.labels.size(); ++i) {
      const int row = u.labels[i] - kFirstSymbol;
      for (int rep = 0; rep < config.frames_per_label; ++rep) {
        const int t = static_cast<int>(i) * config.frames_per_label + rep;
        for (int f = 0; f < config.feature_dim; ++f) {
          const double expected =
              spk.scale[f] * corpus.prototypes.at(row, f) + spk.bias[f];
          CHECK(u.features.at(t, f) == expected);
        }
      }
    }
  }
}

TEST_CASE("same symbol under two speakers differs by the affine transform") {
  CorpusConfig config = small_config();
  config.noise_std = 0.0;
  Corpus corpus = generate_corpus(config, 13);

  // Find two utterances from different speakers sharing a symbol.
  const Utterance* ua = nullptr;
  const Utterance* ub = nullptr;
  int sym = -1, ta = -1, tb = -1;
  for (const Utterance& a : corpus.utterances) {
    for (const Utterance& b : corpus.utterances) {
      if (a.speaker_id == b.speaker_id) continue;
      for (std::size_t i = 0; i < a.labels.size() && sym < 0; ++i) {
        for (std::size_t j = 0; j < b.labels.size(); ++j) {
          if (a.labels[i] == b.labels[j]) {
            ua = &a;
            ub = &b;
            sym = a.labels[i];
            ta = static_cast<int>(i) * config.frames_per_label;
            tb = static_cast<int>(j) * config.frames_per_label;
            break;
          }
        }
      }
      if (sym >= 0) break;
    }
    if (sym >= 0) break;
  }
  REQUIRE(sym >= 0);

  const SyntheticSpeaker& sa = speaker_of(corpus, ua->speaker_id);
  const SyntheticSpeaker& sb = speaker_of(corpus, ub->speaker_id);
  for (int f = 0; f < config.feature_dim; ++f) {
    // Undo speaker A's transform and reapply speaker B's.
    const double proto = (ua->features.at(ta, f) - sa.bias[f]) / sa.scale[f];
    const double expected = sb.scale[f] * proto + sb.bias[f];
    CHECK(ub->features.at(tb, f) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("feature statistics expose mean and spread") {
  Utterance u = make_utt("u0", "s0", "test", Tensor({3, 2}), {kFirstSymbol});
  // Column 0 constant at 2.0; column 1 takes values -1, 0, 1.
  u.features.at(0, 0) = 2.0;
  u.features.at(1, 0) = 2.0;
  u.features.at(2, 0) = 2.0;
  u.features.at(0, 1) = -1.0;
  u.features.at(1, 1) = 0.0;
  u.features.at(2, 1) = 1.0;

  Tensor stats = utterance_feature_stats(u);
  REQUIRE(stats.size() == 4);
  CHECK(stats[0] == 2.0);
  CHECK(stats[1] == 0.0);
  CHECK(stats[2] == 0.0);  // constant column: std part is zero
  CHECK(stats[3] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));

  Utterance empty = make_utt("u1", "s0", "test", Tensor({0, 2}), {});
  CHECK_THROWS_AS(utterance_feature_stats(empty), std::invalid_argument);
}

TEST_CASE("utterance embeddings are deterministic") {
  Corpus corpus = generate_corpus(small_config(), 17);
  const Utterance& u = corpus.utterances.front();
  Tensor e1 = utterance_embedding(corpus, u);
  Tensor e2 = utterance_embedding(corpus, u);
  REQUIRE(static_cast<int>(e1.size()) == corpus.config.embed_dim);
  CHECK(same_features(e1, e2));

  // The embedding map is fixed corpus-wide: a corpus that shares the map
  // seed embeds the same utterance identically.
  Corpus other = corpus;
  other.utterances.clear();
  CHECK(same_features(utterance_embedding(other, u), e1));
}

TEST_CASE("identical zero-noise utterances embed identically") {
  CorpusConfig config = small_config();
  config.noise_std = 0.0;
  config.vocab_size = 2;
  config.min_labels = 2;
  config.max_labels = 2;
  config.utts_per_speaker = 10;  // 4 label patterns, so duplicates must exist
  Corpus corpus = generate_corpus(config, 19);

  bool found = false;
  for (const Utterance& a : corpus.utterances) {
    for (const Utterance& b : corpus.utterances) {
      if (&a == &b || a.speaker_id != b.speaker_id || a.labels != b.labels) {
        continue;
      }
      CHECK(same_features(a.features, b.features));
      CHECK(same_features(utterance_embedding(corpus, a),
                          utterance_embedding(corpus, b)));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("speaker embedding is the mean of utterance embeddings") {
  Corpus corpus = generate_corpus(small_config(), 23);
  const std::string speaker = corpus.train_speakers.front();

  Tensor mean({corpus.config.embed_dim});
  int count = 0;
  for (const Utterance& u : corpus.utterances) {
    if (u.speaker_id != speaker) continue;
    Tensor e = utterance_embedding(corpus, u);
    for (int d = 0; d < corpus.config.embed_dim; ++d) mean[d] += e[d];
    ++count;
  }
  REQUIRE(count == corpus.config.utts_per_speaker);
  for (int d = 0; d < corpus.config.embed_dim; ++d) mean[d] /= count;

  Tensor got = extract_speaker_embedding(corpus, speaker);
  for (int d = 0; d < corpus.config.embed_dim; ++d) {
    CHECK(got[d] == doctest::Approx(mean[d]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(extract_speaker_embedding(corpus, "nobody"),
                  std::invalid_argument);
}

TEST_CASE("single-utterance speaker embedding equals the utterance embedding") {
  CorpusConfig config = small_config();
  config.utts_per_speaker = 1;
  Corpus corpus = generate_corpus(config, 29);
  const Utterance& u = corpus.utterances.front();
  CHECK(same_features(extract_speaker_embedding(corpus, u.speaker_id),
                      utterance_embedding(corpus, u)));
}

TEST_CASE("memory holds one column per training speaker in sorted order") {
  Corpus corpus = generate_corpus(small_config(), 31);
  SpeakerMemory memory = build_memory(corpus);

  CHECK(memory.size() == static_cast<int>(corpus.train_speakers.size()));
  CHECK(memory.dim() == corpus.config.embed_dim);
  CHECK(memory.speaker_ids == corpus.train_speakers);
  CHECK(std::is_sorted(memory.speaker_ids.begin(), memory.speaker_ids.end()));

  for (int c = 0; c < memory.size(); ++c) {
    Tensor expected =
        extract_speaker_embedding(corpus, corpus.train_speakers[c]);
    CHECK(same_features(memory.column(c), expected));
  }
  for (const std::string& id : corpus.dev_speakers) {
    CHECK(std::find(memory.speaker_ids.begin(), memory.speaker_ids.end(), id) ==
          memory.speaker_ids.end());
  }
  for (const std::string& id : corpus.test_speakers) {
    CHECK(std::find(memory.speaker_ids.begin(), memory.speaker_ids.end(), id) ==
          memory.speaker_ids.end());
  }
}

TEST_CASE("memory build rejects an all-zero speaker embedding") {
  Corpus corpus = handmade_corpus(2, 3);
  corpus.train_speakers = {"spkZ"};
  corpus.utterances.push_back(
      make_utt("spkZ_u000", "spkZ", "train", Tensor({3, 2}), {kFirstSymbol}));
  // All-zero features give all-zero statistics, hence an all-zero embedding.
  CHECK_THROWS_AS(build_memory(corpus), std::invalid_argument);

  Corpus empty = handmade_corpus(2, 3);
  CHECK_THROWS_AS(build_memory(empty), std::invalid_argument);
}

namespace {

std::vector<Utterance> two_speaker_testset(int per_speaker, int frames,
                                           std::uint64_t seed) {
  auto rng = test::make_rng(seed);
  std::vector<Utterance> utts;
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < per_speaker; ++i) {
      const std::string spk = "spk" + std::to_string(s);
      Tensor feats = test::random_tensor({frames + i, 3}, rng);
      utts.push_back(make_utt(spk + "_u" + std::to_string(i), spk, "test",
                              std::move(feats),
                              {kFirstSymbol + s, kFirstSymbol + (i % 2)}));
    }
  }
  return utts;
}

std::vector<const Utterance*> pointers(const std::vector<Utterance>& utts) {
  std::vector<const Utterance*> out;
  for (const Utterance& u : utts) out.push_back(&u);
  return out;
}

std::vector<std::string> source_ids(const Utterance& pair) {
  const auto plus = pair.id.find('+');
  REQUIRE(plus != std::string::npos);
  return {pair.id.substr(0, plus), pair.id.substr(plus + 1)};
}

}  // namespace

TEST_CASE("speaker-change pairing concatenates two utterances") {
  std::vector<Utterance> utts = two_speaker_testset(1, 4, 41);
  int dropped = -1;
  std::vector<Utterance> pairs = concat_speaker_change(pointers(utts), 5, &dropped);
  REQUIRE(pairs.size() == 1);
  CHECK(dropped == 0);

  const Utterance& p = pairs[0];
  CHECK(p.split == "test_spkchange");
  CHECK(p.features.rows() == utts[0].features.rows() + utts[1].features.rows());
  CHECK(p.labels.size() == utts[0].labels.size() + utts[1].labels.size());

  // Frames of each source appear unchanged, in order.
  std::vector<std::string> ids = source_ids(p);
  const Utterance& first = (ids[0] == utts[0].id) ? utts[0] : utts[1];
  const Utterance& second = (ids[0] == utts[0].id) ? utts[1] : utts[0];
  for (int t = 0; t < first.features.rows(); ++t) {
    for (int f = 0; f < 3; ++f) {
      CHECK(p.features.at(t, f) == first.features.at(t, f));
    }
  }
  for (int t = 0; t < second.features.rows(); ++t) {
    for (int f = 0; f < 3; ++f) {
      CHECK(p.features.at(first.features.rows() + t, f) ==
            second.features.at(t, f));
    }
  }
}

TEST_CASE("speaker-change pairing uses every utterance exactly once") {
  std::vector<Utterance> utts = two_speaker_testset(6, 4, 43);
  int dropped = -1;
  std::vector<Utterance> pairs = concat_speaker_change(pointers(utts), 9, &dropped);
  CHECK(dropped == 0);
  REQUIRE(pairs.size() == utts.size() / 2);

  std::multiset<std::string> used;
  std::size_t total_frames = 0, total_labels = 0;
  for (const Utterance& p : pairs) {
    for (const std::string& id : source_ids(p)) used.insert(id);
    total_frames += static_cast<std::size_t>(p.features.rows());
    total_labels += p.labels.size();
    // Cross-speaker constraint.
    const auto plus = p.speaker_id.find('+');
    REQUIRE(plus != std::string::npos);
    CHECK(p.speaker_id.substr(0, plus) != p.speaker_id.substr(plus + 1));
  }
  std::multiset<std::string> expected;
  std::size_t want_frames = 0, want_labels = 0;
  for (const Utterance& u : utts) {
    expected.insert(u.id);
    want_frames += static_cast<std::size_t>(u.features.rows());
    want_labels += u.labels.size();
  }
  CHECK(used == expected);
  CHECK(total_frames == want_frames);
  CHECK(total_labels == want_labels);
}

TEST_CASE("four utterances from two speakers pair cross-speaker") {
  std::vector<Utterance> utts = two_speaker_testset(2, 3, 47);
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    std::vector<Utterance> pairs = concat_speaker_change(pointers(utts), seed,
                                                         nullptr);
    REQUIRE(pairs.size() == 2);
    for (const Utterance& p : pairs) {
      std::vector<std::string> ids = source_ids(p);
      CHECK(ids[0].substr(0, 4) != ids[1].substr(0, 4));
    }
  }
}

TEST_CASE("speaker-change pairing is deterministic in the seed") {
  std::vector<Utterance> utts = two_speaker_testset(5, 4, 53);
  std::vector<Utterance> a = concat_speaker_change(pointers(utts), 3, nullptr);
  std::vector<Utterance> b = concat_speaker_change(pointers(utts), 3, nullptr);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
}

TEST_CASE("odd utterance count drops one and reports it") {
  std::vector<Utterance> utts = two_speaker_testset(2, 3, 59);
  utts.pop_back();
  REQUIRE(utts.size() == 3);
  int dropped = -1;
  std::vector<Utterance> pairs = concat_speaker_change(pointers(utts), 1, &dropped);
  CHECK(pairs.size() == 1);
  CHECK(dropped == 1);
}

TEST_CASE("impossible cross-speaker pairing raises") {
  // Three utterances from one speaker, one from another: after the single
  // cross pair, two same-speaker utterances remain.
  auto rng = test::make_rng(61);
  std::vector<Utterance> utts;
  for (int i = 0; i < 3; ++i) {
    utts.push_back(make_utt("spkA_u" + std::to_string(i), "spkA", "test",
                            test::random_tensor({3, 2}, rng), {kFirstSymbol}));
  }
  utts.push_back(make_utt("spkB_u0", "spkB", "test",
                          test::random_tensor({3, 2}, rng), {kFirstSymbol}));
  CHECK_THROWS_AS(concat_speaker_change(pointers(utts), 1, nullptr),
                  std::runtime_error);

  std::vector<Utterance> solo = {utts[0], utts[1]};
  CHECK_THROWS_AS(concat_speaker_change(pointers(solo), 1, nullptr),
                  std::invalid_argument);
}

TEST_CASE("self pairs double every utterance") {
  std::vector<Utterance> utts = two_speaker_testset(2, 3, 67);
  std::vector<Utterance> pairs = concat_self_pairs(pointers(utts));
  REQUIRE(pairs.size() == utts.size());
  for (std::size_t i = 0; i < utts.size(); ++i) {
    CHECK(pairs[i].features.rows() == 2 * utts[i].features.rows());
    CHECK(pairs[i].labels.size() == 2 * utts[i].labels.size());
    std::vector<std::string> ids = source_ids(pairs[i]);
    CHECK(ids[0] == utts[i].id);
    CHECK(ids[1] == utts[i].id);
  }
}

TEST_CASE("corpus save and load round trip") {
  Corpus corpus = generate_corpus(small_config(), 71);
  auto dir = test::scratch_dir("corpus_roundtrip");

  save_corpus(corpus, dir);
  Corpus loaded = load_corpus(dir);

  CHECK(loaded.seed == corpus.seed);
  CHECK(loaded.embedding_map_seed == corpus.embedding_map_seed);
  CHECK(loaded.config.num_speakers == corpus.config.num_speakers);
  CHECK(loaded.config.noise_std == corpus.config.noise_std);
  CHECK(loaded.train_speakers == corpus.train_speakers);
  CHECK(loaded.dev_speakers == corpus.dev_speakers);
  CHECK(loaded.test_speakers == corpus.test_speakers);
  REQUIRE(loaded.utterances.size() == corpus.utterances.size());
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const Utterance& a = corpus.utterances[i];
    const Utterance& b = loaded.utterances[i];
    CHECK(a.id == b.id);
    CHECK(a.speaker_id == b.speaker_id);
    CHECK(a.split == b.split);
    CHECK(a.labels == b.labels);
    CHECK(same_features(a.features, b.features));
  }

  // Saving the loaded corpus reproduces the files byte for byte.
  auto dir2 = test::scratch_dir("corpus_roundtrip2");
  save_corpus(loaded, dir2);
  CHECK(read_text_file(dir / "manifest.json") ==
        read_text_file(dir2 / "manifest.json"));
  const std::string feat = "features/" + corpus.utterances.front().id + ".txt";
  CHECK(read_text_file(dir / feat) == read_text_file(dir2 / feat));

  // Embeddings built from the loaded corpus match the original bitwise.
  CHECK(same_features(
      extract_speaker_embedding(corpus, corpus.train_speakers[0]),
      extract_speaker_embedding(loaded, loaded.train_speakers[0])));

  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("corpus load rejects malformed data") {
  Corpus corpus = generate_corpus(small_config(), 73);
  auto dir = test::scratch_dir("corpus_badload");
  save_corpus(corpus, dir);

  SUBCASE("unsupported manifest version") {
    std::string text = read_text_file(dir / "manifest.json");
    auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    write_text_file(dir / "manifest.json", text);
    CHECK_THROWS_AS(load_corpus(dir), std::runtime_error);
  }

  SUBCASE("truncated feature file") {
    const std::string feat = "features/" + corpus.utterances.front().id + ".txt";
    std::string text = read_text_file(dir / feat);
    write_text_file(dir / feat, text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_corpus(dir), std::runtime_error);
  }

  std::filesystem::remove_all(dir);
}
