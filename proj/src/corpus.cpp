// src/corpus.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "memvoice/util.h"

namespace memvoice {

using nlohmann::json;

std::string labels_to_string(const std::vector<int>& labels) {
  std::string out;
  out.reserve(labels.size());
  for (int v : labels) {
    if (v < kFirstSymbol || v >= kFirstSymbol + 26) {
      throw std::invalid_argument("labels_to_string: symbol " + std::to_string(v) +
                                  " not printable");
    }
    out.push_back(static_cast<char>('a' + (v - kFirstSymbol)));
  }
  return out;
}

std::vector<int> labels_from_string(const std::string& text) {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    if (c < 'a' || c > 'z') {
      throw std::invalid_argument(std::string("labels_from_string: bad char '") +
                                  c + "'");
    }
    out.push_back(kFirstSymbol + (c - 'a'));
  }
  return out;
}

void CorpusConfig::validate() const {
  if (num_speakers < 4) {
    throw std::invalid_argument("corpus: need at least 4 speakers for splits");
  }
  if (utts_per_speaker < 1) throw std::invalid_argument("corpus: need utterances");
  if (vocab_size < 2) throw std::invalid_argument("corpus: vocab_size must be >= 2");
  if (vocab_size > 26) throw std::invalid_argument("corpus: vocab_size above 26");
  if (frames_per_label < 1) {
    throw std::invalid_argument("corpus: frames_per_label must be >= 1");
  }
  if (noise_std < 0.0) throw std::invalid_argument("corpus: negative noise_std");
  if (feature_dim < 1 || embed_dim < 1) {
    throw std::invalid_argument("corpus: dims must be positive");
  }
  if (min_labels < 1 || max_labels < min_labels) {
    throw std::invalid_argument("corpus: bad label length range");
  }
  if (bias_range < 0.0) throw std::invalid_argument("corpus: negative bias_range");
}

std::vector<const Utterance*> Corpus::split(const std::string& name) const {
  std::vector<const Utterance*> out;
  for (const Utterance& u : utterances) {
    if (u.split == name) out.push_back(&u);
  }
  return out;
}

namespace {

struct SpeakerTransform {
  Tensor scale;  // in [0.5, 2.0]
  Tensor bias;
};

SpeakerTransform make_transform(const CorpusConfig& config,
                                std::mt19937_64& rng) {
  SpeakerTransform t;
  t.scale = Tensor({config.feature_dim});
  t.bias = Tensor({config.feature_dim});
  std::uniform_real_distribution<double> scale_dist(0.5, 2.0);
  std::uniform_real_distribution<double> bias_dist(-config.bias_range,
                                                   config.bias_range);
  for (int f = 0; f < config.feature_dim; ++f) {
    t.scale[f] = scale_dist(rng);
    t.bias[f] = bias_dist(rng);
  }
  return t;
}

Tensor make_prototypes(const CorpusConfig& config, std::mt19937_64& rng) {
  Tensor protos({config.vocab_size, config.feature_dim});
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i < protos.size(); ++i) protos[i] = dist(rng);
  return protos;
}

}  // namespace

Corpus generate_corpus(const CorpusConfig& config, std::uint64_t seed) {
  config.validate();
  Corpus corpus;
  corpus.config = config;
  corpus.seed = seed;
  corpus.embedding_map_seed = mix_seed(seed, 0xE3B);

  std::mt19937_64 proto_rng(mix_seed(seed, 1));
  corpus.prototypes = make_prototypes(config, proto_rng);
  const Tensor& protos = corpus.prototypes;

  // speakers named spk00..; split carve on a seeded shuffle
  std::vector<std::string> speakers;
  for (int s = 0; s < config.num_speakers; ++s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "spk%02d", s);
    speakers.emplace_back(buf);
  }
  std::vector<std::string> shuffled = speakers;
  std::mt19937_64 split_rng(mix_seed(seed, 2));
  std::shuffle(shuffled.begin(), shuffled.end(), split_rng);
  // Two held-out speakers per split keeps the dev metric from hinging on a
  // single speaker's transform draw; the change protocol needs two in test.
  // Small rosters shrink dev before failing, so 4 speakers carve 2/1/1.
  const int n_test = std::max(2, config.num_speakers / 8);
  int n_dev = std::max(2, config.num_speakers / 8);
  while (n_dev > 1 && n_test + n_dev >= config.num_speakers) --n_dev;
  if (n_test + n_dev >= config.num_speakers) {
    throw std::invalid_argument("corpus: too few speakers to carve splits");
  }
  corpus.test_speakers.assign(shuffled.begin(), shuffled.begin() + n_test);
  corpus.dev_speakers.assign(shuffled.begin() + n_test,
                             shuffled.begin() + n_test + n_dev);
  corpus.train_speakers.assign(shuffled.begin() + n_test + n_dev, shuffled.end());
  std::sort(corpus.test_speakers.begin(), corpus.test_speakers.end());
  std::sort(corpus.dev_speakers.begin(), corpus.dev_speakers.end());
  std::sort(corpus.train_speakers.begin(), corpus.train_speakers.end());

  auto split_of = [&](const std::string& id) -> const char* {
    if (std::binary_search(corpus.train_speakers.begin(),
                           corpus.train_speakers.end(), id)) {
      return "train";
    }
    if (std::binary_search(corpus.dev_speakers.begin(), corpus.dev_speakers.end(),
                           id)) {
      return "dev";
    }
    return "test";
  };

  for (int s = 0; s < config.num_speakers; ++s) {
    std::mt19937_64 spk_rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(s)));
    SpeakerTransform transform = make_transform(config, spk_rng);
    corpus.speakers.push_back({speakers[s], transform.scale, transform.bias});
    std::uniform_int_distribution<int> len_dist(config.min_labels,
                                                config.max_labels);
    std::uniform_int_distribution<int> sym_dist(0, config.vocab_size - 1);
    std::normal_distribution<double> noise(0.0, config.noise_std);

    for (int u = 0; u < config.utts_per_speaker; ++u) {
      Utterance utt;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s_u%03d", speakers[s].c_str(), u);
      utt.id = buf;
      utt.speaker_id = speakers[s];
      utt.split = split_of(speakers[s]);

      const int n_labels = len_dist(spk_rng);
      utt.labels.resize(n_labels);
      for (int& v : utt.labels) v = kFirstSymbol + sym_dist(spk_rng);

      const int t_len = n_labels * config.frames_per_label;
      utt.features = Tensor({t_len, config.feature_dim});
      for (int i = 0; i < n_labels; ++i) {
        const int proto_row = utt.labels[i] - kFirstSymbol;
        for (int rep = 0; rep < config.frames_per_label; ++rep) {
          const int t = i * config.frames_per_label + rep;
          for (int f = 0; f < config.feature_dim; ++f) {
            const double base = protos.at(proto_row, f);
            utt.features.at(t, f) = transform.scale[f] * base +
                                    transform.bias[f] +
                                    (config.noise_std > 0.0 ? noise(spk_rng) : 0.0);
          }
        }
      }
      corpus.utterances.push_back(std::move(utt));
    }
  }
  return corpus;
}

namespace {

Tensor embedding_map(const CorpusConfig& config, std::uint64_t map_seed) {
  std::mt19937_64 rng(map_seed);
  const int in_dim = 2 * config.feature_dim;
  Tensor map({config.embed_dim, in_dim});
  std::normal_distribution<double> dist(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = dist(rng) * scale;
  return map;
}

}  // namespace

Tensor utterance_feature_stats(const Utterance& utt) {
  const int t_len = utt.features.rows();
  const int f_dim = utt.features.cols();
  if (t_len < 1) {
    throw std::invalid_argument("utterance_feature_stats: empty features");
  }
  Tensor stats({2 * f_dim});
  for (int f = 0; f < f_dim; ++f) {
    double mean = 0.0;
    for (int t = 0; t < t_len; ++t) mean += utt.features.at(t, f);
    mean /= t_len;
    double var = 0.0;
    for (int t = 0; t < t_len; ++t) {
      const double d = utt.features.at(t, f) - mean;
      var += d * d;
    }
    stats[f] = mean;
    stats[f_dim + f] = std::sqrt(var / t_len);
  }
  return stats;
}

Tensor utterance_embedding(const Corpus& corpus, const Utterance& utt) {
  const int f_dim = utt.features.cols();
  if (f_dim != corpus.config.feature_dim) {
    throw std::invalid_argument("utterance_embedding: feature width mismatch");
  }
  Tensor stats = utterance_feature_stats(utt);
  Tensor map = embedding_map(corpus.config, corpus.embedding_map_seed);
  Tensor out({corpus.config.embed_dim});
  for (int d = 0; d < corpus.config.embed_dim; ++d) {
    double acc = 0.0;
    for (int i = 0; i < 2 * f_dim; ++i) acc += map.at(d, i) * stats[i];
    out[d] = acc;
  }
  return out;
}

Tensor extract_speaker_embedding(const Corpus& corpus,
                                 const std::string& speaker_id) {
  Tensor sum({corpus.config.embed_dim});
  int count = 0;
  for (const Utterance& u : corpus.utterances) {
    if (u.speaker_id != speaker_id) continue;
    Tensor e = utterance_embedding(corpus, u);
    for (int d = 0; d < corpus.config.embed_dim; ++d) sum[d] += e[d];
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("corpus: unknown speaker '" + speaker_id + "'");
  }
  for (int d = 0; d < corpus.config.embed_dim; ++d) sum[d] /= count;
  return sum;
}

SpeakerMemory build_memory(const Corpus& corpus) {
  if (corpus.train_speakers.empty()) {
    throw std::invalid_argument("corpus: no training speakers");
  }
  const int n = static_cast<int>(corpus.train_speakers.size());
  Tensor m({corpus.config.embed_dim, n});
  for (int c = 0; c < n; ++c) {
    Tensor e = extract_speaker_embedding(corpus, corpus.train_speakers[c]);
    for (int d = 0; d < corpus.config.embed_dim; ++d) m.at(d, c) = e[d];
  }
  return SpeakerMemory(std::move(m), corpus.train_speakers);
}

namespace {

Utterance concat_pair(const Utterance& a, const Utterance& b) {
  Utterance out;
  out.id = a.id + "+" + b.id;
  out.speaker_id = a.speaker_id + "+" + b.speaker_id;
  out.split = "test_spkchange";
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  const int t1 = a.features.rows(), t2 = b.features.rows();
  const int f_dim = a.features.cols();
  if (b.features.cols() != f_dim) {
    throw std::invalid_argument("concat: feature widths differ");
  }
  out.features = Tensor({t1 + t2, f_dim});
  for (int t = 0; t < t1; ++t)
    for (int f = 0; f < f_dim; ++f) out.features.at(t, f) = a.features.at(t, f);
  for (int t = 0; t < t2; ++t)
    for (int f = 0; f < f_dim; ++f)
      out.features.at(t1 + t, f) = b.features.at(t, f);
  return out;
}

}  // namespace

std::vector<Utterance> concat_speaker_change(
    const std::vector<const Utterance*>& testset, std::uint64_t seed,
    int* dropped) {
  if (dropped != nullptr) *dropped = 0;

  // bucket by speaker, shuffle within buckets
  std::vector<std::string> speaker_order;
  std::vector<std::vector<const Utterance*>> groups;
  for (const Utterance* u : testset) {
    auto it = std::find(speaker_order.begin(), speaker_order.end(), u->speaker_id);
    if (it == speaker_order.end()) {
      speaker_order.push_back(u->speaker_id);
      groups.emplace_back();
      it = speaker_order.end() - 1;
    }
    groups[static_cast<std::size_t>(it - speaker_order.begin())].push_back(u);
  }
  if (speaker_order.size() < 2) {
    throw std::invalid_argument("speaker change: need utterances from >= 2 speakers");
  }
  std::mt19937_64 rng(mix_seed(seed, 0x5C));
  for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);

  // Pair off the two currently largest groups; this keeps the largest group
  // from outgrowing the rest, which is exactly when pairing gets stuck.
  std::vector<Utterance> out;
  for (;;) {
    std::size_t first = 0, second = groups.size();
    for (std::size_t i = 1; i < groups.size(); ++i) {
      if (groups[i].size() > groups[first].size()) first = i;
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i == first) continue;
      if (second == groups.size() || groups[i].size() > groups[second].size()) {
        second = i;
      }
    }
    if (groups[first].empty()) break;
    if (groups[second].empty()) {
      if (groups[first].size() == 1) {
        if (dropped != nullptr) *dropped = 1;
        break;
      }
      throw std::runtime_error(
          "speaker change: cannot pair remaining utterances across speakers "
          "(one speaker holds " +
          std::to_string(groups[first].size()) + " unpaired utterances)");
    }
    const Utterance* a = groups[first].back();
    groups[first].pop_back();
    const Utterance* b = groups[second].back();
    groups[second].pop_back();
    // order within the pair is also randomized
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) std::swap(a, b);
    out.push_back(concat_pair(*a, *b));
  }
  return out;
}

std::vector<Utterance> concat_self_pairs(
    const std::vector<const Utterance*>& testset) {
  std::vector<Utterance> out;
  out.reserve(testset.size());
  for (const Utterance* u : testset) out.push_back(concat_pair(*u, *u));
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");

  json manifest;
  manifest["version"] = 1;
  manifest["seed"] = corpus.seed;
  manifest["embedding_map_seed"] = corpus.embedding_map_seed;
  manifest["config"] = {{"num_speakers", corpus.config.num_speakers},
                        {"utts_per_speaker", corpus.config.utts_per_speaker},
                        {"vocab_size", corpus.config.vocab_size},
                        {"frames_per_label", corpus.config.frames_per_label},
                        {"noise_std", corpus.config.noise_std},
                        {"feature_dim", corpus.config.feature_dim},
                        {"embed_dim", corpus.config.embed_dim},
                        {"min_labels", corpus.config.min_labels},
                        {"max_labels", corpus.config.max_labels},
                        {"bias_range", corpus.config.bias_range}};
  manifest["train_speakers"] = corpus.train_speakers;
  manifest["dev_speakers"] = corpus.dev_speakers;
  manifest["test_speakers"] = corpus.test_speakers;

  json utts = json::array();
  for (const Utterance& u : corpus.utterances) {
    const std::string feature_file = "features/" + u.id + ".txt";
    utts.push_back({{"id", u.id},
                    {"speaker", u.speaker_id},
                    {"split", u.split},
                    {"labels", labels_to_string(u.labels)},
                    {"feature_file", feature_file}});
    std::ostringstream text;
    text << u.features.rows() << " " << u.features.cols() << "\n";
    for (int t = 0; t < u.features.rows(); ++t) {
      for (int f = 0; f < u.features.cols(); ++f) {
        if (f > 0) text << " ";
        text << format_double(u.features.at(t, f));
      }
      text << "\n";
    }
    write_text_file(dir / feature_file, text.str());
  }
  manifest["utterances"] = utts;
  write_text_file(dir / "manifest.json", manifest.dump(2));
}

namespace {

Tensor load_features(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  int t_len = 0, f_dim = 0;
  if (!(in >> t_len >> f_dim) || t_len < 1 || f_dim < 1) {
    throw std::runtime_error(path.string() + ":1: bad feature header");
  }
  Tensor out({t_len, f_dim});
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(in >> out[i])) {
      throw std::runtime_error(path.string() + ": truncated feature data at value " +
                               std::to_string(i));
    }
  }
  double extra;
  if (in >> extra) {
    throw std::runtime_error(path.string() + ": trailing values beyond " +
                             std::to_string(out.size()));
  }
  return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir) {
  const json manifest = json::parse(read_text_file(dir / "manifest.json"));
  if (manifest.at("version").get<int>() != 1) {
    throw std::runtime_error("corpus: unsupported manifest version");
  }
  Corpus corpus;
  const json& c = manifest.at("config");
  corpus.config.num_speakers = c.at("num_speakers").get<int>();
  corpus.config.utts_per_speaker = c.at("utts_per_speaker").get<int>();
  corpus.config.vocab_size = c.at("vocab_size").get<int>();
  corpus.config.frames_per_label = c.at("frames_per_label").get<int>();
  corpus.config.noise_std = c.at("noise_std").get<double>();
  corpus.config.feature_dim = c.at("feature_dim").get<int>();
  corpus.config.embed_dim = c.at("embed_dim").get<int>();
  corpus.config.min_labels = c.at("min_labels").get<int>();
  corpus.config.max_labels = c.at("max_labels").get<int>();
  corpus.config.bias_range = c.at("bias_range").get<double>();
  corpus.config.validate();
  corpus.seed = manifest.at("seed").get<std::uint64_t>();
  corpus.embedding_map_seed = manifest.at("embedding_map_seed").get<std::uint64_t>();
  corpus.train_speakers = manifest.at("train_speakers").get<std::vector<std::string>>();
  corpus.dev_speakers = manifest.at("dev_speakers").get<std::vector<std::string>>();
  corpus.test_speakers = manifest.at("test_speakers").get<std::vector<std::string>>();

  std::set<std::string> seen;
  for (const json& uj : manifest.at("utterances")) {
    Utterance u;
    u.id = uj.at("id").get<std::string>();
    if (!seen.insert(u.id).second) {
      throw std::runtime_error("corpus: duplicate utterance id '" + u.id + "'");
    }
    u.speaker_id = uj.at("speaker").get<std::string>();
    u.split = uj.at("split").get<std::string>();
    u.labels = labels_from_string(uj.at("labels").get<std::string>());
    u.features = load_features(dir / uj.at("feature_file").get<std::string>());
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace memvoice
