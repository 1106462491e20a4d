// tests/test_encoder.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "memvoice/encoder.h"
#include "memvoice/gradcheck.h"
#include "test_util.h"

using namespace memvoice;
using test::make_rng;
using test::random_tensor;

namespace {

EncoderConfig toy_config(Adaptation adaptation, int insertion = 1) {
  EncoderConfig c;
  c.num_layers = 2;
  c.insertion_layer = insertion;
  c.hidden = 5;
  c.feature_dim = 3;
  c.adaptation = adaptation;
  return c;
}

SpeakerMemory toy_memory(int d, int n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Tensor m = random_tensor({d, n}, rng, -1.0, 1.0);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("spk" + std::to_string(i));
  return SpeakerMemory(std::move(m), std::move(ids));
}

std::size_t param_count(std::vector<Parameter*> ps) {
  std::size_t total = 0;
  for (Parameter* p : ps) total += p->value.size();
  return total;
}

}  // namespace

TEST_CASE("single-speaker memory equals the external path on shared params") {
  auto rng = make_rng(201);
  SpeakerMemory mem = toy_memory(4, 1, 202);
  EncoderParams params = EncoderParams::init(toy_config(Adaptation::kMemory), 4, rng);
  Tensor features = random_tensor({3, 3}, rng);

  EncodedSequence adapted = encode_adapted(features, mem, {}, params);
  CHECK(adapted.has_weights);
  for (int t = 0; t < 3; ++t) CHECK(adapted.per_frame_weights.at(t, 0) == 1.0);

  params.config.adaptation = Adaptation::kExternal;
  EncodedSequence ext = encode_external(features, mem.column(0), params);
  params.config.adaptation = Adaptation::kMemory;

  REQUIRE(adapted.hidden.same_shape(ext.hidden));
  for (std::size_t i = 0; i < adapted.hidden.size(); ++i) {
    CHECK(std::fabs(adapted.hidden[i] - ext.hidden[i]) <= 1e-12);
  }
}

TEST_CASE("insertion at layer zero queries the raw features") {
  auto rng = make_rng(203);
  SpeakerMemory mem = toy_memory(4, 3, 204);
  EncoderParams params = EncoderParams::init(toy_config(Adaptation::kMemory, 0), 4, rng);
  Tensor features = random_tensor({2, 3}, rng);

  EncodedSequence out = encode_adapted(features, mem, {}, params);
  REQUIRE(out.has_weights);
  for (int t = 0; t < 2; ++t) {
    Tensor q({4});
    for (int d = 0; d < 4; ++d) {
      double acc = params.query_b.value[d];
      for (int f = 0; f < 3; ++f) acc += params.query_w.value.at(d, f) * features.at(t, f);
      q[d] = acc;
    }
    Tensor expect = read_weights(q, mem, {});
    for (int n = 0; n < 3; ++n) {
      CHECK(out.per_frame_weights.at(t, n) ==
            doctest::Approx(expect[n]).epsilon(1e-13));
    }
  }
}

TEST_CASE("per-frame weights react to frame content") {
  auto rng = make_rng(207);
  SpeakerMemory mem = toy_memory(4, 3, 208);
  EncoderParams params = EncoderParams::init(toy_config(Adaptation::kMemory), 4, rng);

  SUBCASE("distinct frames give distinct weights") {
    Tensor features({2, 3}, {1.0, -0.5, 0.3, -1.2, 0.8, 0.0});
    EncodedSequence out = encode_adapted(features, mem, {}, params);
    bool any_differ = false;
    for (int n = 0; n < 3; ++n) {
      if (out.per_frame_weights.at(0, n) != out.per_frame_weights.at(1, n)) {
        any_differ = true;
      }
    }
    CHECK(any_differ);
  }

  SUBCASE("identical frames at the read point give bitwise identical weights") {
    // insertion at layer 0 keeps Enc1 the identity, so equal input frames
    // reach the read head unchanged
    auto rng0 = make_rng(209);
    EncoderParams params0 =
        EncoderParams::init(toy_config(Adaptation::kMemory, 0), 4, rng0);
    Tensor features({3, 3});
    for (int t = 0; t < 3; ++t) {
      features.at(t, 0) = 0.7;
      features.at(t, 1) = -0.2;
      features.at(t, 2) = 0.1;
    }
    EncodedSequence out = encode_adapted(features, mem, {}, params0);
    for (int n = 0; n < 3; ++n) {
      CHECK(out.per_frame_weights.at(0, n) == out.per_frame_weights.at(1, n));
      CHECK(out.per_frame_weights.at(0, n) == out.per_frame_weights.at(2, n));
    }
  }

  SUBCASE("weight rows are simplex points") {
    Tensor features = random_tensor({4, 3}, rng);
    EncodedSequence out = encode_adapted(features, mem, {}, params);
    for (int t = 0; t < 4; ++t) {
      double sum = 0.0;
      for (int n = 0; n < 3; ++n) sum += out.per_frame_weights.at(t, n);
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("baseline encoder") {
  auto rng = make_rng(211);

  SUBCASE("L=1 T=1 equals a single layer application") {
    EncoderConfig cfg = toy_config(Adaptation::kNone);
    cfg.num_layers = 1;
    EncoderParams params = EncoderParams::init(cfg, 0, rng);
    Tensor features = random_tensor({1, 3}, rng);
    EncodedSequence out = encode_baseline(features, params);
    CHECK_FALSE(out.has_weights);

    Tape tape;
    Var direct = encoder_layer(tape, params.layers[0], tape.leaf(features));
    for (std::size_t i = 0; i < out.hidden.size(); ++i) {
      CHECK(out.hidden[i] == tape.val(direct)[i]);
    }
  }

  SUBCASE("baseline rejects embedding sources") {
    EncoderParams params = EncoderParams::init(toy_config(Adaptation::kNone), 0, rng);
    SpeakerMemory mem = toy_memory(4, 2, 212);
    Tensor features = random_tensor({2, 3}, rng);
    Tape tape;
    Var f = tape.leaf(features);
    CHECK_THROWS_AS(encode_on_tape(tape, params, f, &mem, {}, nullptr),
                    std::invalid_argument);
  }
}

TEST_CASE("external embedding path") {
  auto rng = make_rng(213);
  EncoderParams params = EncoderParams::init(toy_config(Adaptation::kExternal), 4, rng);
  Tensor features = random_tensor({3, 3}, rng);

  SUBCASE("zero embedding is accepted") {
    EncodedSequence out = encode_external(features, Tensor({4}), params);
    CHECK(out.hidden.rows() == 3);
    CHECK(out.hidden.cols() == 5);
    CHECK_FALSE(out.has_weights);
  }

  SUBCASE("different embeddings change the output") {
    auto rng2 = make_rng(214);
    Tensor e1 = random_tensor({4}, rng2), e2 = random_tensor({4}, rng2);
    EncodedSequence o1 = encode_external(features, e1, params);
    EncodedSequence o2 = encode_external(features, e2, params);
    bool differ = false;
    for (std::size_t i = 0; i < o1.hidden.size(); ++i) {
      if (o1.hidden[i] != o2.hidden[i]) differ = true;
    }
    CHECK(differ);
  }

  SUBCASE("wrong embedding width is rejected") {
    CHECK_THROWS_AS(encode_external(features, Tensor({3}), params),
                    std::invalid_argument);
  }
}

TEST_CASE("parameter bookkeeping across variants") {
  auto rng = make_rng(217);
  const int d = 4;
  EncoderConfig base = toy_config(Adaptation::kNone);
  EncoderConfig with_mem = toy_config(Adaptation::kMemory);
  EncoderConfig with_ext = toy_config(Adaptation::kExternal);

  EncoderParams p_none = EncoderParams::init(base, 0, rng);
  EncoderParams p_mem = EncoderParams::init(with_mem, d, rng);
  EncoderParams p_ext = EncoderParams::init(with_ext, d, rng);

  const std::size_t h_in = 5;  // insertion after layer 1 reads hidden width
  const std::size_t query = d * h_in + d;
  const std::size_t concat = h_in * (h_in + d) + h_in;

  CHECK(param_count(p_mem.params()) - param_count(p_ext.params()) == query);
  CHECK(param_count(p_ext.params()) - param_count(p_none.params()) == concat);
}

TEST_CASE("gradients reach the query projection") {
  auto rng = make_rng(219);
  SpeakerMemory mem = toy_memory(4, 3, 220);
  EncoderParams params = EncoderParams::init(toy_config(Adaptation::kMemory), 4, rng);
  Tensor features = random_tensor({3, 3}, rng);

  for (Parameter* p : params.params()) p->reset_grad();
  Tape tape;
  EncodeResult r = encode_on_tape(tape, params, tape.leaf(features), &mem, {},
                                  nullptr);
  Var loss = vsum(mul(r.output, r.output));
  tape.backward(loss);
  double grad_norm = 0.0;
  for (std::size_t i = 0; i < params.query_w.grad.size(); ++i) {
    grad_norm += std::fabs(params.query_w.grad[i]);
  }
  CHECK(grad_norm > 1e-8);
}

TEST_CASE("every encoder variant passes the gradient gate") {
  auto rng = make_rng(223);
  SpeakerMemory mem = toy_memory(3, 2, 224);
  Tensor embedding = random_tensor({3}, rng);

  for (Adaptation a : {Adaptation::kNone, Adaptation::kMemory,
                       Adaptation::kExternal}) {
    for (int insertion : {0, 1, 2}) {
      EncoderConfig cfg = toy_config(a, insertion);
      cfg.hidden = 4;
      EncoderParams params = EncoderParams::init(cfg, a == Adaptation::kNone ? 0 : 3,
                                                 rng);
      Parameter feat("features", random_tensor({2, 3}, rng));
      std::vector<Parameter*> all = params.params();
      all.push_back(&feat);
      auto loss = [&](bool with_grad) {
        Tape tape;
        EncodeResult r = encode_on_tape(
            tape, params, tape.param(feat),
            a == Adaptation::kMemory ? &mem : nullptr, {},
            a == Adaptation::kExternal ? &embedding : nullptr);
        Var l = vsum(mul(r.output, r.output));
        const double out = tape.val(l)[0];
        if (with_grad) tape.backward(l);
        return out;
      };
      auto report = check_gradient(loss, all, 1e-5);
      CHECK(report.max_rel_error <= 1e-4);
    }
  }
}
