// tests/test_ctc.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "memvoice/ctc.h"
#include "memvoice/gradcheck.h"
#include "test_util.h"

using namespace memvoice;
using test::make_rng;
using test::random_tensor;

namespace {

// Row-wise softmax done independently of the implementation under test.
Tensor naive_softmax_rows(const Tensor& logits) {
  Tensor p(logits.shape());
  for (int t = 0; t < logits.rows(); ++t) {
    double z = 0.0;
    for (int v = 0; v < logits.cols(); ++v) z += std::exp(logits.at(t, v));
    for (int v = 0; v < logits.cols(); ++v)
      p.at(t, v) = std::exp(logits.at(t, v)) / z;
  }
  return p;
}

}  // namespace

TEST_CASE("label augmentation") {
  CHECK(augment_labels({2}) == std::vector<int>{0, 2, 0});
  CHECK(augment_labels({2, 3}) == std::vector<int>{0, 2, 0, 3, 0});
  CHECK(augment_labels({2, 2}) == std::vector<int>{0, 2, 0, 2, 0});
  CHECK_THROWS_AS(augment_labels({}), std::invalid_argument);
  CHECK_THROWS_AS(augment_labels({1, 0}), std::invalid_argument);
}

TEST_CASE("minimum frame counts") {
  CHECK(min_frames_for({2}) == 1);
  CHECK(min_frames_for({2, 3}) == 2);
  CHECK(min_frames_for({2, 2}) == 3);
  CHECK(min_frames_for({2, 2, 2}) == 5);
}

TEST_CASE("single-frame single-label loss is -log p") {
  auto rng = make_rng(41);
  Tensor logits = random_tensor({1, 3}, rng, -2.0, 2.0);
  Tensor p = naive_softmax_rows(logits);
  CtcResult res = ctc_loss(logits, {1});
  CHECK(res.loss == doctest::Approx(-std::log(p.at(0, 1))).epsilon(1e-12));
}

TEST_CASE("two-frame single-label enumerates three alignments") {
  auto rng = make_rng(43);
  Tensor logits = random_tensor({2, 3}, rng, -2.0, 2.0);
  Tensor p = naive_softmax_rows(logits);
  const double expect = p.at(0, 0) * p.at(1, 2) + p.at(0, 2) * p.at(1, 0) +
                        p.at(0, 2) * p.at(1, 2);
  CtcResult res = ctc_loss(logits, {2});
  CHECK(res.loss == doctest::Approx(-std::log(expect)).epsilon(1e-12));
}

TEST_CASE("uniform logits V=2 T=2 y=[a] gives -log(3/4)") {
  Tensor logits({2, 2});
  CtcResult res = ctc_loss(logits, {1});
  CHECK(res.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-13));
  CHECK(ctc_loss_bruteforce(logits, {1}) ==
        doctest::Approx(-std::log(0.75)).epsilon(1e-13));
}

TEST_CASE("repeated label forces a separating frame") {
  auto rng = make_rng(47);
  SUBCASE("T below the minimum is infeasible") {
    Tensor logits = random_tensor({2, 3}, rng);
    CHECK_THROWS_AS(ctc_loss(logits, {1, 1}), CtcInfeasible);
    CHECK(std::isinf(ctc_loss_bruteforce(logits, {1, 1})));
  }
  SUBCASE("T at the minimum has exactly one path") {
    Tensor logits = random_tensor({3, 3}, rng);
    Tensor p = naive_softmax_rows(logits);
    const double expect = p.at(0, 1) * p.at(1, 0) * p.at(2, 1);
    CtcResult res = ctc_loss(logits, {1, 1});
    CHECK(res.loss == doctest::Approx(-std::log(expect)).epsilon(1e-12));
  }
}

TEST_CASE("forward-backward agrees with brute force on random instances") {
  auto rng = make_rng(53);
  std::uniform_int_distribution<int> t_dist(1, 6), u_dist(1, 3), v_dist(2, 4);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int t_len = t_dist(rng);
    const int vocab = v_dist(rng);
    const int u_len = u_dist(rng);
    std::uniform_int_distribution<int> lab(1, vocab - 1);
    std::vector<int> y(u_len);
    for (int& v : y) v = lab(rng);
    if (min_frames_for(y) > t_len) continue;
    Tensor logits = random_tensor({t_len, vocab}, rng, -3.0, 3.0);
    const double expect = ctc_loss_bruteforce(logits, y);
    CtcResult res = ctc_loss(logits, y);
    CHECK(std::fabs(res.loss - expect) <= 1e-9);
    ++checked;
  }
  CHECK(checked >= 200);
}

TEST_CASE("posterior sum at any frame recovers the sequence probability") {
  SUBCASE("hand case T=1") {
    auto rng = make_rng(59);
    Tensor logits = random_tensor({1, 3}, rng);
    Tensor p = naive_softmax_rows(logits);
    CtcLattice lat = ctc_lattice(logits, {2});
    CHECK(posterior_sum(lat, 1) == doctest::Approx(p.at(0, 2)).epsilon(1e-12));
  }

  SUBCASE("random instances are frame-invariant") {
    auto rng = make_rng(61);
    std::uniform_int_distribution<int> t_dist(2, 6), u_dist(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
      const int t_len = t_dist(rng);
      std::uniform_int_distribution<int> lab(1, 3);
      std::vector<int> y(u_dist(rng));
      for (int& v : y) v = lab(rng);
      if (min_frames_for(y) > t_len) continue;
      Tensor logits = random_tensor({t_len, 4}, rng, -3.0, 3.0);
      CtcLattice lat = ctc_lattice(logits, y);
      const double p = std::exp(lat.log_prob);
      for (int t = 1; t <= t_len; ++t) {
        CHECK(posterior_sum(lat, t) == doctest::Approx(p).epsilon(1e-10));
      }
    }
  }

  SUBCASE("t outside 1..T is rejected") {
    Tensor logits({2, 2});
    CtcLattice lat = ctc_lattice(logits, {1});
    CHECK_THROWS_AS(posterior_sum(lat, 0), std::out_of_range);
    CHECK_THROWS_AS(posterior_sum(lat, 3), std::out_of_range);
  }
}

TEST_CASE("per-frame gradient rows sum to zero") {
  auto rng = make_rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits = random_tensor({5, 4}, rng, -2.0, 2.0);
    CtcResult res = ctc_loss(logits, {1, 3, 2});
    for (int t = 0; t < 5; ++t) {
      double row_sum = 0.0;
      for (int v = 0; v < 4; ++v) row_sum += res.grad_logits.at(t, v);
      CHECK(std::fabs(row_sum) <= 1e-10);
    }
  }
}

TEST_CASE("ctc gradient passes the gradient gate") {
  auto rng = make_rng(71);
  Parameter logits("logits", random_tensor({5, 4}, rng, -1.0, 1.0));
  std::vector<Parameter*> params{&logits};
  const std::vector<int> y{2, 1, 1};
  auto loss = [&](bool with_grad) {
    Tape tape;
    Var l = ctc_loss_op(tape, tape.param(logits), y);
    const double out = tape.val(l)[0];
    if (with_grad) tape.backward(l);
    return out;
  };
  auto report = check_gradient(loss, params, 1e-5);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("bruteforce refuses oversized instances") {
  CHECK_THROWS_AS(ctc_loss_bruteforce(Tensor({9, 2}), {1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ctc_loss_bruteforce(Tensor({2, 5}), {1}),
                  std::invalid_argument);
}

TEST_CASE("labels outside the vocabulary are rejected") {
  Tensor logits({3, 4});
  CHECK_THROWS_AS(ctc_loss(logits, {4}), std::invalid_argument);
  CHECK_THROWS_AS(ctc_loss(logits, {-1}), std::invalid_argument);
}
