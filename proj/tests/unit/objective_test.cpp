/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "kgad/graph.hpp"
#include "kgad/objective.hpp"

namespace kgad {
namespace {

using Vec = Eigen::VectorXd;

Tensor column(std::initializer_list<double> v) {
  Tensor t(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) t(i++, 0) = x;
  return t;
}

Tensor random_column(Index n, Rng& rng, double scale = 2.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor t(n, 1);
  for (Index i = 0; i < n; ++i) t(i, 0) = nd(rng);
  return t;
}

// Plain loop: softmax then sum P ln(P/Q).
double kl_oracle(const Tensor& p_logits, const Tensor& q_logits) {
  auto soft = [](const Tensor& x) {
    std::vector<double> e(static_cast<std::size_t>(x.rows()));
    double mx = x.maxCoeff(), s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) s += e[i] = std::exp(x(i, 0) - mx);
    for (double& v : e) v /= s;
    return e;
  };
  const auto p = soft(p_logits), q = soft(q_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    kl += p[i] * (std::log(p[i] + kKlEpsilon) - std::log(q[i] + kKlEpsilon));
  }
  return kl;
}

TEST(Score, WorkedExample) {
  const TripleScoreParts<double> p{1.0, 2.0, 0.5, 0.5};
  EXPECT_NEAR(triple_score(p, 0.9), 2.75, 1e-15);
  Tape tape;
  const Var s = triple_score(tape.constant(column({1.0})), tape.constant(column({2.0})),
                             tape.constant(column({0.5})), tape.constant(column({0.5})), 0.9);
  EXPECT_NEAR(s.scalar(), 2.75, 1e-15);
}

TEST(Score, AlphaEndpointsAreExact) {
  const TripleScoreParts<double> p{0.3, 1.7, -0.4, 2.2};
  EXPECT_EQ(triple_score(p, 1.0), 0.3 + 1.7);
  EXPECT_EQ(triple_score(p, 0.0), 0.5 * (-0.4 + 2.2));
}

TEST(Score, AffineInAlpha) {
  const TripleScoreParts<double> p{0.3, 1.7, -0.4, 2.2};
  const double a = triple_score(p, 0.0), b = triple_score(p, 1.0);
  for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
    EXPECT_NEAR(triple_score(p, alpha), (1 - alpha) * a + alpha * b, 1e-14);
  }
}

TEST(Score, AlphaOutsideUnitIntervalRejected) {
  Tape tape;
  const Var x = tape.constant(column({1.0}));
  EXPECT_THROW(triple_score(x, x, x, x, 1.5), UsageError);
}

TEST(Margin, WorkedExamples) {
  EXPECT_NEAR(margin_loss(Vec::Constant(3, 0.2), Vec::Constant(3, 1.0), 0.5), 0.0, 1e-15);
  EXPECT_NEAR(margin_loss(Vec::Constant(3, 1.0), Vec::Constant(3, 0.2), 0.5), 1.3, 1e-15);
  const Vec same = Vec::LinSpaced(4, -1.0, 2.0);
  EXPECT_EQ(margin_loss(same, same, 0.0), 0.0);

  Tape tape;
  const Var l = margin_loss(tape.constant(column({0.5, 1.5})), tape.constant(column({0.1, 0.3})), 0.5);
  EXPECT_NEAR(l.scalar(), 1.3, 1e-15);
}

TEST(Margin, UsesBatchMeans) {
  // Individual pairs cross the margin but the means do not.
  Vec pos(2), neg(2);
  pos << 3.0, -3.0;
  neg << 0.0, 1.0;
  EXPECT_NEAR(margin_loss(pos, neg, 0.5), 0.0, 1e-15);
}

TEST(Margin, NonNegativeAndNonIncreasingInNegatives) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor pos = random_column(5, rng);
    Tensor neg = random_column(5, rng);
    double prev = margin_loss(pos, neg, 0.5);
    EXPECT_GE(prev, 0.0);
    for (int step = 0; step < 5; ++step) {
      neg.array() += 0.3;
      const double next = margin_loss(pos, neg, 0.5);
      EXPECT_LE(next, prev);
      prev = next;
    }
  }
}

TEST(Margin, LiteralOrientationSwapsSides) {
  EXPECT_NEAR(margin_loss(Vec::Constant(2, 0.2), Vec::Constant(2, 1.0), 0.5, true), 1.3, 1e-15);
}

TEST(Margin, Errors) {
  EXPECT_THROW(margin_loss(Vec::Zero(2), Vec::Zero(3), 0.5), ShapeError);
  Tape tape;
  EXPECT_THROW(margin_loss(tape.constant(Tensor::Zero(2, 1)), tape.constant(Tensor::Zero(3, 1)), 0.5),
               ShapeError);
  EXPECT_THROW(margin_loss(tape.constant(Tensor::Zero(2, 1)), tape.constant(Tensor::Zero(2, 1)), -1.0),
               UsageError);
}

TEST(Kl, WorkedValues) {
  // Logits log P give back P after the softmax.
  Vec p(2), q(2);
  p << std::log(0.5), std::log(0.5);
  q << std::log(0.9), std::log(0.1);
  const double forward = 0.5 * std::log(5.0 / 9.0) + 0.5 * std::log(5.0);
  EXPECT_NEAR(forward, 0.51083, 1e-5);
  EXPECT_NEAR(kl_divergence(p, q), forward, 1e-10);
  EXPECT_NEAR(kl_divergence(q, p), 0.36806, 1e-5);

  Tape tape;
  const Var v = kl_divergence(tape.constant(p), tape.constant(q));
  EXPECT_NEAR(v.scalar(), 0.51083, 1e-5);
}

TEST(Kl, NonNegativeOnRandomPairs) {
  Rng rng(5);
  std::uniform_int_distribution<int> len(1, 16);
  for (int trial = 0; trial < 10000; ++trial) {
    const Index n = len(rng);
    const Tensor p = random_column(n, rng), q = random_column(n, rng);
    EXPECT_GE(kl_divergence(p, q), -1e-12);
  }
}

TEST(Kl, MatchesLoopOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor p = random_column(7, rng, 3.0), q = random_column(7, rng, 3.0);
    Tape tape;
    EXPECT_NEAR(kl_divergence(tape.constant(p), tape.constant(q)).scalar(), kl_oracle(p, q), 1e-12);
  }
}

TEST(Kl, ZeroOnNearIdenticalInputs) {
  Rng rng(7);
  std::uniform_real_distribution<double> tiny(-1e-12, 1e-12);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tensor p = random_column(8, rng);
    Tensor q = p;
    for (Index i = 0; i < q.rows(); ++i) q(i, 0) += tiny(rng);
    EXPECT_LT(std::abs(kl_divergence(p, q)), 1e-9);
  }
}

TEST(Kl, ShiftInvariantInLogits) {
  Rng rng(8);
  const Tensor p = random_column(6, rng), q = random_column(6, rng);
  EXPECT_NEAR(kl_divergence(p, q), kl_divergence((p.array() + 7.0).matrix(), q), 1e-12);
}

TEST(Kl, Errors) {
  EXPECT_THROW(kl_divergence(Vec::Zero(2), Vec::Zero(3)), ShapeError);
  EXPECT_THROW(kl_divergence(Vec::Zero(0), Vec::Zero(0)), ShapeError);
  Tape tape;
  EXPECT_THROW(kl_divergence(tape.constant(Tensor::Zero(2, 1)), tape.constant(Tensor::Zero(2, 2))),
               ShapeError);
}

ViewScores bind_views(Tape& tape, const std::array<Tensor, 6>& v) {
  return {tape.constant(v[0]), tape.constant(v[1]), tape.constant(v[2]),
          tape.constant(v[3]), tape.constant(v[4]), tape.constant(v[5])};
}

TEST(Consistency, IdenticalViewsGiveZero) {
  Rng rng(9);
  const Tensor x = random_column(8, rng);
  Tape tape;
  const ConsistencyTerms t = consistency_loss(bind_views(tape, {x, x, x, x, x, x}));
  EXPECT_LT(std::abs(t.total.scalar()), 1e-15);
}

TEST(Consistency, TermIsolation) {
  Rng rng(10);
  const Tensor x = random_column(8, rng);
  const Tensor y = random_column(8, rng);
  Tape tape;
  const ConsistencyTerms t = consistency_loss(bind_views(tape, {x, x, x, x, x, y}));
  EXPECT_LT(std::abs(t.score.scalar()), 1e-15);
  EXPECT_LT(std::abs(t.head.scalar()), 1e-15);
  EXPECT_GT(t.tail.scalar(), 1e-6);
  EXPECT_EQ(t.total.scalar(), t.tail.scalar() + t.score.scalar() + t.head.scalar());
}

TEST(Consistency, RandomBatchMatchesThreeTermRecompute) {
  Rng rng(11);
  std::array<Tensor, 6> v;
  for (Tensor& t : v) t = random_column(8, rng);
  Tape tape;
  const ConsistencyTerms t = consistency_loss(bind_views(tape, v));
  const double want = kl_oracle(v[0], v[1]) + kl_oracle(v[2], v[3]) + kl_oracle(v[4], v[5]);
  EXPECT_NEAR(t.total.scalar(), want, 1e-12);
}

TEST(Total, WorkedExampleAndEndpoints) {
  EXPECT_NEAR(total_loss(1.3, 0.5, 0.3), 1.06, 1e-15);
  EXPECT_EQ(total_loss(1.3, 0.5, 0.0), 1.3);
  EXPECT_EQ(total_loss(1.3, 0.5, 1.0), 0.5);
  Tape tape;
  const Var m = tape.constant(Tensor::Constant(1, 1, 1.3));
  const Var c = tape.constant(Tensor::Constant(1, 1, 0.5));
  EXPECT_NEAR(total_loss(m, c, 0.3).scalar(), 1.06, 1e-15);
  EXPECT_THROW(total_loss(m, c, -0.1), UsageError);
}

}  // namespace
}  // namespace kgad
