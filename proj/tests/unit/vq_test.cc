// Copyright (c) 2026 The unifyspeech-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <vector>

#include <gtest/gtest.h>

#include "experiments.h"
#include "grad_suite.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"
#include "unifyspeech/vq.h"

namespace unifyspeech {
namespace {

Tensor Random(Shape shape, Rng& rng) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = rng.Normal();
  return Tensor::FromData(std::move(shape), std::move(v));
}

Codebook MakeBook(ParameterStore& store, std::size_t v, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return Codebook(store, v, d, rng);
}

Tensor Row(const Tensor& m, std::size_t r) {
  const std::size_t d = m.cols();
  return Tensor::FromData({1, d}, std::vector<double>(m.data().begin() + r * d,
                                                      m.data().begin() + (r + 1) * d));
}

TEST(VqLookup, ExactMatchAndUsage) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 4, 1);
  const QuantizedContent q = VqLookup(Row(book.entries(), 3), book, true);
  EXPECT_EQ(q.codes, (std::vector<int>{3}));
  EXPECT_EQ(book.usage()[3], 1);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(q.vectors.at(0, k), book.entries().at(3, k));
  VqLookup(Row(book.entries(), 3), static_cast<const Codebook&>(book));
  EXPECT_EQ(book.usage()[3], 1);
}

TEST(VqLookup, EquidistantPicksLowestIndex) {
  const Tensor entries = Tensor::FromData({3, 2}, {5, 5, 1, 0, -1, 0});
  const Tensor c = Tensor::FromData({1, 2}, {0, 0});
  EXPECT_EQ(NearestCodes(c, entries), (std::vector<int>{1}));
}

TEST(VqLookup, EmptyCodebookIsConfigError) {
  EXPECT_THROW(NearestCodes(Tensor::Zeros({1, 2}), Tensor::Zeros({0, 2})), ConfigError);
  EXPECT_THROW(NearestCodes(Tensor::Zeros({1, 3}), Tensor::Zeros({4, 2})), DimensionError);
}

TEST(VqLookup, ExhaustiveOracleWithTies) {
  const testing::VqOracleResult r = testing::RunVqOracle(1000, 16, 5);
  EXPECT_EQ(r.rows, 1000u);
  EXPECT_GT(r.ties, 0u);
  EXPECT_EQ(r.mismatches, 0u);
}

TEST(VqLookup, IdempotentOnForwardValues) {
  ParameterStore store;
  Codebook book = MakeBook(store, 16, 6, 2);
  Rng rng(3);
  const QuantizedContent q = VqLookup(Random({20, 6}, rng), book, false);
  const QuantizedContent again = VqLookup(q.vectors.Detach(), book, false);
  EXPECT_EQ(q.codes, again.codes);
}

TEST(StraightThrough, ExactPassThrough) {
  EXPECT_EQ(testing::CheckStraightThrough(100, 9), "");
}

TEST(StraightThrough, CodebookGetsNoGradientFromLookup) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 3, 4);
  Rng rng(5);
  Tensor c = Random({5, 3}, rng);
  c.set_requires_grad(true);
  const QuantizedContent q = VqLookup(c, book, false);
  Sum(q.vectors).Backward();
  EXPECT_FALSE(book.entries().has_grad());
  for (double g : c.grad()) EXPECT_EQ(g, 1.0);
}

TEST(PairLoss, HandExpansion) {
  const std::size_t d = 256;
  std::vector<double> e0(2 * d, 0.0), e1(2 * d, 0.0);
  e0[0] = e0[d] = 1.0;
  e1[1] = e1[d + 1] = 1.0;
  QuantizedContent a = IdentityQuantize(Tensor::FromData({2, d}, e0));
  QuantizedContent b = IdentityQuantize(Tensor::FromData({2, d}, e1));
  EXPECT_DOUBLE_EQ(PairLoss(a, b).item(), 0.0078125);
  EXPECT_EQ(PairLoss(a, a).item(), 0.0);
}

TEST(PairLoss, SymmetricAndSingleFrameScaling) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = static_cast<std::size_t>(rng.UniformInt(1, 10));
    Tensor x = Random({t, 4}, rng);
    std::vector<double> yv(x.data().begin(), x.data().end());
    const auto f = static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(t) - 1));
    double sq = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double delta = rng.Normal();
      yv[f * 4 + k] += delta;
      sq += delta * delta;
    }
    QuantizedContent a = IdentityQuantize(x), b = IdentityQuantize(Tensor::FromData({t, 4}, yv));
    EXPECT_NEAR(PairLoss(a, b).item(), sq / static_cast<double>(4 * t), 1e-12);
    EXPECT_EQ(PairLoss(a, b).item(), PairLoss(b, a).item());
  }
}

TEST(PairLoss, LengthMismatchNamesBoth) {
  QuantizedContent a = IdentityQuantize(Tensor::Zeros({3, 2}));
  QuantizedContent b = IdentityQuantize(Tensor::Zeros({5, 2}));
  try {
    PairLoss(a, b);
    FAIL();
  } catch (const PairingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('3'), std::string::npos);
    EXPECT_NE(msg.find('5'), std::string::npos);
  }
}

TEST(PairLoss, GradientReachesBothEncoders) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 3, 7);
  Rng rng(8);
  Tensor cp = Random({4, 3}, rng), cs = Random({4, 3}, rng);
  cp.set_requires_grad(true);
  cs.set_requires_grad(true);
  const QuantizedContent qp = VqLookup(cp, book, false), qs = VqLookup(cs, book, false);
  PairLoss(qp, qs).Backward();
  bool p_nonzero = false, s_nonzero = false;
  for (std::size_t i = 0; i < cp.size(); ++i) {
    p_nonzero = p_nonzero || cp.grad()[i] != 0.0;
    s_nonzero = s_nonzero || cs.grad()[i] != 0.0;
    EXPECT_EQ(cp.grad()[i], -cs.grad()[i]);
  }
  EXPECT_TRUE(p_nonzero && s_nonzero);
}

TEST(VqAuxLoss, ZeroWhenOnEntries) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 3, 9);
  const std::vector<int> idx{1, 4, 4};
  const QuantizedContent q = VqLookup(GatherRows(book.entries(), idx).Detach(), book, false);
  EXPECT_EQ(VqAuxLoss(q, 0.25).item(), 0.0);
  EXPECT_EQ(VqAuxLoss(IdentityQuantize(Tensor::Zeros({2, 3})), 0.25).item(), 0.0);
}

TEST(VqAuxLoss, TwoTermsWithFrozenCopies) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 3, 10);
  Rng rng(11);
  Tensor c = Random({6, 3}, rng);
  c.set_requires_grad(true);
  const QuantizedContent q = VqLookup(c, book, false);
  const Tensor e = GatherRows(book.entries(), q.codes).Detach();
  double codebook = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = c.data()[i] - e.data()[i];
    codebook += d * d;
  }
  codebook /= static_cast<double>(c.size());
  const Tensor loss = VqAuxLoss(q, 0.25);
  EXPECT_NEAR(loss.item(), 1.25 * codebook, 1e-12);

  loss.Backward();
  ASSERT_TRUE(book.entries().has_grad());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double diff = c.data()[i] - e.data()[i];
    EXPECT_NEAR(c.grad()[i], 0.25 * 2.0 * diff / static_cast<double>(c.size()), 1e-12);
  }
}

TEST(VqAuxLoss, BetaZeroLeavesEncoderAlone) {
  ParameterStore store;
  Codebook book = MakeBook(store, 8, 3, 12);
  Rng rng(13);
  Tensor c = Random({6, 3}, rng);
  c.set_requires_grad(true);
  const QuantizedContent q = VqLookup(c, book, false);
  VqAuxLoss(q, 0.0).Backward();
  if (c.has_grad()) {
    for (double g : c.grad()) EXPECT_EQ(g, 0.0);
  }
  // Only selected entries receive gradient.
  std::vector<bool> selected(8, false);
  for (int code : q.codes) selected[static_cast<std::size_t>(code)] = true;
  for (std::size_t j = 0; j < 8; ++j) {
    bool any = false;
    for (std::size_t k = 0; k < 3; ++k) any = any || book.entries().grad()[j * 3 + k] != 0.0;
    EXPECT_EQ(any, selected[j]) << j;
  }
}

TEST(Codebook, InitializeFromRowsAndFallback) {
  ParameterStore store;
  Codebook book = MakeBook(store, 4, 2, 14);
  Rng rng(15);
  const Tensor rows = Random({10, 2}, rng);
  EXPECT_TRUE(book.InitializeFromRows(rows, rng));
  for (std::size_t j = 0; j < 4; ++j) {
    bool found = false;
    for (std::size_t r = 0; r < 10; ++r) {
      found = found || (rows.at(r, 0) == book.entries().at(j, 0) &&
                        rows.at(r, 1) == book.entries().at(j, 1));
    }
    EXPECT_TRUE(found);
  }
  EXPECT_FALSE(book.InitializeFromRows(Random({3, 2}, rng), rng));
}

TEST(Codebook, DeadEntriesAreReseeded) {
  ParameterStore store;
  Codebook book = MakeBook(store, 3, 2, 16);
  Rng rng(17);
  const Tensor recent = Tensor::FromData({1, 2}, {7, 8});
  const std::vector<bool> used{true, false, false};
  for (int step = 0; step < 4; ++step) EXPECT_TRUE(book.EndStep(used, recent, 5, rng).empty());
  EXPECT_EQ(book.idle_steps()[1], 4);
  EXPECT_EQ(book.idle_steps()[0], 0);
  const std::vector<std::size_t> reseeded = book.EndStep(used, recent, 5, rng);
  EXPECT_EQ(reseeded, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(book.entries().at(1, 0), 7.0);
  EXPECT_EQ(book.entries().at(2, 1), 8.0);
  EXPECT_EQ(book.idle_steps()[1], 0);
}

}  // namespace
}  // namespace unifyspeech
