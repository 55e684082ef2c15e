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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "grad_suite.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/grad_check.h"
#include "unifyspeech/ops.h"
#include "unifyspeech/rng.h"

namespace unifyspeech {
namespace {

Tensor Random(Shape shape, Rng& rng) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = rng.Normal();
  return Tensor::FromData(std::move(shape), std::move(v));
}

void ExpectData(const Tensor& t, const std::vector<double>& expected, double tol = 0.0) {
  ASSERT_EQ(t.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(t.data()[i], expected[i], tol) << i;
}

TEST(MatMul, HandExpandedProduct) {
  Tensor a = Tensor::FromData({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::FromData({2, 2}, {5, 6, 7, 8});
  ExpectData(MatMul(a, b), {19, 22, 43, 50});
}

TEST(MatMul, IdentityAndZero) {
  Rng rng(1);
  Tensor b = Random({2, 4}, rng);
  ExpectData(MatMul(Tensor::FromData({2, 2}, {1, 0, 0, 1}), b),
             std::vector<double>(b.data().begin(), b.data().end()));
  ExpectData(MatMul(Tensor::Zeros({2, 3}), Random({3, 4}, rng)), std::vector<double>(8, 0.0));
}

TEST(MatMul, ShapeMismatchNamesBothShapes) {
  try {
    MatMul(Tensor::Zeros({2, 3}), Tensor::Zeros({4, 2}));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("[4x2]"), std::string::npos) << e.what();
  }
}

TEST(Conv1d, MatchesSlidingWindowOracle) {
  Rng rng(2);
  const std::size_t t = 4, cin = 2, cout = 3, k = 3;
  Tensor x = Random({t, cin}, rng), w = Random({k, cin, cout}, rng);
  Tensor y = Conv1d(x, w);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t o = 0; o < cout; ++o) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const long src = static_cast<long>(i + j) - 1;
        if (src < 0 || src >= static_cast<long>(t)) continue;
        for (std::size_t c = 0; c < cin; ++c) {
          s += x.at(static_cast<std::size_t>(src), c) * w.data()[(j * cin + c) * cout + o];
        }
      }
      EXPECT_NEAR(y.at(i, o), s, 1e-12);
    }
  }
}

TEST(Conv1d, IdentityKernelAndZeroInput) {
  Rng rng(3);
  Tensor x = Random({5, 2}, rng);
  Tensor eye = Tensor::FromData({1, 2, 2}, {1, 0, 0, 1});
  ExpectData(Conv1d(x, eye), std::vector<double>(x.data().begin(), x.data().end()));
  ExpectData(Conv1d(Tensor::Zeros({5, 2}), Random({3, 2, 4}, rng)), std::vector<double>(20, 0.0));
}

TEST(Conv1d, EvenKernelIsConfigError) {
  EXPECT_THROW(Conv1d(Tensor::Zeros({4, 1}), Tensor::Zeros({2, 1, 1})), ConfigError);
}

TEST(LayerNorm, ConstantRowIsZero) {
  Tensor y = LayerNorm(Tensor::Full({1, 4}, 3.0), Tensor::Full({4}, 1.0), Tensor::Zeros({4}));
  ExpectData(y, {0, 0, 0, 0});
}

TEST(LayerNorm, NormalizedRowUnchanged) {
  Tensor y = LayerNorm(Tensor::FromData({1, 2}, {1, -1}), Tensor::Full({2}, 1.0), Tensor::Zeros({2}),
                       1e-300);
  ExpectData(y, {1, -1}, 1e-12);
}

TEST(LayerNorm, MatchesTwoPassOracleAndMoments) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(rng.UniformInt(0, 10));
    Tensor x = Random({3, d}, rng), g = Random({d}, rng), b = Random({d}, rng);
    Tensor y = LayerNorm(x, g, b, 1e-5);
    Tensor plain = LayerNorm(x, Tensor::Full({d}, 1.0), Tensor::Zeros({d}), 1e-12);
    for (std::size_t r = 0; r < 3; ++r) {
      double mean = 0.0, var = 0.0, pm = 0.0, pv = 0.0;
      for (std::size_t c = 0; c < d; ++c) mean += x.at(r, c);
      mean /= static_cast<double>(d);
      for (std::size_t c = 0; c < d; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
      var /= static_cast<double>(d);
      for (std::size_t c = 0; c < d; ++c) {
        const double expected = g.at(c) * (x.at(r, c) - mean) / std::sqrt(var + 1e-5) + b.at(c);
        EXPECT_NEAR(y.at(r, c), expected, 1e-12);
        pm += plain.at(r, c);
      }
      pm /= static_cast<double>(d);
      for (std::size_t c = 0; c < d; ++c) pv += (plain.at(r, c) - pm) * (plain.at(r, c) - pm);
      pv /= static_cast<double>(d);
      EXPECT_LT(std::abs(pm), 1e-10);
      EXPECT_NEAR(pv, 1.0, 1e-6);
    }
  }
}

TEST(SoftmaxCrossEntropy, UniformLogitsGiveLogK) {
  const std::vector<int> targets{0, 5, 31};
  Tensor loss = SoftmaxCrossEntropy(Tensor::Full({3, 32}, 0.7), targets);
  EXPECT_NEAR(loss.item(), std::log(32.0), 1e-12);
}

TEST(SoftmaxCrossEntropy, SaturatedTargetNearZero) {
  std::vector<double> v(4, 0.0);
  v[2] = 1000.0;
  const std::vector<int> targets{2};
  EXPECT_NEAR(SoftmaxCrossEntropy(Tensor::FromData({1, 4}, v), targets).item(), 0.0, 1e-12);
}

TEST(SoftmaxCrossEntropy, MatchesDirectFormula) {
  Rng rng(5);
  Tensor logits = Random({3, 5}, rng);
  const std::vector<int> targets{1, 4, 0};
  double expected = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < 5; ++c) z += std::exp(logits.at(r, c));
    expected -= std::log(std::exp(logits.at(r, static_cast<std::size_t>(targets[r]))) / z);
  }
  EXPECT_NEAR(SoftmaxCrossEntropy(logits, targets).item(), expected / 3.0, 1e-12);
}

TEST(SoftmaxCrossEntropy, NonNegativeAndRangeChecked) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const std::vector<int> targets{static_cast<int>(rng.UniformInt(0, 6))};
    EXPECT_GE(SoftmaxCrossEntropy(Scale(Random({1, 7}, rng), 30.0), targets).item(), 0.0);
  }
  const std::vector<int> bad{7};
  EXPECT_THROW(SoftmaxCrossEntropy(Tensor::Zeros({1, 7}), bad), IndexError);
}

TEST(Mse, HandValues) {
  EXPECT_EQ(Mse(Tensor::FromData({2}, {0, 0}), Tensor::FromData({2}, {3, 4})).item(), 12.5);
  EXPECT_EQ(Mse(Tensor::Scalar(1.0), Tensor::Scalar(-1.0)).item(), 4.0);
  Tensor a = Tensor::FromData({3}, {1, 2, 3});
  EXPECT_EQ(Mse(a, a).item(), 0.0);
  EXPECT_THROW(Mse(Tensor::Zeros({2}), Tensor::Zeros({3})), DimensionError);
}

TEST(Dropout, RateZeroAndEvalAreIdentity) {
  Rng rng(7);
  Tensor x = Random({4, 4}, rng);
  Rng a(1), b(1);
  EXPECT_TRUE(Dropout(x, 0.0, a, true).SameStorage(x) ||
              Mse(Dropout(x, 0.0, a, true), x).item() == 0.0);
  EXPECT_EQ(Mse(Dropout(x, 0.9, b, false), x).item(), 0.0);
}

TEST(Dropout, SameRngStateSameMask) {
  Rng rng(8);
  Tensor x = Random({8, 8}, rng);
  Rng a(42), b(42);
  Tensor ya = Dropout(x, 0.5, a, true), yb = Dropout(x, 0.5, b, true);
  ExpectData(ya, std::vector<double>(yb.data().begin(), yb.data().end()));
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ya.data()[i] == 0.0) {
      ++zeros;
    } else {
      EXPECT_DOUBLE_EQ(ya.data()[i], 2.0 * x.data()[i]);
    }
  }
  EXPECT_GT(zeros, 10u);
  EXPECT_LT(zeros, 54u);
}

TEST(Dropout, RateOneIsConfigError) {
  Rng rng(1);
  EXPECT_THROW(Dropout(Tensor::Zeros({2}), 1.0, rng, true), ConfigError);
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::FromData({3}, {1, 2, 3}, true);
  Sum(x).Backward();
  ExpectData(Tensor::FromData({3}, std::vector<double>(x.grad().begin(), x.grad().end())), {1, 1, 1});
}

TEST(Backward, MseOfSingleElement) {
  Tensor x = Tensor::FromData({1}, {2}, true);
  Mse(x, Tensor::Zeros({1})).Backward();
  EXPECT_EQ(x.grad()[0], 4.0);
}

TEST(Backward, AccumulatesAndIsDeterministic) {
  Rng rng(9);
  Tensor w = Random({4, 3}, rng);
  w.set_requires_grad(true);
  Tensor x = Random({2, 4}, rng);
  auto loss = [&] { return Sum(Relu(LayerNorm(MatMul(x, w), Tensor::Full({3}, 1.0), Tensor::Zeros({3})))); };
  loss().Backward();
  const std::vector<double> first(w.grad().begin(), w.grad().end());
  loss().Backward();
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(w.grad()[i], 2.0 * first[i]);
  w.ZeroGrad();
  loss().Backward();
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(w.grad()[i], first[i]);
}

TEST(Backward, NonScalarIsContractError) {
  Tensor x = Tensor::FromData({2}, {1, 2}, true);
  EXPECT_THROW(Scale(x, 2.0).Backward(), ContractError);
}

TEST(GradCheck, ExactQuadratic) {
  Rng rng(10);
  Tensor x = Random({3, 3}, rng);
  const GradCheckResult r = GradCheck([](const Tensor& t) { return Sum(Mul(t, t)); }, x);
  EXPECT_LT(r.max_relative_error, 1e-7);
}

TEST(GradCheck, MatMulLayerNormChain) {
  Rng rng(11);
  Tensor w = Random({4, 5}, rng), g = Random({5}, rng), b = Random({5}, rng);
  Tensor x = Random({3, 4}, rng);
  const GradCheckResult r = GradCheck(
      [&](const Tensor& t) { return Sum(Mul(LayerNorm(MatMul(t, w), g, b), LayerNorm(MatMul(t, w), g, b))); },
      x);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(GradCheck, StraightThroughIsSkipped) {
  Rng rng(12);
  Tensor q = Random({2, 2}, rng);
  const GradCheckResult r =
      GradCheck([&](const Tensor& t) { return Sum(StraightThrough(t, q)); }, Random({2, 2}, rng));
  EXPECT_TRUE(r.skipped);
}

TEST(GradientSuite, EveryOpSmallSample) {
  for (const testing::OpGradResult& r : testing::RunGradientSuite(10, 77)) {
    EXPECT_EQ(r.cases, 10) << r.op;
    EXPECT_LT(r.worst_error, 1e-4) << r.op;
  }
}

TEST(GradientSuite, StraightThroughPassThrough) {
  EXPECT_EQ(testing::CheckStraightThrough(50, 3), "");
}

TEST(Rng, NamedStreamsAreReproducibleAndDistinct) {
  Rng a(5, StreamId("x")), b(5, StreamId("x")), c(5, StreamId("y"));
  for (int i = 0; i < 10; ++i) {
    const auto va = a(), vb = b(), vc = c();
    EXPECT_EQ(va, vb);
    EXPECT_NE(va, vc);
  }
  Rng f1 = Rng(1).Fork("k"), f2 = Rng(1).Fork("k");
  EXPECT_EQ(f1.Normal(), f2.Normal());
}

}  // namespace
}  // namespace unifyspeech
