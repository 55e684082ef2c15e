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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "unifyspeech/adam.h"
#include "unifyspeech/errors.h"

namespace unifyspeech {
namespace {

TEST(AdamStep, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> g{0.0, 0.0};
  AdamSlot slot;
  AdamStep(p, g, slot, AdamOptions{});
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -2.0);
  EXPECT_EQ(slot.step, 1);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  std::vector<double> p{0.5};
  const std::vector<double> g{1.0};
  AdamSlot slot;
  AdamStep(p, g, slot, AdamOptions{});
  EXPECT_NEAR(p[0], 0.5 - 0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(AdamStep, TwoStepsMatchHandTrace) {
  std::vector<double> p{0.0};
  AdamSlot slot;
  const AdamOptions o;
  const double g1 = 0.3, g2 = -0.7;
  AdamStep(p, std::vector<double>{g1}, slot, o);
  AdamStep(p, std::vector<double>{g2}, slot, o);
  double m = 0.0, v = 0.0, x = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? g1 : g2;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    x -= 0.001 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(p[0], x, 1e-15);
  EXPECT_GE(slot.v[0], 0.0);
}

TEST(AdamStep, ZeroLearningRateIsIdentity) {
  std::vector<double> p{1.5, 2.5, -3.0};
  AdamSlot slot;
  AdamOptions o;
  o.lr = 0.0;
  for (int i = 0; i < 5; ++i) AdamStep(p, std::vector<double>{1.0, -4.0, 0.1}, slot, o);
  EXPECT_EQ(p, (std::vector<double>{1.5, 2.5, -3.0}));
}

TEST(AdamStep, RowSparseSkipsUntouchedRows) {
  std::vector<double> p{1, 1, 2, 2};
  AdamSlot slot;
  AdamStep(p, std::vector<double>{0, 0, 1, 1}, slot, AdamOptions{}, 2);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_LT(p[2], 2.0);
  EXPECT_EQ(slot.m[0], 0.0);
}

TEST(Adam, NonFiniteGradientNamesParameterAndChangesNothing) {
  Tensor a = Tensor::FromData({2}, {1, 2}, true);
  Tensor b = Tensor::FromData({1}, {3}, true);
  a.mutable_grad()[0] = 1.0;
  b.mutable_grad()[0] = std::numeric_limits<double>::quiet_NaN();
  Adam adam({{"alpha", a, false}, {"beta", b, false}}, AdamOptions{});
  try {
    adam.Step();
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  EXPECT_EQ(a.data()[0], 1.0);
}

TEST(Adam, SkipsParametersWithoutGradient) {
  Tensor a = Tensor::FromData({1}, {1}, true);
  Tensor b = Tensor::FromData({1}, {1}, true);
  a.mutable_grad()[0] = 1.0;
  Adam adam({{"a", a, false}, {"b", b, false}}, AdamOptions{});
  adam.Step();
  EXPECT_LT(a.data()[0], 1.0);
  EXPECT_EQ(b.data()[0], 1.0);
  EXPECT_TRUE(adam.slots()[1].m.empty());
  EXPECT_EQ(adam.slots()[1].step, 0);
}

TEST(Adam, ClipGradNormRescalesJointly) {
  Tensor a = Tensor::FromData({1}, {0}, true);
  Tensor b = Tensor::FromData({1}, {0}, true);
  a.mutable_grad()[0] = 3.0;
  b.mutable_grad()[0] = 4.0;
  Adam adam({{"a", a, false}, {"b", b, false}}, AdamOptions{});
  EXPECT_DOUBLE_EQ(adam.ClipGradNorm(1.0), 5.0);
  EXPECT_DOUBLE_EQ(a.grad()[0], 0.6);
  EXPECT_DOUBLE_EQ(b.grad()[0], 0.8);
  EXPECT_DOUBLE_EQ(adam.ClipGradNorm(1.0), 1.0);
  EXPECT_DOUBLE_EQ(a.grad()[0], 0.6);
}

}  // namespace
}  // namespace unifyspeech
