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

#include "grad_suite.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <functional>
#include <map>
#include <stdexcept>

#include "unifyspeech/grad_check.h"
#include "unifyspeech/layers.h"
#include "unifyspeech/ops.h"
#include "unifyspeech/rng.h"

namespace unifyspeech::testing {

namespace {

using Builder = std::function<std::pair<Tensor, std::function<Tensor(const Tensor&)>>(Rng&)>;

Tensor RandomTensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = scale * rng.Normal();
  return Tensor::FromData(std::move(shape), std::move(v));
}

// Values kept away from zero so piecewise-linear ops stay differentiable
// within the finite-difference step.
Tensor AwayFromZero(Shape shape, Rng& rng) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) {
    do {
      x = rng.Normal();
    } while (std::abs(x) < 1e-2);
  }
  return Tensor::FromData(std::move(shape), std::move(v));
}

std::size_t Dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(
      rng.UniformInt(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

// Reduces any output to a scalar through a fixed random weighting, so no
// gradient component is trivially zero.
std::function<Tensor(const Tensor&)> Weighted(std::function<Tensor(const Tensor&)> op,
                                              const Shape& out_shape, Rng& rng) {
  Tensor w = RandomTensor(out_shape, rng);
  return [op = std::move(op), w](const Tensor& x) { return Sum(Mul(op(x), w)); };
}

std::map<std::string, Builder> Builders() {
  std::map<std::string, Builder> b;
  b["matmul.lhs"] = [](Rng& r) {
    const std::size_t m = Dim(r, 1, 8), k = Dim(r, 1, 8), n = Dim(r, 1, 8);
    Tensor rhs = RandomTensor({k, n}, r);
    return std::make_pair(RandomTensor({m, k}, r),
                          Weighted([rhs](const Tensor& x) { return MatMul(x, rhs); }, {m, n}, r));
  };
  b["matmul.rhs"] = [](Rng& r) {
    const std::size_t m = Dim(r, 1, 8), k = Dim(r, 1, 8), n = Dim(r, 1, 8);
    Tensor lhs = RandomTensor({m, k}, r);
    return std::make_pair(RandomTensor({k, n}, r),
                          Weighted([lhs](const Tensor& x) { return MatMul(lhs, x); }, {m, n}, r));
  };
  b["transpose"] = [](Rng& r) {
    const std::size_t m = Dim(r, 1, 8), n = Dim(r, 1, 8);
    return std::make_pair(RandomTensor({m, n}, r),
                          Weighted([](const Tensor& x) { return Transpose(x); }, {n, m}, r));
  };
  b["add"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    Tensor other = RandomTensor(s, r);
    return std::make_pair(RandomTensor(s, r),
                          Weighted([other](const Tensor& x) { return Add(x, other); }, s, r));
  };
  b["sub"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    Tensor other = RandomTensor(s, r);
    return std::make_pair(RandomTensor(s, r),
                          Weighted([other](const Tensor& x) { return Sub(other, x); }, s, r));
  };
  b["mul"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    Tensor other = RandomTensor(s, r);
    return std::make_pair(RandomTensor(s, r),
                          Weighted([other](const Tensor& x) { return Mul(x, Mul(x, other)); }, s, r));
  };
  b["scale"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    const double f = r.Normal();
    return std::make_pair(RandomTensor(s, r),
                          Weighted([f](const Tensor& x) { return Scale(x, f); }, s, r));
  };
  b["add_row_vector.matrix"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 1, 8);
    Tensor v = RandomTensor({d}, r);
    return std::make_pair(RandomTensor({t, d}, r),
                          Weighted([v](const Tensor& x) { return AddRowVector(x, v); }, {t, d}, r));
  };
  b["add_row_vector.vector"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 1, 8);
    Tensor m = RandomTensor({t, d}, r);
    return std::make_pair(RandomTensor({d}, r),
                          Weighted([m](const Tensor& x) { return AddRowVector(m, x); }, {t, d}, r));
  };
  b["relu"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    return std::make_pair(AwayFromZero(s, r),
                          Weighted([](const Tensor& x) { return Relu(x); }, s, r));
  };
  b["reshape"] = [](Rng& r) {
    const std::size_t m = Dim(r, 1, 8), n = Dim(r, 1, 8);
    return std::make_pair(
        RandomTensor({m, n}, r),
        Weighted([m, n](const Tensor& x) { return Reshape(x, {n * m}); }, {m * n}, r));
  };
  b["softmax_rows"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 2, 8)};
    return std::make_pair(RandomTensor(s, r),
                          Weighted([](const Tensor& x) { return SoftmaxRows(x); }, s, r));
  };
  b["layer_norm.x"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 2, 8);
    Tensor g = RandomTensor({d}, r), bias = RandomTensor({d}, r);
    return std::make_pair(
        RandomTensor({t, d}, r),
        Weighted([g, bias](const Tensor& x) { return LayerNorm(x, g, bias, 1e-5); }, {t, d}, r));
  };
  b["layer_norm.gain"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 2, 8);
    Tensor x0 = RandomTensor({t, d}, r), bias = RandomTensor({d}, r);
    return std::make_pair(
        RandomTensor({d}, r),
        Weighted([x0, bias](const Tensor& g) { return LayerNorm(x0, g, bias, 1e-5); }, {t, d}, r));
  };
  b["layer_norm.bias"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 2, 8);
    Tensor x0 = RandomTensor({t, d}, r), g = RandomTensor({d}, r);
    return std::make_pair(
        RandomTensor({d}, r),
        Weighted([x0, g](const Tensor& bb) { return LayerNorm(x0, g, bb, 1e-5); }, {t, d}, r));
  };
  b["conv1d.input"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), cin = Dim(r, 1, 3), cout = Dim(r, 1, 3);
    const std::size_t k = 2 * Dim(r, 0, 2) + 1;
    Tensor kernel = RandomTensor({k, cin, cout}, r);
    return std::make_pair(
        RandomTensor({t, cin}, r),
        Weighted([kernel](const Tensor& x) { return Conv1d(x, kernel); }, {t, cout}, r));
  };
  b["conv1d.kernel"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), cin = Dim(r, 1, 3), cout = Dim(r, 1, 3);
    const std::size_t k = 2 * Dim(r, 0, 2) + 1;
    Tensor x0 = RandomTensor({t, cin}, r);
    return std::make_pair(
        RandomTensor({k, cin, cout}, r),
        Weighted([x0](const Tensor& kk) { return Conv1d(x0, kk); }, {t, cout}, r));
  };
  b["gather_rows"] = [](Rng& r) {
    const std::size_t n = Dim(r, 1, 8), d = Dim(r, 1, 8), m = Dim(r, 1, 8);
    std::vector<int> idx(m);
    for (int& i : idx) i = static_cast<int>(r.UniformInt(0, static_cast<std::int64_t>(n) - 1));
    return std::make_pair(
        RandomTensor({n, d}, r),
        Weighted([idx](const Tensor& x) { return GatherRows(x, idx); }, {m, d}, r));
  };
  b["mean_rows"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 1, 8);
    return std::make_pair(RandomTensor({t, d}, r),
                          Weighted([](const Tensor& x) { return MeanRows(x); }, {d}, r));
  };
  b["slice_cols"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), d = Dim(r, 2, 8);
    const std::size_t lo = Dim(r, 0, d - 1), hi = Dim(r, lo + 1, d);
    return std::make_pair(
        RandomTensor({t, d}, r),
        Weighted([lo, hi](const Tensor& x) { return SliceCols(x, lo, hi); }, {t, hi - lo}, r));
  };
  b["concat_cols"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), a = Dim(r, 1, 3), c = Dim(r, 1, 3);
    Tensor other = RandomTensor({t, c}, r);
    return std::make_pair(RandomTensor({t, a}, r),
                          Weighted(
                              [other](const Tensor& x) {
                                const Tensor parts[] = {x, other, x};
                                return ConcatCols(parts);
                              },
                              {t, 2 * a + c}, r));
  };
  b["dropout"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    const std::uint64_t key = r();
    return std::make_pair(RandomTensor(s, r), Weighted(
                                                  [key](const Tensor& x) {
                                                    Rng mask(key);
                                                    return Dropout(x, 0.3, mask, true);
                                                  },
                                                  s, r));
  };
  b["sum"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    return std::make_pair(RandomTensor(s, r),
                          std::function<Tensor(const Tensor&)>(
                              [](const Tensor& x) { return Sum(Mul(x, x)); }));
  };
  b["mean"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    return std::make_pair(RandomTensor(s, r),
                          std::function<Tensor(const Tensor&)>(
                              [](const Tensor& x) { return Mean(Mul(x, x)); }));
  };
  b["mse"] = [](Rng& r) {
    const Shape s{Dim(r, 1, 8), Dim(r, 1, 8)};
    Tensor target = RandomTensor(s, r);
    return std::make_pair(RandomTensor(s, r), std::function<Tensor(const Tensor&)>(
                                                  [target](const Tensor& x) { return Mse(x, target); }));
  };
  b["softmax_cross_entropy"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8), k = Dim(r, 2, 8);
    std::vector<int> target(t);
    for (int& v : target) v = static_cast<int>(r.UniformInt(0, static_cast<std::int64_t>(k) - 1));
    return std::make_pair(RandomTensor({t, k}, r),
                          std::function<Tensor(const Tensor&)>([target](const Tensor& x) {
                            return SoftmaxCrossEntropy(x, target);
                          }));
  };
  b["attention_block"] = [](Rng& r) {
    const std::size_t t = Dim(r, 1, 8);
    const std::size_t d = 4;
    auto store = std::make_shared<ParameterStore>();
    Rng init = r.Fork("init");
    FftBlockOptions o;
    o.dim = d;
    o.heads = 2;
    o.ffn_hidden = 6;
    o.kernel = 3;
    // Same draws as the block's first sublayers, to locate the ReLU inputs.
    Rng shadow_init = init;
    ParameterStore shadow;
    const MultiHeadSelfAttention attention(shadow, "block.attention", d, o.heads, shadow_init);
    const LayerNormLayer norm1(shadow, "block.norm1", d, o.eps);
    const Conv1dLayer conv1(shadow, "block.conv1", d, o.ffn_hidden, o.kernel, shadow_init);
    auto block = std::make_shared<FftBlock>(*store, "block", o, init);
    Tensor x;
    for (;;) {
      x = RandomTensor({t, d}, r);
      NoGradGuard no_grad;
      const Tensor z = conv1.Forward(norm1.Forward(Add(x, attention.Forward(x))));
      if (std::all_of(z.data().begin(), z.data().end(),
                      [](double v) { return std::abs(v) >= 1e-3; })) {
        break;
      }
    }
    return std::make_pair(x, Weighted(
                                 [store, block](const Tensor& in) {
                                   return block->Forward(in, ForwardContext{});
                                 },
                                 {t, d}, r));
  };
  return b;
}

}  // namespace

std::vector<std::string> GradientSuiteOps() {
  std::vector<std::string> names;
  for (const auto& [name, builder] : Builders()) names.push_back(name);
  return names;
}

OpGradResult RunGradientCase(const std::string& op, int cases, std::uint64_t seed) {
  const auto builders = Builders();
  const auto it = builders.find(op);
  if (it == builders.end()) throw std::invalid_argument("unknown op " + op);
  OpGradResult result;
  result.op = op;
  Rng rng = Rng(seed).Fork(op);
  for (int c = 0; c < cases; ++c) {
    Rng case_rng = rng.Fork(static_cast<std::uint64_t>(c));
    auto [x, f] = it->second(case_rng);
    const GradCheckResult g = GradCheck(f, x);
    if (g.skipped) throw std::logic_error("grad suite op " + op + " was skipped");
    result.worst_error = std::max(result.worst_error, g.max_relative_error);
    if (!std::isfinite(g.max_relative_error)) result.worst_error = INFINITY;
    ++result.cases;
  }
  return result;
}

std::vector<OpGradResult> RunGradientSuite(int cases, std::uint64_t seed) {
  std::vector<OpGradResult> out;
  for (const std::string& op : GradientSuiteOps()) out.push_back(RunGradientCase(op, cases, seed));
  return out;
}

std::string CheckStraightThrough(int cases, std::uint64_t seed) {
  Rng rng(seed, StreamId("straight-through"));
  for (int c = 0; c < cases; ++c) {
    const std::size_t t = Dim(rng, 1, 6), d = Dim(rng, 1, 5);
    Tensor cont = RandomTensor({t, d}, rng);
    Tensor quant = RandomTensor({t, d}, rng);
    Tensor upstream = RandomTensor({t, d}, rng);
    Tensor cp = Tensor::FromData(cont.shape(),
                                 std::vector<double>(cont.data().begin(), cont.data().end()), true);
    Tensor qp = Tensor::FromData(quant.shape(),
                                 std::vector<double>(quant.data().begin(), quant.data().end()), true);
    Tensor y = StraightThrough(cp, qp);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.data()[i] != quant.data()[i]) return "forward value differs from the quantized input";
    }
    Sum(Mul(y, upstream)).Backward();
    if (!cp.has_grad()) return "continuous input received no gradient";
    for (std::size_t i = 0; i < cp.size(); ++i) {
      if (cp.grad()[i] != upstream.data()[i]) return "continuous gradient is not the upstream gradient";
    }
    if (qp.has_grad()) {
      for (double g : qp.grad()) {
        if (g != 0.0) return "quantized input received a gradient";
      }
    }
  }
  return {};
}

}  // namespace unifyspeech::testing
