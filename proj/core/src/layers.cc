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

#include "unifyspeech/layers.h"

#include <cmath>
#include <utility>

#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

Tensor ParameterStore::Register(const std::string& name, Tensor value) {
  if (Contains(name)) throw ConfigError("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  index_[name] = items_.size();
  items_.emplace_back(name, value);
  return value;
}

Tensor ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw SchemaError("unknown parameter: " + name);
  return items_[it->second].second;
}

std::vector<std::string> ParameterStore::NamesWithPrefix(std::string_view prefix) const {
  std::vector<std::string> names;
  for (const auto& [name, tensor] : items_) {
    if (name.compare(0, prefix.size(), prefix) == 0) names.push_back(name);
  }
  return names;
}

std::size_t ParameterStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& item : items_) n += item.second.size();
  return n;
}

void ParameterStore::ClearGrads() {
  for (auto& item : items_) item.second.ClearGrad();
}

Rng ForwardContext::DropoutRng(std::string_view site) const {
  return Rng(seed, step).Fork(example).Fork(site);
}

Tensor ForwardContext::MaybeDropout(const Tensor& x, std::string_view site) const {
  if (!training || dropout == 0.0) return x;
  Rng rng = DropoutRng(site);
  return Dropout(x, dropout, rng, training);
}

Tensor XavierUniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> data(NumElements(shape));
  for (double& v : data) v = (2.0 * rng.Uniform() - 1.0) * limit;
  return Tensor::FromData(std::move(shape), std::move(data));
}

Tensor NormalInit(Shape shape, double stddev, Rng& rng) {
  std::vector<double> data(NumElements(shape));
  for (double& v : data) v = stddev * rng.Normal();
  return Tensor::FromData(std::move(shape), std::move(data));
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in,
               std::size_t out, Rng& rng) {
  Rng local = rng.Fork(name);
  weight_ = store.Register(name + ".weight", XavierUniform({in, out}, in, out, local));
  bias_ = store.Register(name + ".bias", Tensor::Zeros({out}));
}

Tensor Linear::Forward(const Tensor& x) const {
  return AddRowVector(MatMul(x, weight_), bias_);
}

Tensor Linear::ForwardVector(const Tensor& v) const {
  Tensor row = Reshape(v, {1, v.size()});
  return Reshape(Forward(row), {bias_.size()});
}

Conv1dLayer::Conv1dLayer(ParameterStore& store, const std::string& name,
                         std::size_t in, std::size_t out, std::size_t kernel,
                         Rng& rng) {
  if (kernel % 2 == 0) {
    throw ConfigError(name + ": conv kernel size must be odd, got " + std::to_string(kernel));
  }
  Rng local = rng.Fork(name);
  kernel_ = store.Register(name + ".kernel", XavierUniform({kernel, in, out}, kernel * in,
                                                           kernel * out, local));
  bias_ = store.Register(name + ".bias", Tensor::Zeros({out}));
}

Tensor Conv1dLayer::Forward(const Tensor& x) const {
  return AddRowVector(Conv1d(x, kernel_), bias_);
}

LayerNormLayer::LayerNormLayer(ParameterStore& store, const std::string& name,
                               std::size_t dim, double eps)
    : eps_(eps) {
  gain_ = store.Register(name + ".gain", Tensor::Full({dim}, 1.0));
  bias_ = store.Register(name + ".bias", Tensor::Zeros({dim}));
}

Tensor LayerNormLayer::Forward(const Tensor& x) const {
  return LayerNorm(x, gain_, bias_, eps_);
}

Tensor LayerNormLayer::Forward(const Tensor& x, const Tensor& gain,
                               const Tensor& bias) const {
  return LayerNorm(x, gain, bias, eps_);
}

Tensor PositionEncoding(std::size_t length, std::size_t dim) {
  std::vector<double> pe(length * dim);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(t) * rate;
      pe[t * dim + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::FromData({length, dim}, std::move(pe));
}

MultiHeadSelfAttention::MultiHeadSelfAttention(ParameterStore& store,
                                               const std::string& name,
                                               std::size_t dim, std::size_t heads,
                                               Rng& rng)
    : heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError(name + ": hidden size " + std::to_string(dim) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  query_ = Linear(store, name + ".query", dim, dim, rng);
  key_ = Linear(store, name + ".key", dim, dim, rng);
  value_ = Linear(store, name + ".value", dim, dim, rng);
  output_ = Linear(store, name + ".output", dim, dim, rng);
}

Tensor MultiHeadSelfAttention::Forward(const Tensor& x) const {
  const std::size_t dim = x.cols();
  const std::size_t head_dim = dim / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor q = query_.Forward(x);
  Tensor k = key_.Forward(x);
  Tensor v = value_.Forward(x);
  std::vector<Tensor> outs;
  outs.reserve(heads_);
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::size_t b = h * head_dim, e = b + head_dim;
    Tensor qh = SliceCols(q, b, e);
    Tensor kh = SliceCols(k, b, e);
    Tensor vh = SliceCols(v, b, e);
    Tensor weights = SoftmaxRows(Scale(MatMul(qh, Transpose(kh)), scale));
    outs.push_back(MatMul(weights, vh));
  }
  return output_.Forward(heads_ == 1 ? outs[0] : ConcatCols(outs));
}

StyleProjection::StyleProjection(ParameterStore& store, const std::string& name,
                                 std::size_t style_dim, std::size_t dim)
    : dim_(dim) {
  weight_ = store.Register(name + ".weight", Tensor::Zeros({style_dim, 2 * dim}));
  std::vector<double> b(2 * dim, 0.0);
  std::fill(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(dim), 1.0);
  bias_ = store.Register(name + ".bias", Tensor::FromData({2 * dim}, std::move(b)));
}

std::pair<Tensor, Tensor> StyleProjection::Forward(const Tensor& style) const {
  Tensor row = Reshape(style, {1, style.size()});
  Tensor both = AddRowVector(MatMul(row, weight_), bias_);
  Tensor gain = Reshape(SliceCols(both, 0, dim_), {dim_});
  Tensor bias = Reshape(SliceCols(both, dim_, 2 * dim_), {dim_});
  return {gain, bias};
}

FftBlock::FftBlock(ParameterStore& store, const std::string& name,
                   const FftBlockOptions& options, Rng& rng)
    : name_(name), style_adaptive_(options.style_adaptive) {
  attention_ = MultiHeadSelfAttention(store, name + ".attention", options.dim,
                                      options.heads, rng);
  norm1_ = LayerNormLayer(store, name + ".norm1", options.dim, options.eps);
  conv1_ = Conv1dLayer(store, name + ".conv1", options.dim, options.ffn_hidden,
                       options.kernel, rng);
  conv2_ = Conv1dLayer(store, name + ".conv2", options.ffn_hidden, options.dim,
                       options.kernel, rng);
  norm2_ = LayerNormLayer(store, name + ".norm2", options.dim, options.eps);
  if (style_adaptive_) {
    style1_ = StyleProjection(store, name + ".saln1", options.dim, options.dim);
    style2_ = StyleProjection(store, name + ".saln2", options.dim, options.dim);
  }
}

Tensor FftBlock::Forward(const Tensor& x, const ForwardContext& ctx,
                         const Tensor* style) const {
  const bool adaptive = style_adaptive_ && style != nullptr;
  Tensor a = ctx.MaybeDropout(attention_.Forward(x), name_ + ".attention");
  Tensor h = Add(x, a);
  if (adaptive) {
    auto [gain, bias] = style1_.Forward(*style);
    h = norm1_.Forward(h, gain, bias);
  } else {
    h = norm1_.Forward(h);
  }
  Tensor f = Relu(conv1_.Forward(h));
  f = ctx.MaybeDropout(conv2_.Forward(f), name_ + ".ffn");
  Tensor out = Add(h, f);
  if (adaptive) {
    auto [gain, bias] = style2_.Forward(*style);
    return norm2_.Forward(out, gain, bias);
  }
  return norm2_.Forward(out);
}

ConvPredictor::ConvPredictor(ParameterStore& store, const std::string& name,
                             std::size_t in, std::size_t hidden, std::size_t kernel,
                             std::size_t out, double eps, Rng& rng)
    : name_(name) {
  conv1_ = Conv1dLayer(store, name + ".conv1", in, hidden, kernel, rng);
  norm1_ = LayerNormLayer(store, name + ".norm1", hidden, eps);
  conv2_ = Conv1dLayer(store, name + ".conv2", hidden, hidden, kernel, rng);
  norm2_ = LayerNormLayer(store, name + ".norm2", hidden, eps);
  head_ = Linear(store, name + ".head", hidden, out, rng);
}

Tensor ConvPredictor::Forward(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = norm1_.Forward(Relu(conv1_.Forward(x)));
  h = ctx.MaybeDropout(h, name_ + ".drop1");
  h = norm2_.Forward(Relu(conv2_.Forward(h)));
  h = ctx.MaybeDropout(h, name_ + ".drop2");
  return head_.Forward(h);
}

}  // namespace unifyspeech
