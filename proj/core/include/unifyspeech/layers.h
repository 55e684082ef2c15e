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

// Building blocks shared by the encoders and the decoder: a named parameter
// registry, linear/conv/norm layers, multi-head self-attention and the
// feed-forward Transformer (FFT) block.

#ifndef UNIFYSPEECH_LAYERS_H_
#define UNIFYSPEECH_LAYERS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unifyspeech/rng.h"
#include "unifyspeech/tensor.h"

namespace unifyspeech {

// Owns every learnable tensor by name, in registration order. Modules keep
// Tensor handles into the store, so a module referenced from two pipelines
// updates in one place.
class ParameterStore {
 public:
  Tensor Register(const std::string& name, Tensor value);
  Tensor Get(const std::string& name) const;
  bool Contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::vector<std::string> NamesWithPrefix(std::string_view prefix) const;
  std::size_t NumScalars() const;
  void ClearGrads();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::map<std::string, std::size_t> index_;
};

// Per-forward settings. Dropout masks are drawn from a stream keyed by
// (seed, step, example, site name), so they are reproducible without any
// mutable generator state in the model.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t example = 0;

  Rng DropoutRng(std::string_view site) const;
  Tensor MaybeDropout(const Tensor& x, std::string_view site) const;
};

// Parameter initialization helpers.
Tensor XavierUniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
Tensor NormalInit(Shape shape, double stddev, Rng& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in,
         std::size_t out, Rng& rng);

  // x [T x in] -> [T x out]
  Tensor Forward(const Tensor& x) const;
  // v [in] -> [out]
  Tensor ForwardVector(const Tensor& v) const;

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  Tensor weight_;  // [in x out]
  Tensor bias_;    // [out]
};

class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(ParameterStore& store, const std::string& name, std::size_t in,
              std::size_t out, std::size_t kernel, Rng& rng);
  Tensor Forward(const Tensor& x) const;

 private:
  Tensor kernel_;  // [K x in x out]
  Tensor bias_;    // [out]
};

class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParameterStore& store, const std::string& name, std::size_t dim,
                 double eps);
  Tensor Forward(const Tensor& x) const;
  // Style-adaptive variant: gain and bias supplied by the caller.
  Tensor Forward(const Tensor& x, const Tensor& gain, const Tensor& bias) const;

 private:
  Tensor gain_;
  Tensor bias_;
  double eps_ = 1e-5;
};

// Sinusoidal position encoding [T x d] (sin on even, cos on odd channels).
Tensor PositionEncoding(std::size_t length, std::size_t dim);

class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParameterStore& store, const std::string& name,
                         std::size_t dim, std::size_t heads, Rng& rng);
  Tensor Forward(const Tensor& x) const;

 private:
  std::size_t heads_ = 1;
  Linear query_, key_, value_, output_;
};

// Projects a style vector to (gain, bias) for one layer norm. Zero weights
// and gain bias 1 at init, so a fresh projection reproduces plain layer norm.
class StyleProjection {
 public:
  StyleProjection() = default;
  StyleProjection(ParameterStore& store, const std::string& name,
                  std::size_t style_dim, std::size_t dim);
  std::pair<Tensor, Tensor> Forward(const Tensor& style) const;

 private:
  std::size_t dim_ = 0;
  Tensor weight_;  // [style_dim x 2 dim]
  Tensor bias_;    // [2 dim]
};

struct FftBlockOptions {
  std::size_t dim = 256;
  std::size_t heads = 2;
  std::size_t ffn_hidden = 256;
  std::size_t kernel = 3;
  double eps = 1e-5;
  bool style_adaptive = false;
};

// Post-norm feed-forward Transformer block:
//   x = LN(x + Dropout(MHSA(x)))
//   x = LN(x + Dropout(Conv(ReLU(Conv(x)))))
// With style_adaptive the two norms take gain/bias from the style vector.
class FftBlock {
 public:
  FftBlock() = default;
  FftBlock(ParameterStore& store, const std::string& name,
           const FftBlockOptions& options, Rng& rng);

  Tensor Forward(const Tensor& x, const ForwardContext& ctx,
                 const Tensor* style = nullptr) const;

 private:
  std::string name_;
  bool style_adaptive_ = false;
  MultiHeadSelfAttention attention_;
  LayerNormLayer norm1_, norm2_;
  Conv1dLayer conv1_, conv2_;
  StyleProjection style1_, style2_;
};

// Conv -> ReLU -> LN -> Dropout, twice, then a linear head. The FastSpeech
// variance-predictor shape, used for durations and pitch classes.
class ConvPredictor {
 public:
  ConvPredictor() = default;
  ConvPredictor(ParameterStore& store, const std::string& name, std::size_t in,
                std::size_t hidden, std::size_t kernel, std::size_t out,
                double eps, Rng& rng);
  Tensor Forward(const Tensor& x, const ForwardContext& ctx) const;

 private:
  std::string name_;
  Conv1dLayer conv1_, conv2_;
  LayerNormLayer norm1_, norm2_;
  Linear head_;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_LAYERS_H_
