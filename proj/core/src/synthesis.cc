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

#include "unifyspeech/synthesis.h"

#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

FusedSequence Fuse(const QuantizedContent& content, const Tensor& speaker,
                   const ProsodySequence& prosody, FusionMode mode) {
  const Tensor& c = content.vectors;
  if (c.shape() != prosody.values.shape()) {
    throw DimensionError("fuse: content " + ShapeToString(c.shape()) + " vs prosody " +
                         ShapeToString(prosody.values.shape()));
  }
  if (speaker.rank() != 1 || speaker.size() != c.cols()) {
    throw DimensionError("fuse: speaker embedding " + ShapeToString(speaker.shape()) +
                         " for content " + ShapeToString(c.shape()));
  }
  FusedSequence fused;
  fused.mode = mode;
  Tensor sum = Add(c, prosody.values);
  if (mode == FusionMode::kAdditive) {
    fused.values = AddRowVector(sum, speaker);
  } else {
    fused.values = sum;
    fused.style = speaker;
  }
  return fused;
}

Decoder::Decoder(ParameterStore& store, const ModelConfig& config, Rng& rng) {
  FftBlockOptions o;
  o.dim = config.d_model;
  o.heads = config.num_heads;
  o.ffn_hidden = config.ffn_hidden;
  o.kernel = config.conv_kernel;
  o.eps = config.layer_norm_eps;
  o.style_adaptive = config.fusion == FusionMode::kSaln;
  for (std::size_t i = 0; i < config.decoder_blocks; ++i) {
    blocks_.emplace_back(store, "decoder.block" + std::to_string(i), o, rng);
  }
  output_ = Linear(store, "decoder.output", config.d_model, config.num_mels, rng);
}

Tensor Decoder::Forward(const FusedSequence& fused, const ForwardContext& ctx) const {
  Tensor x = Add(fused.values, PositionEncoding(fused.values.rows(), fused.values.cols()));
  const Tensor* style = fused.mode == FusionMode::kSaln ? &fused.style : nullptr;
  for (const FftBlock& block : blocks_) x = block.Forward(x, ctx, style);
  return output_.Forward(x);
}

PitchPredictor::PitchPredictor(ParameterStore& store, const ModelConfig& config, Rng& rng)
    : net_(store, "pitch_predictor", config.d_model, config.d_model, config.conv_kernel,
           config.num_pitch_bins, config.layer_norm_eps, rng) {}

Tensor PitchPredictor::Forward(const QuantizedContent& content, const Tensor& speaker,
                               const ForwardContext& ctx) const {
  return net_.Forward(AddRowVector(content.vectors, speaker), ctx);
}

std::vector<int> ArgmaxRows(const Tensor& logits) {
  if (logits.rank() != 2) {
    throw DimensionError("argmax: expected rank-2 logits, got " + ShapeToString(logits.shape()));
  }
  const std::size_t t = logits.rows(), k = logits.cols();
  std::vector<int> out(t, 0);
  for (std::size_t r = 0; r < t; ++r) {
    const double* row = logits.data().data() + r * k;
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

PitchContour DecodeF0(const Tensor& logits) {
  if (logits.rank() != 2 || logits.cols() != static_cast<std::size_t>(kNumPitchBins)) {
    throw DimensionError("decode_f0: expected [T x 32] logits, got " +
                         ShapeToString(logits.shape()));
  }
  PitchContour contour;
  for (int bin : ArgmaxRows(logits)) contour.f0_hz.push_back(BinCenterHz(bin));
  return contour;
}

}  // namespace unifyspeech
