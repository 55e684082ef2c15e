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

#include "unifyspeech/encoders.h"

#include <algorithm>
#include <cmath>

#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

namespace {

const double kLogF0Min = std::log(kF0MinHz);
const double kLogF0Span = std::log(kF0MaxHz) - std::log(kF0MinHz);
constexpr int kVoicedIntervals = kNumPitchBins - 2;  // 30

FftBlockOptions BlockOptions(const ModelConfig& config, bool style_adaptive) {
  FftBlockOptions o;
  o.dim = config.d_model;
  o.heads = config.num_heads;
  o.ffn_hidden = config.ffn_hidden;
  o.kernel = config.conv_kernel;
  o.eps = config.layer_norm_eps;
  o.style_adaptive = style_adaptive;
  return o;
}

}  // namespace

int QuantizeF0(double f0_hz) {
  if (!(f0_hz >= 0.0)) {
    throw DomainError("quantize_f0: negative or NaN frequency " + std::to_string(f0_hz));
  }
  if (f0_hz == 0.0) return kUnvoicedBin;
  const double pos = kVoicedIntervals * (std::log(f0_hz) - kLogF0Min) / kLogF0Span;
  const int bin = 1 + static_cast<int>(std::floor(pos));
  return std::clamp(bin, 1, kNumPitchBins - 1);
}

std::vector<int> QuantizeContour(const PitchContour& contour) {
  std::vector<int> bins(contour.size());
  std::transform(contour.f0_hz.begin(), contour.f0_hz.end(), bins.begin(), QuantizeF0);
  return bins;
}

double BinCenterHz(int bin) {
  if (bin < 0 || bin >= kNumPitchBins) {
    throw IndexError("pitch bin " + std::to_string(bin) + " outside [0, 32)");
  }
  if (bin == kUnvoicedBin) return 0.0;
  if (bin == kNumPitchBins - 1) return kF0MaxHz;
  const double center = (static_cast<double>(bin - 1) + 0.5) / kVoicedIntervals;
  return std::exp(kLogF0Min + center * kLogF0Span);
}

std::vector<int> ExpansionMap(std::span<const int> durations) {
  std::vector<int> map;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 0) {
      throw DataError("negative duration " + std::to_string(durations[i]) +
                      " at phoneme " + std::to_string(i));
    }
    map.insert(map.end(), static_cast<std::size_t>(durations[i]), static_cast<int>(i));
  }
  return map;
}

Tensor LengthRegulate(const Tensor& h, std::span<const int> durations) {
  if (h.rank() != 2 || h.rows() != durations.size()) {
    throw DimensionError("length_regulate: " + std::to_string(durations.size()) +
                         " durations for hidden sequence " + ShapeToString(h.shape()));
  }
  const std::vector<int> map = ExpansionMap(durations);
  if (map.empty()) throw DataError("length_regulate: all durations are zero");
  return GatherRows(h, map);
}

std::vector<int> RoundDurations(std::span<const double> log_durations) {
  std::vector<int> out(log_durations.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = std::round(std::exp(log_durations[i]) - 1.0);
    out[i] = d > 0.0 ? static_cast<int>(d) : 0;
  }
  return out;
}

TextEncoder::TextEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng)
    : vocab_(config.num_phonemes) {
  Rng local = rng.Fork("text_encoder.embedding");
  embedding_ = store.Register("text_encoder.embedding",
                              NormalInit({config.num_phonemes, config.d_model}, 1.0, local));
  for (std::size_t i = 0; i < config.text_blocks; ++i) {
    blocks_.emplace_back(store, "text_encoder.block" + std::to_string(i),
                         BlockOptions(config, false), rng);
  }
}

Tensor TextEncoder::Forward(std::span<const int> phonemes,
                            const ForwardContext& ctx) const {
  if (phonemes.empty()) throw DataError("text_encoder: empty phoneme sequence");
  for (int id : phonemes) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_) {
      throw IndexError("text_encoder: phoneme id " + std::to_string(id) +
                       " outside vocabulary of " + std::to_string(vocab_));
    }
  }
  Tensor x = GatherRows(embedding_, phonemes);
  x = Add(x, PositionEncoding(x.rows(), x.cols()));
  for (const FftBlock& block : blocks_) x = block.Forward(x, ctx);
  return x;
}

DurationPredictor::DurationPredictor(ParameterStore& store, const ModelConfig& config,
                                     Rng& rng)
    : net_(store, "duration_predictor", config.d_model, config.d_model,
           config.conv_kernel, 1, config.layer_norm_eps, rng) {}

Tensor DurationPredictor::Forward(const Tensor& hidden, const ForwardContext& ctx) const {
  Tensor out = net_.Forward(hidden, ctx);
  return Reshape(out, {out.rows()});
}

ContentEncoder::ContentEncoder(ParameterStore& store, const ModelConfig& config,
                               Rng& rng) {
  input_ = Linear(store, "content_encoder.input", config.num_mels, config.d_model, rng);
  for (std::size_t i = 0; i < config.content_blocks; ++i) {
    blocks_.emplace_back(store, "content_encoder.block" + std::to_string(i),
                         BlockOptions(config, false), rng);
  }
}

Tensor ContentEncoder::Forward(const Tensor& mel, const ForwardContext& ctx) const {
  Tensor x = input_.Forward(mel);
  x = Add(x, PositionEncoding(x.rows(), x.cols()));
  for (const FftBlock& block : blocks_) x = block.Forward(x, ctx);
  return x;
}

SpeakerEncoder::SpeakerEncoder(ParameterStore& store, const ModelConfig& config,
                               Rng& rng) {
  const std::size_t d = config.d_model;
  conv1_ = Conv1dLayer(store, "speaker_encoder.conv1", config.num_mels, d,
                       config.conv_kernel, rng);
  norm1_ = LayerNormLayer(store, "speaker_encoder.norm1", d, config.layer_norm_eps);
  conv2_ = Conv1dLayer(store, "speaker_encoder.conv2", d, d, config.conv_kernel, rng);
  norm2_ = LayerNormLayer(store, "speaker_encoder.norm2", d, config.layer_norm_eps);
  projection_ = Linear(store, "speaker_encoder.projection", d, d, rng);
}

Tensor SpeakerEncoder::FrameFeatures(const Tensor& mel, const ForwardContext&) const {
  if (mel.rank() != 2 || mel.rows() == 0) {
    throw DimensionError("speaker_encoder: need at least one mel frame, got " +
                         ShapeToString(mel.shape()));
  }
  Tensor h = norm1_.Forward(Relu(conv1_.Forward(mel)));
  return norm2_.Forward(Relu(conv2_.Forward(h)));
}

Tensor SpeakerEncoder::Pool(const Tensor& frame_features) const {
  return projection_.ForwardVector(MeanRows(frame_features));
}

Tensor SpeakerEncoder::Forward(const Tensor& mel, const ForwardContext& ctx) const {
  return Pool(FrameFeatures(mel, ctx));
}

ProsodyEncoder::ProsodyEncoder(ParameterStore& store, const ModelConfig& config,
                               Rng& rng) {
  Rng local = rng.Fork("prosody_encoder.table");
  table_ = store.Register("prosody_encoder.table",
                          NormalInit({static_cast<std::size_t>(kNumPitchBins), config.d_model},
                                     1.0, local));
}

ProsodySequence ProsodyEncoder::Forward(const PitchContour& f0) const {
  return FromBins(QuantizeContour(f0));
}

ProsodySequence ProsodyEncoder::FromBins(std::span<const int> bins) const {
  ProsodySequence p;
  p.bins.assign(bins.begin(), bins.end());
  p.values = GatherRows(table_, bins);
  return p;
}

}  // namespace unifyspeech
