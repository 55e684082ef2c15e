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

// The four input encoders: text (with duration predictor and length
// regulator), content, speaker and prosody.

#ifndef UNIFYSPEECH_ENCODERS_H_
#define UNIFYSPEECH_ENCODERS_H_

#include <span>
#include <string>
#include <vector>

#include "unifyspeech/config.h"
#include "unifyspeech/features.h"
#include "unifyspeech/layers.h"

namespace unifyspeech {

inline constexpr int kNumPitchBins = 32;
inline constexpr int kUnvoicedBin = 0;

// Bin 0 is unvoiced (f0 == 0). Voiced values map to bins 1..31 by
// 1 + floor(30 (ln f - ln 50) / (ln 600 - ln 50)), clamped to [1, 31].
int QuantizeF0(double f0_hz);
std::vector<int> QuantizeContour(const PitchContour& contour);
// Geometric center of a voiced bin's log-Hz interval; 0 for bin 0. Bin 31
// only holds 600 Hz (and clamped values above it), so its center is 600.
double BinCenterHz(int bin);

// frame -> phoneme index map for the given durations (zero-duration
// phonemes contribute no frames).
std::vector<int> ExpansionMap(std::span<const int> durations);
// Repeats row i of h durations[i] times. Throws DataError when the result
// would be empty, DimensionError when the lengths disagree.
Tensor LengthRegulate(const Tensor& h, std::span<const int> durations);
// Inference rounding of predicted log(d + 1): max(0, round(exp(v) - 1)).
std::vector<int> RoundDurations(std::span<const double> log_durations);

struct ProsodySequence {
  Tensor values;      // [T x d]
  std::vector<int> bins;
};

class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng);

  // ids [T_x] -> [T_x x d]
  Tensor Forward(std::span<const int> phonemes, const ForwardContext& ctx) const;
  const Tensor& embedding() const { return embedding_; }

 private:
  std::size_t vocab_ = 0;
  Tensor embedding_;  // [P x d]
  std::vector<FftBlock> blocks_;
};

class DurationPredictor {
 public:
  DurationPredictor() = default;
  DurationPredictor(ParameterStore& store, const ModelConfig& config, Rng& rng);

  // [T_x x d] -> predicted log(duration + 1), shape [T_x]
  Tensor Forward(const Tensor& hidden, const ForwardContext& ctx) const;

 private:
  ConvPredictor net_;
};

class ContentEncoder {
 public:
  ContentEncoder() = default;
  ContentEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng);

  // mel [T x 80] -> [T x d], frame aligned
  Tensor Forward(const Tensor& mel, const ForwardContext& ctx) const;

 private:
  Linear input_;
  std::vector<FftBlock> blocks_;
};

// Two conv/ReLU/LN layers, mean pooling over time and a linear projection.
class SpeakerEncoder {
 public:
  SpeakerEncoder() = default;
  SpeakerEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng);

  // mel [T x 80] -> [d]
  Tensor Forward(const Tensor& mel, const ForwardContext& ctx) const;
  // Frame-level features before pooling, [T x d].
  Tensor FrameFeatures(const Tensor& mel, const ForwardContext& ctx) const;
  Tensor Pool(const Tensor& frame_features) const;

 private:
  Conv1dLayer conv1_, conv2_;
  LayerNormLayer norm1_, norm2_;
  Linear projection_;
};

// Per-frame F0 bin lookup into a learnable [32 x d] table.
class ProsodyEncoder {
 public:
  ProsodyEncoder() = default;
  ProsodyEncoder(ParameterStore& store, const ModelConfig& config, Rng& rng);

  ProsodySequence Forward(const PitchContour& f0) const;
  ProsodySequence FromBins(std::span<const int> bins) const;
  const Tensor& table() const { return table_; }

 private:
  Tensor table_;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_ENCODERS_H_
