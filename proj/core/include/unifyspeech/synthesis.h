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

#ifndef UNIFYSPEECH_SYNTHESIS_H_
#define UNIFYSPEECH_SYNTHESIS_H_

#include <vector>

#include "unifyspeech/config.h"
#include "unifyspeech/encoders.h"
#include "unifyspeech/features.h"
#include "unifyspeech/layers.h"
#include "unifyspeech/vq.h"

namespace unifyspeech {

struct FusedSequence {
  Tensor values;  // [T x d]
  FusionMode mode = FusionMode::kAdditive;
  // Speaker vector for style-adaptive layer norms (saln mode only).
  Tensor style;
};

// Additive: row_t = C_t + S + P_t. Saln: row_t = C_t + P_t and S rides along
// as the style vector for the decoder's layer norms.
FusedSequence Fuse(const QuantizedContent& content, const Tensor& speaker,
                   const ProsodySequence& prosody, FusionMode mode);

class Decoder {
 public:
  Decoder() = default;
  Decoder(ParameterStore& store, const ModelConfig& config, Rng& rng);

  // [T x d] -> predicted mel [T x 80]
  Tensor Forward(const FusedSequence& fused, const ForwardContext& ctx) const;

 private:
  std::vector<FftBlock> blocks_;
  Linear output_;
};

// Input row_t = C_t + S; output [T x 32] pitch-bin logits.
class PitchPredictor {
 public:
  PitchPredictor() = default;
  PitchPredictor(ParameterStore& store, const ModelConfig& config, Rng& rng);

  Tensor Forward(const QuantizedContent& content, const Tensor& speaker,
                 const ForwardContext& ctx) const;

 private:
  ConvPredictor net_;
};

// Per-frame argmax (lowest index wins ties); bin 0 -> unvoiced, otherwise the
// geometric center of the bin.
PitchContour DecodeF0(const Tensor& logits);
std::vector<int> ArgmaxRows(const Tensor& logits);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_SYNTHESIS_H_
