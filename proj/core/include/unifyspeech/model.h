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

// The joint model. The TTS pipeline (text encoder, duration predictor, length
// regulator) and the VC pipeline (content encoder) each produce frame-level
// content; everything downstream is a single shared instance: codebook,
// speaker encoder, prosody encoder, decoder and pitch predictor.

#ifndef UNIFYSPEECH_MODEL_H_
#define UNIFYSPEECH_MODEL_H_

#include <optional>
#include <span>
#include <vector>

#include "unifyspeech/config.h"
#include "unifyspeech/encoders.h"
#include "unifyspeech/layers.h"
#include "unifyspeech/synthesis.h"
#include "unifyspeech/vq.h"

namespace unifyspeech {

struct TtsOutputs {
  Tensor text_hidden;     // [T_x x d]
  Tensor log_durations;   // [T_x]
  QuantizedContent content;  // C_p and its quantized form, [T x d]
  Tensor speaker;         // [d]
  ProsodySequence prosody;
  Tensor mel;             // [T x 80]
  Tensor pitch_logits;    // [T x 32]
};

struct VcOutputs {
  QuantizedContent content;  // C_s and its quantized form
  Tensor speaker;
  ProsodySequence prosody;
  Tensor mel;
  Tensor pitch_logits;
};

struct SynthesisResult {
  Tensor mel;                 // [T x 80]
  PitchContour f0;            // predicted, decoded from the pitch classes
  std::vector<int> durations; // TTS only
  std::vector<int> codes;     // content codes (empty without VQ)
};

class UnifySpeechModel {
 public:
  explicit UnifySpeechModel(const ModelConfig& config);
  UnifySpeechModel(const UnifySpeechModel&) = delete;
  UnifySpeechModel& operator=(const UnifySpeechModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Snaps content to the shared codebook, or passes it through unchanged when
  // use_vq is off.
  QuantizedContent Quantize(const Tensor& content, bool count_usage);
  QuantizedContent Quantize(const Tensor& content) const;

  // Text path with teacher forcing: ground-truth durations drive the length
  // regulator and ground-truth F0 bins drive the prosody encoder.
  TtsOutputs ForwardTts(std::span<const int> phonemes, std::span<const int> durations,
                        const Tensor& speaker_mel, std::span<const int> pitch_bins,
                        const ForwardContext& ctx, bool count_usage = false);
  // Speech path: content from `content_mel`, speaker from `speaker_mel`.
  VcOutputs ForwardVc(const Tensor& content_mel, const Tensor& speaker_mel,
                      std::span<const int> pitch_bins, const ForwardContext& ctx,
                      bool count_usage = false);

  // Continuous content of the text path after length regulation (C_p).
  Tensor TextContent(std::span<const int> phonemes, std::span<const int> durations,
                     const ForwardContext& ctx) const;

  // Zero-shot TTS: speaker from the reference mel, durations predicted unless
  // given, pitch predicted. Eval mode, no graph.
  SynthesisResult SynthesizeTts(std::span<const int> phonemes, const Tensor& reference_mel,
                                std::optional<std::span<const int>> durations = std::nullopt) const;
  // Zero-shot VC: content from the source, speaker from the reference, pitch
  // predicted from both.
  SynthesisResult ConvertVoice(const Tensor& source_mel, const Tensor& reference_mel) const;

  Tensor SpeakerEmbedding(const Tensor& mel) const;

  const TextEncoder& text_encoder() const { return text_encoder_; }
  const DurationPredictor& duration_predictor() const { return duration_predictor_; }
  const ContentEncoder& content_encoder() const { return content_encoder_; }
  const SpeakerEncoder& speaker_encoder() const { return speaker_encoder_; }
  const ProsodyEncoder& prosody_encoder() const { return prosody_encoder_; }
  const Codebook& codebook() const { return codebook_; }
  Codebook& mutable_codebook() { return codebook_; }
  const Decoder& decoder() const { return decoder_; }
  const PitchPredictor& pitch_predictor() const { return pitch_predictor_; }

 private:
  SynthesisResult Synthesize(const QuantizedContent& content, const Tensor& speaker,
                             const ForwardContext& ctx) const;

  ModelConfig config_;
  ParameterStore params_;
  TextEncoder text_encoder_;
  DurationPredictor duration_predictor_;
  ContentEncoder content_encoder_;
  SpeakerEncoder speaker_encoder_;
  ProsodyEncoder prosody_encoder_;
  Codebook codebook_;
  Decoder decoder_;
  PitchPredictor pitch_predictor_;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_MODEL_H_
