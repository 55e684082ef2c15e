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

#include "unifyspeech/model.h"

#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

namespace {

Rng InitRng(const ModelConfig& config) {
  config.Validate();
  return Rng(config.init_seed, StreamId("model-init"));
}

}  // namespace

UnifySpeechModel::UnifySpeechModel(const ModelConfig& config) : config_(config) {
  Rng rng = InitRng(config_);
  text_encoder_ = TextEncoder(params_, config_, rng);
  duration_predictor_ = DurationPredictor(params_, config_, rng);
  content_encoder_ = ContentEncoder(params_, config_, rng);
  speaker_encoder_ = SpeakerEncoder(params_, config_, rng);
  prosody_encoder_ = ProsodyEncoder(params_, config_, rng);
  codebook_ = Codebook(params_, config_.codebook_size, config_.d_model, rng);
  decoder_ = Decoder(params_, config_, rng);
  pitch_predictor_ = PitchPredictor(params_, config_, rng);
}

QuantizedContent UnifySpeechModel::Quantize(const Tensor& content, bool count_usage) {
  if (!config_.use_vq) return IdentityQuantize(content);
  return VqLookup(content, codebook_, count_usage);
}

QuantizedContent UnifySpeechModel::Quantize(const Tensor& content) const {
  if (!config_.use_vq) return IdentityQuantize(content);
  return VqLookup(content, codebook_);
}

Tensor UnifySpeechModel::TextContent(std::span<const int> phonemes,
                                     std::span<const int> durations,
                                     const ForwardContext& ctx) const {
  if (durations.size() != phonemes.size()) {
    throw DataError("text path: " + std::to_string(phonemes.size()) + " phonemes but " +
                    std::to_string(durations.size()) + " durations");
  }
  return LengthRegulate(text_encoder_.Forward(phonemes, ctx), durations);
}

TtsOutputs UnifySpeechModel::ForwardTts(std::span<const int> phonemes,
                                        std::span<const int> durations,
                                        const Tensor& speaker_mel,
                                        std::span<const int> pitch_bins,
                                        const ForwardContext& ctx, bool count_usage) {
  if (durations.size() != phonemes.size()) {
    throw DataError("tts: " + std::to_string(phonemes.size()) + " phonemes but " +
                    std::to_string(durations.size()) + " durations");
  }
  TtsOutputs out;
  out.text_hidden = text_encoder_.Forward(phonemes, ctx);
  out.log_durations = duration_predictor_.Forward(out.text_hidden, ctx);
  Tensor content = LengthRegulate(out.text_hidden, durations);
  if (content.rows() != pitch_bins.size()) {
    throw PairingError("tts: durations expand to " + std::to_string(content.rows()) +
                       " frames but the pitch contour has " +
                       std::to_string(pitch_bins.size()));
  }
  out.content = Quantize(content, count_usage);
  out.speaker = speaker_encoder_.Forward(speaker_mel, ctx);
  out.prosody = prosody_encoder_.FromBins(pitch_bins);
  out.mel = decoder_.Forward(Fuse(out.content, out.speaker, out.prosody, config_.fusion), ctx);
  out.pitch_logits = pitch_predictor_.Forward(out.content, out.speaker, ctx);
  return out;
}

VcOutputs UnifySpeechModel::ForwardVc(const Tensor& content_mel, const Tensor& speaker_mel,
                                      std::span<const int> pitch_bins,
                                      const ForwardContext& ctx, bool count_usage) {
  if (content_mel.rows() != pitch_bins.size()) {
    throw DimensionError("vc: " + std::to_string(content_mel.rows()) + " mel frames but " +
                         std::to_string(pitch_bins.size()) + " pitch bins");
  }
  VcOutputs out;
  out.content = Quantize(content_encoder_.Forward(content_mel, ctx), count_usage);
  out.speaker = speaker_encoder_.Forward(speaker_mel, ctx);
  out.prosody = prosody_encoder_.FromBins(pitch_bins);
  out.mel = decoder_.Forward(Fuse(out.content, out.speaker, out.prosody, config_.fusion), ctx);
  out.pitch_logits = pitch_predictor_.Forward(out.content, out.speaker, ctx);
  return out;
}

Tensor UnifySpeechModel::SpeakerEmbedding(const Tensor& mel) const {
  NoGradGuard no_grad;
  return speaker_encoder_.Forward(mel, ForwardContext{});
}

SynthesisResult UnifySpeechModel::Synthesize(const QuantizedContent& content,
                                             const Tensor& speaker,
                                             const ForwardContext& ctx) const {
  SynthesisResult result;
  Tensor logits = pitch_predictor_.Forward(content, speaker, ctx);
  const std::vector<int> bins = ArgmaxRows(logits);
  result.f0 = DecodeF0(logits);
  ProsodySequence prosody = prosody_encoder_.FromBins(bins);
  result.mel = decoder_.Forward(Fuse(content, speaker, prosody, config_.fusion), ctx);
  result.codes = content.codes;
  return result;
}

SynthesisResult UnifySpeechModel::SynthesizeTts(
    std::span<const int> phonemes, const Tensor& reference_mel,
    std::optional<std::span<const int>> durations) const {
  NoGradGuard no_grad;
  const ForwardContext ctx;
  Tensor hidden = text_encoder_.Forward(phonemes, ctx);
  std::vector<int> dur;
  if (durations) {
    dur.assign(durations->begin(), durations->end());
  } else {
    Tensor log_dur = duration_predictor_.Forward(hidden, ctx);
    dur = RoundDurations(log_dur.data());
    // A sequence predicted entirely silent still needs one frame.
    bool all_zero = true;
    for (int d : dur) all_zero = all_zero && d == 0;
    if (all_zero) dur.assign(dur.size(), 1);
  }
  QuantizedContent content = Quantize(LengthRegulate(hidden, dur));
  SynthesisResult result = Synthesize(content, speaker_encoder_.Forward(reference_mel, ctx), ctx);
  result.durations = std::move(dur);
  return result;
}

SynthesisResult UnifySpeechModel::ConvertVoice(const Tensor& source_mel,
                                               const Tensor& reference_mel) const {
  NoGradGuard no_grad;
  const ForwardContext ctx;
  QuantizedContent content = Quantize(content_encoder_.Forward(source_mel, ctx));
  return Synthesize(content, speaker_encoder_.Forward(reference_mel, ctx), ctx);
}

}  // namespace unifyspeech
