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

// Model-level evaluation over a set of utterances.

#ifndef UNIFYSPEECH_EVALUATION_H_
#define UNIFYSPEECH_EVALUATION_H_

#include <string>
#include <utility>
#include <vector>

#include "unifyspeech/corpus.h"
#include "unifyspeech/metrics.h"
#include "unifyspeech/model.h"

namespace unifyspeech {

struct EvalReport {
  std::size_t utterances = 0;
  std::size_t labeled = 0;
  // Zero-shot TTS with ground-truth durations; speaker from another
  // utterance of the same speaker.
  TtsMetrics tts;
  std::size_t f0_rmse_utterances = 0;  // utterances where F0 RMSE is defined
  std::size_t f0_corr_utterances = 0;
  double tts_mel_mse = 0.0;
  // Zero-shot VC of every utterance onto its own speaker's reference.
  double vc_mel_mse = 0.0;
  AcsReport acs;
  bool acs_defined = false;
  double phoneme_rep_distance = 0.0;
  // Per-frame agreement of text-side and speech-side codes (NaN without VQ).
  double pair_code_agreement = 0.0;
  // Probability that two speech-side frames share a code, for frames of the
  // same phoneme from different speakers and for frames of different
  // phonemes from the same speaker (NaN without VQ).
  double cross_speaker_same_phoneme = 0.0;
  double within_speaker_diff_phoneme = 0.0;
};

EvalReport Evaluate(const UnifySpeechModel& model, const std::vector<UtteranceRecord>& records);

// Eval-mode text-side and speech-side quantized content of one labeled
// utterance.
std::pair<QuantizedContent, QuantizedContent> DomainContent(const UnifySpeechModel& model,
                                                            const UtteranceRecord& record);
PhonemeDistance PhonemeRepDistance(const UnifySpeechModel& model, const UtteranceRecord& record);

// Index of the zero-shot reference for records[i]: the next utterance of the
// same speaker in list order (wrapping), or i itself if it is the only one.
std::size_t ReferenceIndex(const std::vector<UtteranceRecord>& records, std::size_t i);

std::vector<std::pair<std::string, Tensor>> SpeakerEmbeddings(
    const UnifySpeechModel& model, const std::vector<UtteranceRecord>& records);

std::string FormatEvalCsv(const EvalReport& report);
// utterance id, speaker id, then one column per embedding dimension.
std::string FormatEmbeddingCsv(const std::vector<UtteranceRecord>& records,
                               const std::vector<std::pair<std::string, Tensor>>& embeddings);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_EVALUATION_H_
