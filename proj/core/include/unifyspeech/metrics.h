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

// Objective evaluation: F0 RMSE, F0 correlation, V/UV error, mel-cepstral
// distortion, speaker-embedding cosine statistics and the phoneme
// representation distance between the text and speech domains.

#ifndef UNIFYSPEECH_METRICS_H_
#define UNIFYSPEECH_METRICS_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unifyspeech/features.h"
#include "unifyspeech/tensor.h"

namespace unifyspeech {

struct TtsMetrics {
  double f0_rmse_hz = 0.0;
  double mcd_db = 0.0;
  double vuv_error_rate = 0.0;
  double f0_corr = 0.0;
};

struct AcsReport {
  double s_acs = 0.0;
  double d_acs = 0.0;
  double ratio = 0.0;
  std::size_t same_pairs = 0;
  std::size_t different_pairs = 0;
};

// RMSE over frames voiced in both contours.
double F0Rmse(const PitchContour& ref, const PitchContour& hyp);
// Pearson correlation over frames voiced in both contours.
double F0Corr(const PitchContour& ref, const PitchContour& hyp);
double VuvError(const PitchContour& ref, const PitchContour& hyp);

// Mean over frames of (10 / ln 10) sqrt(2 sum_{d=1..13} (c_d - c'_d)^2).
double Mcd(const MelSpectrogram& ref, const MelSpectrogram& hyp);
double Mcd(const Tensor& ref_mel, const Tensor& hyp_mel);
// Same formula on precomputed cepstra [T x 13].
double McdFromCepstra(const Tensor& ref, const Tensor& hyp);

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// All-pairs same-speaker and cross-speaker mean cosine similarity.
AcsReport AcsRatio(const std::vector<std::pair<std::string, Tensor>>& embeddings);

struct PhonemeDistance {
  double average = 0.0;      // mean over phoneme symbols present
  std::size_t phonemes = 0;  // symbols with at least one frame
};

// Frames of both sequences are grouped by phoneme symbol through the
// duration expansion; the distance of a symbol is the L2 norm between the
// per-domain frame means.
PhonemeDistance PhonemeRepDistance(const Tensor& text_content, const Tensor& speech_content,
                                   std::span<const int> phonemes,
                                   std::span<const int> durations);

// Fraction of positions where the two code sequences agree.
double CodeAgreement(std::span<const int> a, std::span<const int> b);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_METRICS_H_
