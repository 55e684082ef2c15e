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

// Audio front end: log-mel spectrogram, autocorrelation F0 and mel cepstra.
//
// Framing is shared by the mel and F0 extractors so their frame counts always
// agree: the signal is reflection-padded by kFftSize / 2 samples on both
// sides and frame t covers padded samples [t * kHopLength, t * kHopLength +
// kFftSize). That yields floor(len / kHopLength) + 1 frames.

#ifndef UNIFYSPEECH_FEATURES_H_
#define UNIFYSPEECH_FEATURES_H_

#include <cstddef>
#include <span>
#include <vector>

#include "unifyspeech/tensor.h"

namespace unifyspeech {

inline constexpr int kSampleRate = 22050;
inline constexpr std::size_t kFftSize = 1024;
// Window equals the FFT size; 12.5 ms hop at 22.05 kHz.
inline constexpr std::size_t kWinLength = 1024;
inline constexpr std::size_t kHopLength = 276;
inline constexpr std::size_t kNumMels = 80;
inline constexpr double kMelFminHz = 0.0;
inline constexpr double kMelFmaxHz = 8000.0;
inline constexpr double kLogFloor = 1e-5;
inline constexpr std::size_t kNumCepstra = 13;
inline constexpr double kF0MinHz = 50.0;
inline constexpr double kF0MaxHz = 600.0;
inline constexpr double kVoicingThreshold = 0.5;
inline constexpr double kSilenceRms = 1e-4;

struct MelSpectrogram {
  Tensor frames;  // [T x 80] natural-log mel energies
  int sample_rate = kSampleRate;
  std::size_t hop = kHopLength;

  std::size_t num_frames() const { return frames.defined() ? frames.rows() : 0; }
};

// One value per mel frame; 0 marks an unvoiced frame.
struct PitchContour {
  std::vector<double> f0_hz;

  std::size_t size() const { return f0_hz.size(); }
  static bool IsVoiced(double hz) { return hz > 0.0; }
};

struct CepstraSequence {
  Tensor coefficients;  // [T x 13], c_1..c_13
};

std::size_t NumFrames(std::size_t num_samples);

// Triangular HTK-mel filters, area normalized: [80 x (kFftSize / 2 + 1)].
const std::vector<double>& MelFilterbank();
double HzToMel(double hz);
double MelToHz(double mel);
// Center frequency of each mel filter in Hz.
std::vector<double> MelCenterFrequencies();

MelSpectrogram ComputeMelSpectrogram(std::span<const double> audio,
                                     int sample_rate = kSampleRate);

// Per-frame normalized autocorrelation pitch over lags for [50, 600] Hz.
// Voiced iff the chosen peak exceeds 0.5 and frame RMS exceeds 1e-4; the
// lag is refined by parabolic interpolation.
PitchContour ExtractF0(std::span<const double> audio,
                       int sample_rate = kSampleRate);

// Orthonormal DCT-II across the 80 channels of each frame, keeping
// coefficients 1..13.
CepstraSequence MelCepstra(const MelSpectrogram& mel);

// Reflection padding used by the framing contract above. Exposed for tests.
std::vector<double> ReflectPad(std::span<const double> audio, std::size_t pad);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_FEATURES_H_
