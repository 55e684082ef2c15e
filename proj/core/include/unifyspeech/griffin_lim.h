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

// Rough waveform rendering from a log-mel spectrogram: non-negative
// least-squares inversion of the filterbank, then Griffin-Lim phase
// estimation. A convenience for listening; not a vocoder.

#ifndef UNIFYSPEECH_GRIFFIN_LIM_H_
#define UNIFYSPEECH_GRIFFIN_LIM_H_

#include <cstdint>
#include <vector>

#include "unifyspeech/features.h"

namespace unifyspeech {

inline constexpr int kGriffinLimIterations = 60;

// [T x 513] linear magnitudes approximating the mel frames.
std::vector<double> MelToLinearMagnitude(const Tensor& log_mel);

// Returns (T - 1) * hop samples at 22050 Hz.
std::vector<double> GriffinLim(const Tensor& log_mel, int iterations = kGriffinLimIterations,
                               std::uint64_t seed = 0);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_GRIFFIN_LIM_H_
