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

#ifndef UNIFYSPEECH_WAV_H_
#define UNIFYSPEECH_WAV_H_

#include <span>
#include <string>
#include <vector>

namespace unifyspeech {

struct WavAudio {
  int sample_rate = 0;
  std::vector<double> samples;  // in [-1, 1)
};

// Reads a RIFF/WAVE file holding mono 16-bit PCM at 22050 Hz. Any other
// layout is rejected with FormatError describing what was found.
WavAudio ReadWav(const std::string& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1].
void WriteWav(const std::string& path, std::span<const double> samples,
              int sample_rate);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_WAV_H_
