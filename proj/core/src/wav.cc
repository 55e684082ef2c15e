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

#include "unifyspeech/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "unifyspeech/errors.h"
#include "unifyspeech/features.h"

namespace unifyspeech {

namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

WavAudio ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path + ": not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw IoError(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": short fmt chunk");
      format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk");
      if (format != 1 || channels != 1 || bits != 16 ||
          rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw FormatError(path + ": need mono 16-bit PCM at 22050 Hz, got format=" +
                          std::to_string(format) + " channels=" + std::to_string(channels) +
                          " bits=" + std::to_string(bits) + " rate=" + std::to_string(rate));
      }
      WavAudio audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        audio.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(path + ": no data chunk");
}

void WriteWav(const std::string& path, std::span<const double> samples,
              int sample_rate) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.append("RIFF");
  PutU32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(sample_rate));
  PutU32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out.append("data");
  PutU32(out, data_bytes);
  for (double s : samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
    PutU16(out, static_cast<std::uint16_t>(q));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path);
}

}  // namespace unifyspeech
