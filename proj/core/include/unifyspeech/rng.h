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

#ifndef UNIFYSPEECH_RNG_H_
#define UNIFYSPEECH_RNG_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace unifyspeech {

// Stable 64-bit hash of a stream name (FNV-1a).
std::uint64_t StreamId(std::string_view name);

// Counter-based generator: the n-th output is a pure function of
// (key, n), where key mixes a seed with any number of stream ids. Two
// generators built from the same (seed, streams...) produce identical
// sequences, which is what makes dropout masks reproducible from
// (seed, layer, step, example) without threading state through the model.
//
// Satisfies UniformRandomBitGenerator, so std distributions work on it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(Mix(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : key_(Mix(Mix(seed) ^ Mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  // Derives an independent child stream.
  Rng Fork(std::uint64_t stream) const;
  Rng Fork(std::string_view name) const { return Fork(StreamId(name)); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  // Standard normal, Box-Muller on two uniforms (no cached spare, so the
  // draw count per call is fixed).
  double Normal();
  // Uniform integer in [lo, hi].
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t Mix(std::uint64_t z);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_RNG_H_
