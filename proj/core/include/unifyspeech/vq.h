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

// Shared content codebook. Both the text-derived content (C_p) and the
// speech-derived content (C_s) snap to the nearest entry of the same
// Codebook; the straight-through estimator carries gradients past the
// snapping, and the pair loss ties the two quantized sequences together.

#ifndef UNIFYSPEECH_VQ_H_
#define UNIFYSPEECH_VQ_H_

#include <cstdint>
#include <vector>

#include "unifyspeech/layers.h"
#include "unifyspeech/rng.h"
#include "unifyspeech/tensor.h"

namespace unifyspeech {

class Codebook {
 public:
  Codebook() = default;
  Codebook(ParameterStore& store, std::size_t size, std::size_t dim, Rng& rng);

  std::size_t size() const { return entries_.defined() ? entries_.rows() : 0; }
  std::size_t dim() const { return entries_.cols(); }
  // [V x d], learnable.
  const Tensor& entries() const { return entries_; }
  Tensor& mutable_entries() { return entries_; }

  // Number of times each entry won a lookup.
  const std::vector<std::int64_t>& usage() const { return usage_; }
  std::vector<std::int64_t>& mutable_usage() { return usage_; }
  // Consecutive training steps each entry went unused.
  const std::vector<std::int64_t>& idle_steps() const { return idle_; }
  std::vector<std::int64_t>& mutable_idle_steps() { return idle_; }

  // Copies V distinct randomly chosen rows of `rows` into the entries; falls
  // back to N(0, 0.1^2) when fewer than V rows are available. Returns true on
  // the data-dependent path.
  bool InitializeFromRows(const Tensor& rows, Rng& rng);

  // Marks the end of a training step. `used` flags entries selected during
  // the step. Entries idle for at least `dead_after` consecutive steps are
  // re-seeded from random rows of `recent` and their indices returned.
  std::vector<std::size_t> EndStep(const std::vector<bool>& used,
                                   const Tensor& recent, std::size_t dead_after,
                                   Rng& rng);

 private:
  Tensor entries_;
  std::vector<std::int64_t> usage_;
  std::vector<std::int64_t> idle_;
};

struct QuantizedContent {
  std::vector<int> codes;
  // Forward values are the selected codebook rows, bitwise. When quantization
  // is active they are produced by StraightThrough, so gradients reach the
  // continuous content, never the codebook.
  Tensor vectors;
  // The continuous input (C_p or C_s).
  Tensor continuous;
  // Codebook the codes index into; nullptr for identity pass-through.
  const Codebook* source = nullptr;

  std::size_t length() const { return vectors.rows(); }
};

// Index of the entry at minimum squared L2 distance per row of `content`;
// ties go to the lowest index.
std::vector<int> NearestCodes(const Tensor& content, const Tensor& entries);

// Quantizes each row of c to its nearest codebook entry and wraps the result
// in the straight-through estimator. Increments usage counters when
// `count_usage` is set.
QuantizedContent VqLookup(const Tensor& content, Codebook& book,
                          bool count_usage = true);
// Read-only lookup for evaluation; leaves usage counters alone.
QuantizedContent VqLookup(const Tensor& content, const Codebook& book);

// No-VQ ablation: the "quantized" sequence is the continuous one.
QuantizedContent IdentityQuantize(const Tensor& content);

// Mean over all T x d entries of (qp - qs)^2. Throws PairingError when the
// two sequences have different lengths.
Tensor PairLoss(const QuantizedContent& qp, const QuantizedContent& qs);

// Codebook plus commitment loss:
//   mean (sg(c) - e[codes])^2 + beta * mean (c - sg(e[codes]))^2
// The first term trains the entries, the second the encoder. Zero for the
// identity pass-through.
Tensor VqAuxLoss(const QuantizedContent& q, double beta);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_VQ_H_
