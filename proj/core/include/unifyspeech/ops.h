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

// Differentiable operations over Tensor. Every op validates shapes and throws
// DimensionError naming the offending shapes. Rank-2 tensors are [rows x cols]
// sequences (time x channels) throughout.

#ifndef UNIFYSPEECH_OPS_H_
#define UNIFYSPEECH_OPS_H_

#include <span>
#include <vector>

#include "unifyspeech/rng.h"
#include "unifyspeech/tensor.h"

namespace unifyspeech {

// [m x k] x [k x n] -> [m x n]
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double factor);
// x [T x d] + v [d], broadcast over rows.
Tensor AddRowVector(const Tensor& x, const Tensor& v);
Tensor Relu(const Tensor& x);
Tensor Reshape(const Tensor& x, Shape shape);

// Row-wise softmax of a rank-2 tensor.
Tensor SoftmaxRows(const Tensor& x);

// Per-row standardization followed by gain * xhat + bias. gain and bias are
// rank-1 [d].
Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);

// Temporal convolution with symmetric zero padding.
// x [T x Cin], kernel [K x Cin x Cout], K odd -> [T x Cout].
Tensor Conv1d(const Tensor& x, const Tensor& kernel);

// out[i] = table[indices[i]]; gradient scatter-adds back into the table.
Tensor GatherRows(const Tensor& table, std::span<const int> indices);
// Mean over rows: [T x d] -> [d].
Tensor MeanRows(const Tensor& x);
Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor ConcatCols(std::span<const Tensor> parts);

// Inverted dropout. Identity when !training or rate == 0; draws exactly one
// uniform per element from `rng` otherwise.
Tensor Dropout(const Tensor& x, double rate, Rng& rng, bool training);

Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
// Mean of elementwise squared differences.
Tensor Mse(const Tensor& a, const Tensor& b);
// Mean over rows of -log softmax(logits)[row, target[row]].
Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> targets);

// Forward value is `quantized` (bitwise); backward hands the upstream gradient
// to `continuous` unchanged and nothing to `quantized`. Equivalent to
// c + e - sg(c).
Tensor StraightThrough(const Tensor& continuous, const Tensor& quantized);

inline Tensor StopGradient(const Tensor& x) { return x.Detach(); }

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_OPS_H_
