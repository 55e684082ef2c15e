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

#ifndef UNIFYSPEECH_ADAM_H_
#define UNIFYSPEECH_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unifyspeech/tensor.h"

namespace unifyspeech {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments of one parameter. m and v have the parameter's element count.
struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// Bias-corrected Adam update of a flat parameter in place:
//   m = b1 m + (1 - b1) g;  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// With sparse_row_width > 0 the parameter is treated as rows of that width
// and rows whose gradient is entirely zero are left untouched, moments
// included (lazy update for lookup tables such as the codebook).
void AdamStep(std::span<double> param, std::span<const double> grad,
              AdamSlot& slot, const AdamOptions& options,
              std::size_t sparse_row_width = 0);

class Adam {
 public:
  struct Param {
    std::string name;
    Tensor tensor;
    bool row_sparse = false;
  };

  Adam(std::vector<Param> params, AdamOptions options);

  // Rescales all present gradients so their joint L2 norm is at most
  // max_norm. Returns the norm before clipping.
  double ClipGradNorm(double max_norm);

  // Updates every parameter that holds a gradient; parameters without one
  // (untouched by the last backward) are skipped. Throws NumericError naming
  // the parameter if any gradient is non-finite, before modifying anything.
  void Step();
  void ClearGrads();

  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }

  const std::vector<Param>& params() const { return params_; }
  std::vector<AdamSlot>& slots() { return slots_; }
  const std::vector<AdamSlot>& slots() const { return slots_; }

 private:
  std::vector<Param> params_;
  std::vector<AdamSlot> slots_;
  AdamOptions options_;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_ADAM_H_
