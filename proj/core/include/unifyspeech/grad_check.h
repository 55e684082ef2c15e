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

#ifndef UNIFYSPEECH_GRAD_CHECK_H_
#define UNIFYSPEECH_GRAD_CHECK_H_

#include <cstddef>
#include <functional>

#include "unifyspeech/tensor.h"

namespace unifyspeech {

struct GradCheckResult {
  // Graphs containing a straight-through node are not checked: the estimator
  // is not the true derivative of the forward map.
  bool skipped = false;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
};

// Compares the analytic gradient of scalar f at x with central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h. The relative error per coordinate uses
// the denominator max(|analytic|, |numeric|, 1e-8). f must be deterministic.
GradCheckResult GradCheck(const std::function<Tensor(const Tensor&)>& f,
                          const Tensor& x, double h = 1e-5);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_GRAD_CHECK_H_
