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

#include "unifyspeech/grad_check.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

bool ContainsStraightThrough(const Tensor& root) {
  for (const internal::Node* n : TopologicalOrder(root)) {
    if (std::strcmp(n->op, "straight_through") == 0) return true;
  }
  return false;
}

}  // namespace

GradCheckResult GradCheck(const std::function<Tensor(const Tensor&)>& f,
                          const Tensor& x, double h) {
  GradCheckResult result;
  Tensor probe = Tensor::FromData(x.shape(),
                                  std::vector<double>(x.data().begin(), x.data().end()),
                                  /*requires_grad=*/true);
  Tensor loss = f(probe);
  if (loss.size() != 1) throw ContractError("grad_check: f must return a scalar");
  if (ContainsStraightThrough(loss)) {
    result.skipped = true;
    return result;
  }
  loss.Backward();
  std::vector<double> analytic(probe.size(), 0.0);
  if (probe.has_grad()) {
    std::copy(probe.grad().begin(), probe.grad().end(), analytic.begin());
  }

  NoGradGuard no_grad;
  std::vector<double> base(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> plus = base, minus = base;
    plus[i] += h;
    minus[i] -= h;
    const double fp = f(Tensor::FromData(x.shape(), std::move(plus))).item();
    const double fm = f(Tensor::FromData(x.shape(), std::move(minus))).item();
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (err > result.max_relative_error || !std::isfinite(err)) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace unifyspeech
