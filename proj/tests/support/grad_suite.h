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

// Finite-difference gradient checks over every differentiable op, shared by
// the unit tests and the acceptance binary.

#ifndef UNIFYSPEECH_TESTS_SUPPORT_GRAD_SUITE_H_
#define UNIFYSPEECH_TESTS_SUPPORT_GRAD_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace unifyspeech::testing {

struct OpGradResult {
  std::string op;
  int cases = 0;
  double worst_error = 0.0;
};

// Each op is checked on `cases` random inputs (shapes drawn per case).
std::vector<OpGradResult> RunGradientSuite(int cases, std::uint64_t seed);

// Names of every op in the suite.
std::vector<std::string> GradientSuiteOps();
OpGradResult RunGradientCase(const std::string& op, int cases, std::uint64_t seed);

// Straight-through checks: forward equals the quantized tensor bitwise, the
// continuous input receives the upstream gradient unchanged and the
// quantized input receives none. Returns an empty string on success.
std::string CheckStraightThrough(int cases, std::uint64_t seed);

}  // namespace unifyspeech::testing

#endif  // UNIFYSPEECH_TESTS_SUPPORT_GRAD_SUITE_H_
