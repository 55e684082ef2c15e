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

#ifndef UNIFYSPEECH_TENSOR_H_
#define UNIFYSPEECH_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace unifyspeech {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

namespace internal {

// One vertex of the dynamic compute graph. A node owns its forward value and,
// once touched by backward, its gradient. Non-leaf nodes keep strong
// references to their inputs, so holding the loss keeps the whole graph alive.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }
  std::vector<double>& EnsureGrad();
};

}  // namespace internal

// Dense row-major float64 array with reverse-mode gradient tracking.
//
// Tensor is a cheap handle: copies share storage, which is what lets a
// parameter be referenced by several modules (and both pipelines) at once.
// Use Clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<double> data,
                         bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Leading dimension of a rank-2 tensor (1 for rank 0/1).
  std::size_t rows() const;
  // Trailing dimension of a rank-2 tensor (the length of a rank-1 tensor).
  std::size_t cols() const;

  std::span<const double> data() const;
  // Writes bypass the graph; only use on leaves or freshly built tensors.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void ZeroGrad();
  void ClearGrad();

  // Reverse-mode differentiation from this scalar. Leaf gradients accumulate
  // across calls until ZeroGrad/ClearGrad.
  void Backward() const;

  Tensor Detach() const;
  Tensor Clone() const;
  bool IsFinite() const;
  bool SameStorage(const Tensor& other) const { return node_ == other.node_; }

  const char* op_name() const;
  std::shared_ptr<internal::Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<internal::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<internal::Node> node_;
};

// Graph recording switch. Ops produce nodes with backward closures only while
// grad mode is enabled and at least one input requires grad.
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Nodes reachable from `root` through requires_grad edges, inputs before
// consumers. Each node appears once.
std::vector<internal::Node*> TopologicalOrder(const Tensor& root);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_TENSOR_H_
