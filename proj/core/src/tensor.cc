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

#include "unifyspeech/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace internal {

std::vector<double>& Node::EnsureGrad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  return grad;
}

}  // namespace internal

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  auto node = std::make_shared<internal::Node>();
  node->data.assign(NumElements(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::FromData(Shape shape, std::vector<double> data,
                        bool requires_grad) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("FromData: shape " + ShapeToString(shape) + " needs " +
                         std::to_string(NumElements(shape)) +
                         " values, got " + std::to_string(data.size()));
  }
  auto node = std::make_shared<internal::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromData({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::size() const { return node_->data.size(); }

std::size_t Tensor::rows() const {
  return node_->shape.size() == 2 ? node_->shape[0] : 1;
}

std::size_t Tensor::cols() const {
  if (node_->shape.empty()) return 1;
  return node_->shape.back();
}

std::span<const double> Tensor::data() const { return node_->data; }

std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + ShapeToString(shape()));
  }
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool value) { node_->requires_grad = value; }

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() { return node_->EnsureGrad(); }

void Tensor::ZeroGrad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::ClearGrad() {
  node_->grad.clear();
  node_->grad.shrink_to_fit();
}

void Tensor::Backward() const {
  if (NumElements(shape()) != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        ShapeToString(shape()));
  }
  if (!requires_grad()) {
    throw ContractError("backward on a tensor that does not require grad");
  }
  std::vector<internal::Node*> order = TopologicalOrder(*this);
  // Intermediate gradients are per-call; leaf gradients accumulate.
  for (internal::Node* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  }
  node_->EnsureGrad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    internal::Node* n = *it;
    if (n->backward) n->backward(*n);
  }
  for (internal::Node* n : order) {
    if (!n->is_leaf()) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

Tensor Tensor::Detach() const {
  return FromData(shape(), node_->data, false);
}

Tensor Tensor::Clone() const {
  Tensor t = FromData(shape(), node_->data, node_->requires_grad);
  return t;
}

bool Tensor::IsFinite() const {
  return std::all_of(node_->data.begin(), node_->data.end(),
                     [](double v) { return std::isfinite(v); });
}

const char* Tensor::op_name() const { return node_->op; }

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::vector<internal::Node*> TopologicalOrder(const Tensor& root) {
  std::vector<internal::Node*> order;
  if (!root.defined() || !root.requires_grad()) return order;
  std::unordered_set<internal::Node*> visited;
  // Iterative post-order DFS; deep graphs (long training chains) would blow
  // the stack with recursion.
  std::vector<std::pair<internal::Node*, std::size_t>> stack;
  internal::Node* start = root.node().get();
  stack.emplace_back(start, 0);
  visited.insert(start);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      internal::Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace unifyspeech
