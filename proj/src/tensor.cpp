/*
   Copyright 2026 The mst Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "mst/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "mst/error.hpp"

namespace mst {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) n *= e;
  return n;
}

void detail::Node::accumulate(const Eigen::Ref<const Vector>& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

namespace {

std::shared_ptr<detail::Node> new_node(Shape shape, Vector data) {
  for (Index e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape));
  }
  if (shape_size(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_string(shape));
  }
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(data);
  return n;
}

}  // namespace

Tensor Tensor::constant(Shape shape, Vector data) {
  return Tensor(new_node(std::move(shape), std::move(data)));
}

Tensor Tensor::zeros(Shape shape) {
  const Index n = shape_size(shape);
  return constant(std::move(shape), Vector::Zero(n));
}

Tensor Tensor::parameter(Shape shape, Vector data) {
  auto n = new_node(std::move(shape), std::move(data));
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Tensor Tensor::matrix(const RowMatrix& m, bool requires_grad) {
  Vector data = Eigen::Map<const Vector>(m.data(), m.size());
  auto n = new_node({m.rows(), m.cols()}, std::move(data));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return constant({1}, Vector::Constant(1, v)); }

Index Tensor::rows() const { return node_->shape.empty() ? 1 : node_->shape.front(); }

Index Tensor::cols() const {
  if (node_->shape.size() < 2) return 1;
  return node_->value.size() / node_->shape.front();
}

ConstMatrixMap Tensor::mat() const { return ConstMatrixMap(node_->value.data(), rows(), cols()); }

ConstMatrixMap Tensor::grad_mat() const {
  return ConstMatrixMap(node_->grad.data(), rows(), cols());
}

double Tensor::item() const {
  if (size() != 1) throw UsageError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() { node_->grad = Vector::Zero(node_->value.size()); }

void Tensor::backward() const {
  if (size() != 1) {
    throw UsageError("backward() needs a scalar loss, got shape " + shape_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (detail::Node* n : order) {
    if (!n->leaf) n->grad = Vector::Zero(n->value.size());
  }
  if (node_->leaf) {
    node_->accumulate(Vector::Ones(1));
    return;
  }
  node_->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->leaf && n->backward) n->backward(*n);
  }
}

Tensor make_result(Shape shape, Vector value, std::initializer_list<Tensor> inputs,
                   std::function<void(detail::Node&)> backward) {
  auto n = new_node(std::move(shape), std::move(value));
  bool needs = false;
  if (g_grad_enabled) {
    for (const Tensor& t : inputs) needs = needs || t.requires_grad();
  }
  if (needs) {
    n->requires_grad = true;
    n->leaf = false;
    n->parents.reserve(inputs.size());
    for (const Tensor& t : inputs) n->parents.push_back(t.node());
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace mst
