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

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace mst {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

std::string shape_string(const Shape& shape);
Index shape_size(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  Vector value;
  Vector grad;  // empty until first accumulation
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Eigen::Ref<const Vector>& g);
};

}  // namespace detail

// Dense row-major double tensor with an optional reverse-mode gradient node.
//
// A Tensor is a cheap handle; copies share the underlying node. Values are
// treated as immutable once built, except for leaf parameters updated by the
// optimizer.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, Vector data);
  static Tensor zeros(Shape shape);
  static Tensor parameter(Shape shape, Vector data);
  static Tensor matrix(const RowMatrix& m, bool requires_grad = false);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index dim() const { return static_cast<Index>(node_->shape.size()); }
  Index size() const { return node_->value.size(); }
  Index rows() const;
  Index cols() const;

  const Vector& value() const { return node_->value; }
  Vector& mutable_value() { return node_->value; }
  ConstMatrixMap mat() const;
  double item() const;
  double at(Index i) const { return node_->value[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() > 0; }
  const Vector& grad() const { return node_->grad; }
  ConstMatrixMap grad_mat() const;
  void zero_grad();
  void clear_grad() { node_->grad.resize(0); }

  // Accumulates d(this)/d(leaf) into every reachable leaf that requires
  // gradients. Intermediate gradients are reset on each call, leaf gradients
  // are not.
  void backward() const;

  std::shared_ptr<detail::Node> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_result(Shape, Vector, std::initializer_list<Tensor>,
                            std::function<void(detail::Node&)>);
};

// Builds the output node of a differentiable op. The backward callback is
// dropped when gradients are disabled or no input requires them.
Tensor make_result(Shape shape, Vector value, std::initializer_list<Tensor> inputs,
                   std::function<void(detail::Node&)> backward);

bool grad_enabled();

// Disables graph recording in the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace mst
