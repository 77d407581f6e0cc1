// Copyright 2026 The Int2Plan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "int2plan/error.hpp"
#include "int2plan/nn/parameter.hpp"

namespace int2plan::nn {

template <typename Scalar>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <typename Scalar>
class Var
{
public:
  Var() = default;
  Var(Graph<Scalar> * graph, int id) : graph_(graph), id_(id) {}

  const Matrix<Scalar> & value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Graph<Scalar> & graph() const { return *graph_; }
  int id() const { return id_; }
  bool defined() const { return graph_ != nullptr; }

private:
  Graph<Scalar> * graph_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
/// creation order is a valid topological order for backward.
template <typename Scalar>
class Graph
{
public:
  using Mat = Matrix<Scalar>;
  using BackwardFn = std::function<void(Graph &, const Mat & grad_out)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph &) = delete;
  Graph & operator=(const Graph &) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var<Scalar> constant(Mat value) { return push(std::move(value), false, nullptr, nullptr); }

  /// Leaf that collects a gradient (used for input-gradient checks).
  Var<Scalar> input(Mat value) { return push(std::move(value), grad_enabled_, nullptr, nullptr); }

  Var<Scalar> parameter(Parameter<Scalar> & p)
  {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Var<Scalar>(this, it->second);
    auto v = push(Mat(), grad_enabled_, nullptr, &p);
    param_nodes_[&p] = v.id();
    return v;
  }

  /// Appends an op result. `backward` receives the output gradient and must
  /// call accumulate() on its inputs.
  Var<Scalar> record(
    const char * op, Mat value, std::initializer_list<Var<Scalar>> inputs, BackwardFn backward)
  {
    return record_span(op, std::move(value), std::vector<Var<Scalar>>(inputs), std::move(backward));
  }

  Var<Scalar> record_span(
    const char * op, Mat value, const std::vector<Var<Scalar>> & inputs, BackwardFn backward)
  {
    if (consumed_) throw Error("nn_core", "graph reused after backward");
    if (!value.allFinite()) throw Error("nn_core", std::string("non-finite value produced by ") + op);
    bool needs = false;
    for (const auto & in : inputs) needs = needs || nodes_[in.id()].requires_grad;
    return push(std::move(value), needs, needs ? std::move(backward) : BackwardFn(), nullptr);
  }

  const Mat & value(int id) const
  {
    const auto & n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }

  bool requires_grad(const Var<Scalar> & v) const { return nodes_[v.id()].requires_grad; }

  /// Gradient of the last backward() w.r.t. `v`; zeros when unreached.
  Mat grad(const Var<Scalar> & v) const
  {
    const auto & n = nodes_[v.id()];
    if (n.grad.size() == 0) return Mat::Zero(value(v.id()).rows(), value(v.id()).cols());
    return n.grad;
  }

  template <typename Derived>
  void accumulate(const Var<Scalar> & v, const Eigen::MatrixBase<Derived> & delta)
  {
    auto & n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = delta;
    else n.grad += delta;
  }

  /// Propagates d(loss)/d(node) to every reachable node and adds parameter
  /// gradients into Parameter::grad.
  void backward(const Var<Scalar> & loss)
  {
    if (consumed_) throw Error("nn_core", "backward called twice on the same graph");
    const auto & lv = value(loss.id());
    if (lv.rows() != 1 || lv.cols() != 1) throw Error("nn_core", "backward requires a scalar loss");
    consumed_ = true;
    if (!nodes_[loss.id()].requires_grad) return;
    nodes_[loss.id()].grad = Mat::Ones(1, 1);
    for (int i = loss.id(); i >= 0; --i) {
      auto & n = nodes_[i];
      if (n.grad.size() == 0) continue;
      if (n.param) {
        n.param->grad += n.grad;
      } else if (n.backward) {
        n.backward(*this, n.grad);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

private:
  struct Node
  {
    Mat value;
    Mat grad;
    BackwardFn backward;
    Parameter<Scalar> * param = nullptr;
    bool requires_grad = false;
  };

  Var<Scalar> push(Mat value, bool requires_grad, BackwardFn backward, Parameter<Scalar> * param)
  {
    if (consumed_) throw Error("nn_core", "graph reused after backward");
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    n.param = param;
    nodes_.push_back(std::move(n));
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar> *, int> param_nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

template <typename Scalar>
const Matrix<Scalar> & Var<Scalar>::value() const
{
  return graph_->value(id_);
}

}  // namespace int2plan::nn
