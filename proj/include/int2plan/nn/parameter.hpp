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

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "int2plan/error.hpp"

namespace int2plan::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// A trainable tensor. Storage is a row-major matrix whose column count is the
/// last logical dimension; `dims` keeps the logical shape for checkpoints.
template <typename Scalar>
struct Parameter
{
  std::string name;
  std::vector<std::uint64_t> dims;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  Matrix<Scalar> first_moment;
  Matrix<Scalar> second_moment;
  std::int64_t step = 0;
};

/// Owns every parameter of a model. Addresses are stable for the store's life.
template <typename Scalar>
class ParameterStore
{
public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore &) = delete;
  ParameterStore & operator=(const ParameterStore &) = delete;
  ParameterStore(ParameterStore &&) noexcept = default;
  ParameterStore & operator=(ParameterStore &&) noexcept = default;

  Parameter<Scalar> & add(std::string name, std::vector<std::uint64_t> dims, Matrix<Scalar> value)
  {
    if (index_.count(name)) throw Error("nn_core", "duplicate parameter name '" + name + "'");
    auto p = std::make_unique<Parameter<Scalar>>();
    p->name = std::move(name);
    p->dims = std::move(dims);
    p->grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
    p->first_moment = Matrix<Scalar>::Zero(value.rows(), value.cols());
    p->second_moment = Matrix<Scalar>::Zero(value.rows(), value.cols());
    p->value = std::move(value);
    index_[p->name] = params_.size();
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter<Scalar> * find(const std::string & name)
  {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<Scalar> * find(const std::string & name) const
  {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  std::size_t size() const { return params_.size(); }
  Parameter<Scalar> & operator[](std::size_t i) { return *params_[i]; }
  const Parameter<Scalar> & operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad()
  {
    for (auto & p : params_) p->grad.setZero();
  }

  std::size_t num_scalars() const
  {
    std::size_t n = 0;
    for (const auto & p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

  /// Copies values and optimizer state from a store with identical names and
  /// shapes, converting the scalar type.
  template <typename Other>
  void copy_from(const ParameterStore<Other> & other)
  {
    for (auto & p : params_) {
      const auto * src = other.find(p->name);
      if (src == nullptr) throw Error("nn_core", "missing parameter '" + p->name + "'");
      if (src->value.rows() != p->value.rows() || src->value.cols() != p->value.cols()) {
        throw Error("nn_core", "shape mismatch for parameter '" + p->name + "'");
      }
      p->value = src->value.template cast<Scalar>();
      p->first_moment = src->first_moment.template cast<Scalar>();
      p->second_moment = src->second_moment.template cast<Scalar>();
      p->step = src->step;
    }
  }

private:
  std::vector<std::unique_ptr<Parameter<Scalar>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace int2plan::nn
