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

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "int2plan/nn/graph.hpp"

namespace int2plan::nn {

namespace detail {

template <typename Scalar>
void require_same_shape(const Var<Scalar> & a, const Var<Scalar> & b, const char * op)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(
      "nn_core", std::string(op) + ": shape mismatch [" + std::to_string(a.rows()) + "," +
                   std::to_string(a.cols()) + "] vs [" + std::to_string(b.rows()) + "," +
                   std::to_string(b.cols()) + "]");
  }
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar> & a, const Var<Scalar> & b)
{
  if (a.cols() != b.rows()) throw Error("nn_core", "matmul: inner dimensions differ");
  Matrix<Scalar> out = a.value() * b.value();
  return a.graph().record("matmul", std::move(out), {a, b}, [a, b](Graph<Scalar> & g, const auto & go) {
    if (g.requires_grad(a)) g.accumulate(a, go * b.value().transpose());
    if (g.requires_grad(b)) g.accumulate(b, a.value().transpose() * go);
  });
}

/// a * b^T.
template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar> & a, const Var<Scalar> & b)
{
  if (a.cols() != b.cols()) throw Error("nn_core", "matmul_nt: inner dimensions differ");
  Matrix<Scalar> out = a.value() * b.value().transpose();
  return a.graph().record("matmul_nt", std::move(out), {a, b}, [a, b](Graph<Scalar> & g, const auto & go) {
    if (g.requires_grad(a)) g.accumulate(a, go * b.value());
    if (g.requires_grad(b)) g.accumulate(b, go.transpose() * a.value());
  });
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar> & a, const Var<Scalar> & b)
{
  detail::require_same_shape(a, b, "add");
  Matrix<Scalar> out = a.value() + b.value();
  return a.graph().record("add", std::move(out), {a, b}, [a, b](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, go);
    g.accumulate(b, go);
  });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar> & a, const Var<Scalar> & b)
{
  detail::require_same_shape(a, b, "sub");
  Matrix<Scalar> out = a.value() - b.value();
  return a.graph().record("sub", std::move(out), {a, b}, [a, b](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, go);
    g.accumulate(b, -go);
  });
}

/// Adds a [1, n] row to every row of a.
template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar> & a, const Var<Scalar> & row)
{
  if (row.rows() != 1 || row.cols() != a.cols()) throw Error("nn_core", "add_row: shape mismatch");
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return a.graph().record("add_row", std::move(out), {a, row}, [a, row](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, go);
    if (g.requires_grad(row)) g.accumulate(row, go.colwise().sum());
  });
}

template <typename Scalar>
Var<Scalar> mul(const Var<Scalar> & a, const Var<Scalar> & b)
{
  detail::require_same_shape(a, b, "mul");
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return a.graph().record("mul", std::move(out), {a, b}, [a, b](Graph<Scalar> & g, const auto & go) {
    if (g.requires_grad(a)) g.accumulate(a, go.cwiseProduct(b.value()));
    if (g.requires_grad(b)) g.accumulate(b, go.cwiseProduct(a.value()));
  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar> & a, Scalar s)
{
  Matrix<Scalar> out = a.value() * s;
  return a.graph().record("scale", std::move(out), {a}, [a, s](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, go * s);
  });
}

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar> & a)
{
  Matrix<Scalar> out = a.value().cwiseMax(Scalar(0));
  return a.graph().record("relu", std::move(out), {a}, [a](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, (a.value().array() > Scalar(0)).select(go, Scalar(0)));
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>> & parts)
{
  if (parts.empty()) throw Error("nn_core", "concat_cols: no inputs");
  const auto rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto & p : parts) {
    if (p.rows() != rows) throw Error("nn_core", "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (const auto & p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return parts.front().graph().record_span(
    "concat_cols", std::move(out), parts, [parts](Graph<Scalar> & g, const auto & go) {
      Eigen::Index offset = 0;
      for (const auto & p : parts) {
        if (g.requires_grad(p)) g.accumulate(p, go.middleCols(offset, p.cols()));
        offset += p.cols();
      }
    });
}

template <typename Scalar>
Var<Scalar> concat_rows(const std::vector<Var<Scalar>> & parts)
{
  if (parts.empty()) throw Error("nn_core", "concat_rows: no inputs");
  const auto cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto & p : parts) {
    if (p.cols() != cols) throw Error("nn_core", "concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (const auto & p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return parts.front().graph().record_span(
    "concat_rows", std::move(out), parts, [parts](Graph<Scalar> & g, const auto & go) {
      Eigen::Index offset = 0;
      for (const auto & p : parts) {
        if (g.requires_grad(p)) g.accumulate(p, go.middleRows(offset, p.rows()));
        offset += p.rows();
      }
    });
}

template <typename Scalar>
Var<Scalar> slice_rows(const Var<Scalar> & a, Eigen::Index start, Eigen::Index count)
{
  if (start < 0 || count < 0 || start + count > a.rows()) throw Error("nn_core", "slice_rows: out of range");
  Matrix<Scalar> out = a.value().middleRows(start, count);
  return a.graph().record("slice_rows", std::move(out), {a}, [a, start, count](Graph<Scalar> & g, const auto & go) {
    Matrix<Scalar> full = Matrix<Scalar>::Zero(a.rows(), a.cols());
    full.middleRows(start, count) = go;
    g.accumulate(a, full);
  });
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar> & a, Eigen::Index start, Eigen::Index count)
{
  if (start < 0 || count < 0 || start + count > a.cols()) throw Error("nn_core", "slice_cols: out of range");
  Matrix<Scalar> out = a.value().middleCols(start, count);
  return a.graph().record("slice_cols", std::move(out), {a}, [a, start, count](Graph<Scalar> & g, const auto & go) {
    Matrix<Scalar> full = Matrix<Scalar>::Zero(a.rows(), a.cols());
    full.middleCols(start, count) = go;
    g.accumulate(a, full);
  });
}

/// Reinterprets the row-major data with a new shape.
template <typename Scalar>
Var<Scalar> reshape(const Var<Scalar> & a, Eigen::Index rows, Eigen::Index cols)
{
  if (rows * cols != a.value().size()) throw Error("nn_core", "reshape: element count differs");
  Matrix<Scalar> out = Eigen::Map<const Matrix<Scalar>>(a.value().data(), rows, cols);
  return a.graph().record("reshape", std::move(out), {a}, [a](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, Eigen::Map<const Matrix<Scalar>>(go.data(), a.rows(), a.cols()));
  });
}

/// Rows whose mask entry is false become exact zeros.
template <typename Scalar>
Var<Scalar> mask_rows(const Var<Scalar> & a, const Mask & row_mask)
{
  if (row_mask.size() != a.rows()) throw Error("nn_core", "mask_rows: mask length mismatch");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (row_mask(r)) out.row(r) = a.value().row(r);
  }
  return a.graph().record("mask_rows", std::move(out), {a}, [a, row_mask](Graph<Scalar> & g, const auto & go) {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(go.rows(), go.cols());
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      if (row_mask(r)) d.row(r) = go.row(r);
    }
    g.accumulate(a, d);
  });
}

/// Masked max over consecutive groups of `group_size` rows: [N*T, D] -> [N, D].
/// Groups without a valid row produce zeros. Gradient goes to the argmax rows.
template <typename Scalar>
Var<Scalar> max_pool_groups(const Var<Scalar> & a, Eigen::Index group_size, const Mask & row_mask)
{
  if (group_size <= 0 || a.rows() % group_size != 0) throw Error("nn_core", "max_pool: bad group size");
  if (row_mask.size() != a.rows()) throw Error("nn_core", "max_pool: mask length mismatch");
  const Eigen::Index groups = a.rows() / group_size;
  const Eigen::Index dims = a.cols();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(groups, dims);
  Eigen::Array<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax =
    Eigen::Array<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(groups, dims, -1);
  const auto & x = a.value();
  for (Eigen::Index n = 0; n < groups; ++n) {
    for (Eigen::Index t = 0; t < group_size; ++t) {
      const Eigen::Index r = n * group_size + t;
      if (!row_mask(r)) continue;
      for (Eigen::Index d = 0; d < dims; ++d) {
        if (argmax(n, d) < 0 || x(r, d) > out(n, d)) {
          out(n, d) = x(r, d);
          argmax(n, d) = r;
        }
      }
    }
  }
  return a.graph().record("max_pool", std::move(out), {a}, [a, argmax](Graph<Scalar> & g, const auto & go) {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(a.rows(), a.cols());
    for (Eigen::Index n = 0; n < argmax.rows(); ++n) {
      for (Eigen::Index c = 0; c < argmax.cols(); ++c) {
        if (argmax(n, c) >= 0) d(argmax(n, c), c) += go(n, c);
      }
    }
    g.accumulate(a, d);
  });
}

/// Row-wise softmax over the columns whose key mask is true. Masked columns
/// get exactly zero weight. Throws when no column is unmasked.
template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar> & a, const Mask & col_mask)
{
  if (col_mask.size() != a.cols()) throw Error("nn_core", "softmax: mask length mismatch");
  if (!col_mask.any()) throw Error("nn_core", "softmax: all keys masked");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), a.cols());
  const auto & x = a.value();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Scalar peak = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (col_mask(c)) peak = std::max(peak, x(r, c));
    }
    Scalar total = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (!col_mask(c)) continue;
      out(r, c) = std::exp(x(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  Matrix<Scalar> probs = out;
  return a.graph().record("softmax", std::move(out), {a}, [a, probs](Graph<Scalar> & g, const auto & go) {
    const auto inner = go.cwiseProduct(probs).rowwise().sum();
    Matrix<Scalar> d = probs.cwiseProduct(go - inner.replicate(1, go.cols()));
    g.accumulate(a, d);
  });
}

/// Per-row layer normalisation with affine [1, D] gain and bias.
template <typename Scalar>
Var<Scalar> layer_norm(
  const Var<Scalar> & a, const Var<Scalar> & gain, const Var<Scalar> & bias, Scalar eps = Scalar(1e-5))
{
  const auto dims = a.cols();
  if (gain.rows() != 1 || gain.cols() != dims || bias.rows() != 1 || bias.cols() != dims) {
    throw Error("nn_core", "layer_norm: affine shape mismatch");
  }
  const auto & x = a.value();
  Matrix<Scalar> normalized(x.rows(), dims);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).mean();
    const Scalar var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = Scalar(1) / std::sqrt(var + eps);
    normalized.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Matrix<Scalar> out =
    (normalized.array().rowwise() * gain.value().row(0).array()).rowwise() + bias.value().row(0).array();
  return a.graph().record(
    "layer_norm", std::move(out), {a, gain, bias},
    [a, gain, bias, normalized, inv_std](Graph<Scalar> & g, const auto & go) {
      if (g.requires_grad(gain)) g.accumulate(gain, go.cwiseProduct(normalized).colwise().sum());
      if (g.requires_grad(bias)) g.accumulate(bias, go.colwise().sum());
      if (!g.requires_grad(a)) return;
      Matrix<Scalar> dn = go.array().rowwise() * gain.value().row(0).array();
      Matrix<Scalar> dx(dn.rows(), dn.cols());
      for (Eigen::Index r = 0; r < dn.rows(); ++r) {
        const Scalar mean_dn = dn.row(r).mean();
        const Scalar mean_dn_n = dn.row(r).cwiseProduct(normalized.row(r)).mean();
        dx.row(r) =
          inv_std(r) * (dn.row(r).array() - mean_dn - normalized.row(r).array() * mean_dn_n);
      }
      g.accumulate(a, dx);
    });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar> & a)
{
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.graph().record("sum", std::move(out), {a}, [a](Graph<Scalar> & g, const auto & go) {
    g.accumulate(a, Matrix<Scalar>::Constant(a.rows(), a.cols(), go(0, 0)));
  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar> & a)
{
  return scale(sum(a), Scalar(1) / static_cast<Scalar>(a.value().size()));
}

/// Sum of several scalars.
template <typename Scalar>
Var<Scalar> add_all(const std::vector<Var<Scalar>> & terms)
{
  if (terms.empty()) throw Error("nn_core", "add_all: no terms");
  Var<Scalar> total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  return total;
}

/// Mean absolute error over the valid rows of pred [T, C] against a constant target.
template <typename Scalar>
Var<Scalar> l1_loss(const Var<Scalar> & pred, const Matrix<Scalar> & target, const Mask & valid_rows)
{
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error("nn_core", "l1_loss: shape mismatch");
  }
  if (valid_rows.size() != pred.rows()) throw Error("nn_core", "l1_loss: mask length mismatch");
  const auto count = valid_rows.count();
  if (count == 0) throw Error("nn_core", "l1_loss: no valid timesteps");
  const Scalar norm = Scalar(1) / static_cast<Scalar>(count * pred.cols());
  Matrix<Scalar> diff = pred.value() - target;
  Scalar total = 0;
  Matrix<Scalar> sign = Matrix<Scalar>::Zero(diff.rows(), diff.cols());
  for (Eigen::Index r = 0; r < diff.rows(); ++r) {
    if (!valid_rows(r)) continue;
    total += diff.row(r).cwiseAbs().sum();
    for (Eigen::Index c = 0; c < diff.cols(); ++c) {
      sign(r, c) = diff(r, c) > 0 ? Scalar(1) : (diff(r, c) < 0 ? Scalar(-1) : Scalar(0));
    }
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = total * norm;
  return pred.graph().record("l1_loss", std::move(out), {pred}, [pred, sign, norm](Graph<Scalar> & g, const auto & go) {
    g.accumulate(pred, sign * (go(0, 0) * norm));
  });
}

/// -log softmax(logits)[target] over unmasked slots; logits is [1, N].
template <typename Scalar>
Var<Scalar> softmax_cross_entropy(const Var<Scalar> & logits, int target, const Mask & valid)
{
  if (logits.rows() != 1 || valid.size() != logits.cols()) {
    throw Error("nn_core", "cross_entropy: expected [1, N] logits with matching mask");
  }
  if (target < 0 || target >= logits.cols() || !valid(target)) {
    throw Error("nn_core", "cross_entropy: target slot is masked or out of range");
  }
  const auto & x = logits.value();
  Scalar peak = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (valid(c)) peak = std::max(peak, x(0, c));
  }
  Matrix<Scalar> probs = Matrix<Scalar>::Zero(1, x.cols());
  Scalar total = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (!valid(c)) continue;
    probs(0, c) = std::exp(x(0, c) - peak);
    total += probs(0, c);
  }
  probs /= total;
  Matrix<Scalar> out(1, 1);
  out(0, 0) = std::log(total) - (x(0, target) - peak);
  return logits.graph().record(
    "cross_entropy", std::move(out), {logits}, [logits, probs, target](Graph<Scalar> & g, const auto & go) {
      Matrix<Scalar> d = probs;
      d(0, target) -= Scalar(1);
      g.accumulate(logits, d * go(0, 0));
    });
}

}  // namespace int2plan::nn
