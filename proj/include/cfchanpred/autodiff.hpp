// SPDX-License-Identifier: Apache-2.0
//
// cfchanpred: space-time-frequency channel prediction for cell-free massive MIMO
// Copyright (C) 2026 The cfchanpred authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Reverse-mode automatic differentiation over dense arrays.
//
// A `Var` is a handle to a graph node holding a value, an accumulated
// gradient and the rule that pushes its gradient to its operands. Graphs are
// built eagerly by the operations below and are acyclic by construction.
//
// Gradient bookkeeping: `backward` recomputes the gradient of every interior
// node from scratch, but leaf gradients (parameters) accumulate. Calling
// `backward` twice without `zero_grad` therefore doubles leaf gradients, the
// same contract as the usual optimizer loop.
//
// Broadcasting is limited to an operand with a single element against an
// array of any shape. Layer code reshapes explicitly.

#pragma once

#include <memory>
#include <vector>

#include "cfchanpred/array.hpp"

namespace cfcp::ad {

struct Node;

class Var {
 public:
  Var() = default;

  const Array& value() const;
  // Writable value for optimizers. Only meaningful on leaves.
  Array& mutable_value();
  // Zero-filled array of the value's shape until a backward pass reaches it.
  const Array& grad() const;
  bool requires_grad() const;
  const Shape& shape() const { return value().shape(); }
  void zero_grad();

  explicit operator bool() const { return node_ != nullptr; }
  bool same_node(const Var& other) const { return node_ == other.node_; }

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  friend struct Builder;
  friend void backward(const Var& loss);
};

/// Trainable leaf.
Var parameter(Array value);
/// Leaf that never receives a gradient.
Var constant(Array value);

/// Populates leaf gradients with d(loss)/d(leaf). `loss` must hold exactly one
/// element; anything else is a ContractError.
void backward(const Var& loss);

// -- linear algebra ---------------------------------------------------------

/// [m x k] * [k x n].
Var matmul(const Var& a, const Var& b);
/// Batched product of [B x m x k] and [B x k x n]. Either operand may be rank 2,
/// in which case it is shared by every batch entry.
Var bmm(const Var& a, const Var& b);
/// Swap the last two axes of a rank-2 or rank-3 array.
Var transpose(const Var& a);

// -- elementwise ------------------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var relu(const Var& a);
Var exp(const Var& a);
/// sqrt(a + eps). NumericError if any a + eps is negative.
Var sqrt_eps(const Var& a, double eps);
Var tanh(const Var& a);
Var sigmoid(const Var& a);

enum class Elementwise { add, sub, mul, relu, exp, sqrt_eps };
/// Dispatch form of the elementwise family. Unary kinds ignore `b`.
Var elementwise(Elementwise kind, const Var& a, const Var& b = {}, double eps = 0.0);

// -- reductions and normalization -------------------------------------------

Var sum(const Var& a);
Var mean(const Var& a);
/// Softmax along the last axis with per-row max subtraction.
Var softmax_rows(const Var& a);
/// (x - mean) / sqrt(var + eps) with population statistics taken along `axis`
/// independently for every index of the remaining axes.
Var normalize_along(const Var& a, std::size_t axis, double eps);

// -- structure ----------------------------------------------------------------

Var reshape(const Var& a, Shape shape);
Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length);
Var concat(const std::vector<Var>& parts, std::size_t axis);

/// Per-channel "same" convolution along axis 2 with zero padding.
/// x: [B x C x N x J], w: [C x D x J] with D odd; out[b,c,i,j] =
/// sum_k w[c,k,j] * x[b,c,i+k-(D-1)/2,j].
Var depthwise_conv(const Var& x, const Var& w);

}  // namespace cfcp::ad
