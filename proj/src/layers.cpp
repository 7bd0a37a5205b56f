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

#include "cfchanpred/layers.hpp"

#include <cmath>
#include <numbers>

#include "cfchanpred/error.hpp"

namespace cfcp::layers {

using ad::Var;

ad::Var space_conv(const Var& h, const Array& a_norm, const Var& w_s) {
  const Shape& s = h.shape();
  const std::size_t m = s.back();
  if (a_norm.rank() != 2 || a_norm.dim(0) != m || a_norm.dim(1) != m)
    throw DimensionError("space_conv: propagation matrix " + to_string(a_norm.shape()) +
                         " does not match AP count " + std::to_string(m));
  if (w_s.shape() != Shape{m, m})
    throw DimensionError("space_conv: weight " + to_string(w_s.shape()) + " does not match AP count " +
                         std::to_string(m));
  // (h * a) * w == h * (a * w); the second form costs M^3 once instead of
  // an extra N x M x M product.
  const Var mixed = ad::matmul(ad::constant(a_norm), w_s);
  const Var flat = ad::reshape(h, {h.value().size() / m, m});
  return ad::reshape(ad::matmul(flat, mixed), s);
}

Array space_conv(const Array& h_t, const Array& a_norm, const Array& w_s) {
  return space_conv(ad::constant(h_t), a_norm, ad::constant(w_s)).value();
}

ad::Var freq_conv_dwc(const Var& x, const Var& w) { return ad::depthwise_conv(x, w); }

Array freq_conv_dwc(const Array& h_t, const Array& w) {
  if (h_t.rank() != 2 || w.rank() != 2)
    throw DimensionError("freq_conv_dwc expects [L x M] input and [D x M] kernel");
  const std::size_t l = h_t.dim(0), m = h_t.dim(1);
  const Var x = ad::constant(h_t.reshaped({1, 1, l, m}));
  const Var k = ad::constant(w.reshaped({1, w.dim(0), w.dim(1)}));
  return ad::depthwise_conv(x, k).value().reshaped({l, m});
}

ad::Var freq_conv_pwc(const Var& stack, const Var& w) {
  const Shape& s = stack.shape();
  if (s.size() != 4) throw DimensionError("freq_conv_pwc: expected [B x T x L x M], got " + to_string(s));
  if (w.shape().size() != 2 || w.shape()[1] != s[1])
    throw DimensionError("freq_conv_pwc: weight " + to_string(w.shape()) + " does not match " +
                         std::to_string(s[1]) + " window steps");
  const std::size_t t_out = w.shape()[0];
  const Var flat = ad::reshape(stack, {s[0], s[1], s[2] * s[3]});
  return ad::reshape(ad::bmm(w, flat), {s[0], t_out, s[2], s[3]});
}

Array freq_conv_pwc(const Array& stack, const Array& w) {
  if (stack.rank() != 3) throw DimensionError("freq_conv_pwc expects a [T x L x M] stack");
  if (w.size() != stack.dim(0))
    throw DimensionError("freq_conv_pwc: " + std::to_string(w.size()) + " weights for " +
                         std::to_string(stack.dim(0)) + " steps");
  const std::size_t t = stack.dim(0), l = stack.dim(1), m = stack.dim(2);
  const Var out = freq_conv_pwc(ad::constant(stack.reshaped({1, t, l, m})), ad::constant(w.reshaped({1, t})));
  return out.value().reshaped({l, m});
}

Array positional_encoding(std::size_t steps, std::size_t d_model) {
  if (steps == 0 || d_model == 0) throw ContractError("positional_encoding needs positive sizes");
  Array p({steps, d_model});
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t j = 0; j < d_model; ++j) {
      const double odd = static_cast<double>(j % 2);
      const double expo = static_cast<double>(j - j % 2) / static_cast<double>(d_model);
      p.at(i, j) = std::sin(static_cast<double>(i) / std::pow(10000.0, expo) - odd * std::numbers::pi / 2.0);
    }
  return p;
}

namespace {

// Promotes [T x d] to [1 x T x d].
Var as_batched(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() == 3) return x;
  if (s.size() == 2) return ad::reshape(x, {1, s[0], s[1]});
  throw DimensionError("expected [T x d] or [B x T x d], got " + to_string(s));
}

Var restore(const Var& y, const Shape& like) { return like.size() == 3 ? y : ad::reshape(y, like); }

Var project(const Var& x3, const Var& w) {
  const Shape& s = x3.shape();
  if (w.shape().size() != 2 || w.shape()[0] != s[2])
    throw DimensionError("projection weight " + to_string(w.shape()) + " does not fit model width " +
                         std::to_string(s[2]));
  const Var y = ad::matmul(ad::reshape(x3, {s[0] * s[1], s[2]}), w);
  return ad::reshape(y, {s[0], s[1], w.shape()[1]});
}

}  // namespace

ad::Var multi_head_attention(const Var& query_in, const Var& kv_in, const AttentionWeights& w,
                             std::vector<Array>* attention_out) {
  const std::size_t heads = w.w_q.size();
  if (heads == 0 || w.w_k.size() != heads || w.w_v.size() != heads)
    throw DimensionError("multi_head_attention: inconsistent head count");
  const Var q_in = as_batched(query_in);
  const Var k_in = as_batched(kv_in);
  if (q_in.shape()[0] != k_in.shape()[0] || q_in.shape()[2] != k_in.shape()[2])
    throw DimensionError("multi_head_attention: query " + to_string(q_in.shape()) + " and key/value " +
                         to_string(k_in.shape()) + " disagree");
  if (attention_out) attention_out->clear();
  std::vector<Var> outputs;
  outputs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    const Var q = project(q_in, w.w_q[i]);
    const Var k = project(k_in, w.w_k[i]);
    const Var v = project(k_in, w.w_v[i]);
    if (q.shape()[2] != k.shape()[2]) throw DimensionError("multi_head_attention: W_q and W_k widths differ");
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.shape()[2]));
    const Var scores = ad::scale(ad::bmm(q, ad::transpose(k)), inv_sqrt_dk);
    const Var weights = ad::softmax_rows(scores);
    if (attention_out) attention_out->push_back(weights.value());
    outputs.push_back(ad::bmm(weights, v));
  }
  const Var cat = heads == 1 ? outputs[0] : ad::concat(outputs, 2);
  return restore(project(cat, w.w_o), query_in.shape());
}

ad::Var layer_norm(const Var& x, double eps, NormAxis axis) {
  const std::size_t rank = x.shape().size();
  if (rank < 2) throw DimensionError("layer_norm expects [T x d] or [B x T x d]");
  const std::size_t ax = axis == NormAxis::time ? rank - 2 : rank - 1;
  return ad::normalize_along(x, ax, eps);
}

ad::Var feed_forward(const Var& z, const Var& w1, const Var& w2) {
  const Var z3 = as_batched(z);
  return restore(project(ad::relu(project(z3, w1)), w2), z.shape());
}

ad::Var encoder_block(const Var& x, const EncoderBlockWeights& w, double eps, NormAxis axis) {
  const Var o = multi_head_attention(x, x, w.attention);
  const Var z = layer_norm(ad::add(x, o), eps, axis);
  return layer_norm(ad::add(z, feed_forward(z, w.w_d1, w.w_d2)), eps, axis);
}

ad::Var encoder_forward(const Var& x, std::span<const EncoderBlockWeights> blocks, double eps, NormAxis axis) {
  Var y = x;
  for (const auto& b : blocks) y = encoder_block(y, b, eps, axis);
  return y;
}

ad::Var decoder_block(const Var& y, const Var& memory, const DecoderBlockWeights& w, double eps, NormAxis axis) {
  const Var z1 = layer_norm(ad::add(y, multi_head_attention(y, y, w.self_attention)), eps, axis);
  const Var z2 = layer_norm(ad::add(z1, multi_head_attention(z1, memory, w.cross_attention)), eps, axis);
  return layer_norm(ad::add(z2, feed_forward(z2, w.w_d1, w.w_d2)), eps, axis);
}

}  // namespace cfcp::layers
