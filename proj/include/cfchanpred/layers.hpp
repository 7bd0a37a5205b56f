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

// Differentiable building blocks of the predictor.
//
// Batched forms take a leading batch axis: CSI windows are [B x T x L x M]
// (batch, time step, subcarrier, AP) and encoder activations are
// [B x T x d_model]. The Array overloads evaluate a single CSI snapshot and
// exist for inspection and tests.

#pragma once

#include <span>
#include <vector>

#include "cfchanpred/autodiff.hpp"

namespace cfcp::layers {

/// Axis over which Add & Norm takes its statistics. `time` normalizes every
/// feature column over the window; `feature` is the conventional per-row form.
enum class NormAxis { time, feature };

struct AttentionWeights {
  std::vector<ad::Var> w_q;  // per head, [d_model x d_k]
  std::vector<ad::Var> w_k;  // per head, [d_model x d_k]
  std::vector<ad::Var> w_v;  // per head, [d_model x d_v]
  ad::Var w_o;               // [h*d_v x d_model]
};

struct EncoderBlockWeights {
  AttentionWeights attention;
  ad::Var w_d1;  // [d_model x d_model]
  ad::Var w_d2;  // [d_model x d_model]
};

/// Non-causal decoder block used by the vanilla Transformer baseline.
struct DecoderBlockWeights {
  AttentionWeights self_attention;
  AttentionWeights cross_attention;
  ad::Var w_d1;
  ad::Var w_d2;
};

// -- SpaceConv --------------------------------------------------------------------

/// Graph convolution along the AP axis: (h * a_norm) * w_s applied to the last
/// axis of `h` (length M).
ad::Var space_conv(const ad::Var& h, const Array& a_norm, const ad::Var& w_s);
Array space_conv(const Array& h_t, const Array& a_norm, const Array& w_s);

// -- FreqConv ---------------------------------------------------------------------

/// Depthwise convolution over subcarriers with one [D x M] kernel per window
/// step. x: [B x T x L x M], w: [T x D x M].
ad::Var freq_conv_dwc(const ad::Var& x, const ad::Var& w);
/// Single snapshot: h_t [L x M], w [D x M].
Array freq_conv_dwc(const Array& h_t, const Array& w);

/// Pointwise mixing of the T depthwise maps. stack: [B x T x L x M],
/// w: [T_out x T] (row t holds the mixing vector of output step t).
ad::Var freq_conv_pwc(const ad::Var& stack, const ad::Var& w);
/// Single output step: stack [T x L x M], w [T] -> [L x M].
Array freq_conv_pwc(const Array& stack, const Array& w);

// -- Transformer encoder ----------------------------------------------------------

/// P[i, j] = sin(i / 10000^((j - j mod 2) / d_model) - (j mod 2) * pi / 2).
Array positional_encoding(std::size_t steps, std::size_t d_model);

/// Scaled dot-product attention with `h` heads, queries from `query_in` and
/// keys/values from `kv_in` (both [B x T x d_model] or [T x d_model]). When
/// `attention_out` is given it receives the softmax matrix of every head.
ad::Var multi_head_attention(const ad::Var& query_in, const ad::Var& kv_in, const AttentionWeights& w,
                             std::vector<Array>* attention_out = nullptr);

ad::Var layer_norm(const ad::Var& x, double eps, NormAxis axis = NormAxis::time);

/// relu(z * w1) * w2, no biases.
ad::Var feed_forward(const ad::Var& z, const ad::Var& w1, const ad::Var& w2);

/// MHA -> Add & Norm -> dense -> Add & Norm.
ad::Var encoder_block(const ad::Var& x, const EncoderBlockWeights& w, double eps, NormAxis axis);
ad::Var encoder_forward(const ad::Var& x, std::span<const EncoderBlockWeights> blocks, double eps,
                        NormAxis axis = NormAxis::time);

/// Self attention -> Add & Norm -> cross attention on `memory` -> Add & Norm ->
/// dense -> Add & Norm.
ad::Var decoder_block(const ad::Var& y, const ad::Var& memory, const DecoderBlockWeights& w, double eps,
                      NormAxis axis);

}  // namespace cfcp::layers
