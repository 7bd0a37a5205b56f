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

// Central finite-difference gradient checks shared by the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cfchanpred/autodiff.hpp"

namespace cfcp::testing {

inline Array random_array(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Array a(shape);
  for (double& v : a.values()) v = u(rng);
  return a;
}

/// Projects an output onto a fixed random direction so every output
/// element contributes to the scalar loss.
inline ad::Var probe(const ad::Var& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ad::sum(ad::mul(out, ad::constant(random_array(out.shape(), rng))));
}

/// Worst relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
/// over all leaves, with central differences of step h.
inline double gradient_error(const std::vector<ad::Var>& leaves, const std::function<ad::Var()>& loss_fn,
                             double h = 1e-5) {
  for (auto leaf : leaves) leaf.zero_grad();
  ad::backward(loss_fn());
  double worst = 0.0;
  for (auto leaf : leaves) {
    const Array analytic = leaf.grad();
    Array numeric(analytic.shape());
    Array& v = leaf.mutable_value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x0 = v[i];
      v[i] = x0 + h;
      const double fp = loss_fn().value()[0];
      v[i] = x0 - h;
      const double fm = loss_fn().value()[0];
      v[i] = x0;
      numeric[i] = (fp - fm) / (2.0 * h);
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-10});
    worst = std::max(worst, std::sqrt(diff) / scale);
  }
  return worst;
}

}  // namespace cfcp::testing
