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

// Synthetic wideband CSI generator.
//
// Every AP channel is a linear mix of M independent latent channels. Each
// latent channel has P paths with exponentially distributed delays (mean
// delay_spread) and equal mean power; each path fades as a sum of sinusoids
// with uniformly random arrival angles, so the temporal autocorrelation is
// J0(2 pi f_d tau). The latent channels are mixed by the Cholesky factor of
// R_ij = exp(-dist_ij / d0), which gives every AP unit power and an inter-AP
// correlation that decays with distance.

#pragma once

#include <cstdint>

#include "cfchanpred/dataset.hpp"

namespace cfcp {

/// x, y uniform over [0, area_side]^2, z uniform over the height range.
Array place_aps(const SimConfig& cfg, std::uint64_t seed);

/// Positions used for the spatial correlation when `decouple_space` is set:
/// an independent placement, unrelated to the reported AP positions.
Array virtual_positions(const SimConfig& cfg);

/// R_ij = exp(-|p_i - p_j| / d0); the identity when d0 == 0.
Array spatial_correlation(const Array& positions, double corr_distance);

/// Generates the dataset; values are rounded to single precision so a CSIF
/// round trip is exact. Output does not depend on `threads` (0 = hardware
/// concurrency).
CsiDataset generate(const SimConfig& cfg, unsigned threads = 1);

/// |E[h(f) h*(f + df)]| / E|h|^2 for an exponential delay profile:
/// 1 / sqrt(1 + (2 pi df sigma)^2).
double theoretical_freq_correlation(double delay_spread, double freq_offset);

}  // namespace cfcp
