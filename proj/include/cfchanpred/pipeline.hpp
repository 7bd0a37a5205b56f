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

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfchanpred/dataset.hpp"

namespace cfcp {

// -- CFR <-> CIR -------------------------------------------------------------------------

struct CirFrame {
  std::vector<cdouble> taps;      // N_delay == number of subcarriers
  double delay_resolution = 0.0;  // seconds per bin, 1 / (N * subcarrier spacing)
  std::size_t timestamp = 0;

  double energy() const;
};

/// Unitary inverse DFT: taps[n] = N^(-1/2) sum_l cfr[l] exp(+j 2 pi l n / N).
CirFrame cfr_to_cir(std::span<const cdouble> cfr, double subcarrier_spacing = 1.0, std::size_t timestamp = 0);
/// Unitary forward DFT, the exact inverse of cfr_to_cir.
std::vector<cdouble> cir_to_cfr(const CirFrame& cir);

struct PowerDelayProfile {
  Array linear;  // mean |tap|^2 per bin
  Array db;      // relative to the peak, floored at -300 dB
};
PowerDelayProfile compute_pdp(std::span<const CirFrame> cirs);

// -- delay-window partitioning ------------------------------------------------------

struct DelayWindow {
  std::size_t start = 0;  // bins, inclusive
  std::size_t end = 0;    // bins, exclusive
  std::size_t ap = 0;
};

struct PartitionSpec {
  std::vector<DelayWindow> windows;

  std::size_t ap_count() const;
  /// Throws ContractError on an inverted, out-of-range or overlapping window.
  void validate(std::size_t n_delay) const;

  /// Two sources split at a delay threshold given in seconds: the near source
  /// owns [0, th) and the far source [th, 2 th), with th rounded to bins.
  static PartitionSpec two_source(double threshold_seconds, double delay_resolution, std::size_t n_delay);
};

struct Partition {
  std::vector<std::vector<CirFrame>> per_ap;  // [ap][frame]
  double total_energy = 0.0;
  double leakage = 0.0;                       // energy outside every window
};

Partition partition_by_delay_window(std::span<const CirFrame> cirs, const PartitionSpec& spec);

/// Assembles per-AP CFR sequences ([ap][t][l]) into a dataset. Positions
/// default to zeros. DataError on an empty or ragged input.
CsiDataset build_dataset_from_cfrs(const std::vector<std::vector<std::vector<cdouble>>>& per_ap,
                                   const std::optional<Array>& positions = std::nullopt);

// -- configuration files ------------------------------------------------------------

/// Ordered key/value pairs from "key = value" lines; '#' starts a comment.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// UsageError names the offending line.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries load_config(const std::filesystem::path& path);

}  // namespace cfcp
