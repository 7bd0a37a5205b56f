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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfchanpred/array.hpp"

namespace cfcp {

using cdouble = std::complex<double>;

/// Simulation parameters of the synthetic generator. Units are SI.
struct SimConfig {
  std::size_t aps = 16;            // M
  std::size_t subcarriers = 16;    // L
  std::size_t snapshots = 10000;   // T_total
  double area_side = 250.0;        // m
  double ap_height_min = 5.0;      // m
  double ap_height_max = 25.0;     // m
  double carrier_freq = 13e9;      // Hz
  double bandwidth = 20e6;         // Hz, spread evenly over the subcarriers
  double ue_speed = 100.0 / 3.6;   // m/s
  std::size_t paths = 12;          // P
  std::size_t sinusoids = 16;      // per path
  double delay_spread = 50e-9;     // s, mean of the exponential delay profile
  double corr_distance = 100.0;    // d0, m; 0 disables spatial correlation
  bool decouple_space = false;     // spatial correlation from virtual positions
  double snapshot_interval = 1e-3; // s
  double noise_std = 0.0;          // complex AWGN standard deviation
  std::uint64_t seed = 1;

  double doppler() const;              // ue_speed * carrier_freq / c
  double subcarrier_spacing() const;   // bandwidth / subcarriers
  void validate() const;
};

/// Named presets differing only in delay spread.
SimConfig scenario_preset(const std::string& name);

/// Per-part affine statistics used to standardize CSI.
struct Standardization {
  double mean_re = 0.0;
  double std_re = 1.0;
  double mean_im = 0.0;
  double std_im = 1.0;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

/// Complex CSI sequence indexed [time][subcarrier][AP].
struct CsiDataset {
  std::size_t snapshots = 0;
  std::size_t subcarriers = 0;
  std::size_t aps = 0;
  std::vector<cdouble> csi;
  Array ap_positions;  // [M x 3], metres
  std::optional<SimConfig> config;
  std::optional<Standardization> standardization;

  std::size_t index(std::size_t t, std::size_t l, std::size_t m) const {
    return (t * subcarriers + l) * aps + m;
  }
  cdouble at(std::size_t t, std::size_t l, std::size_t m) const { return csi[index(t, l, m)]; }
  cdouble& at(std::size_t t, std::size_t l, std::size_t m) { return csi[index(t, l, m)]; }

  /// Checks sizes and finiteness; throws DataError.
  void validate() const;

  /// Real or imaginary part of snapshots [start, start + count) as
  /// [count x L x M].
  Array part(bool imaginary, std::size_t start, std::size_t count) const;
  /// Copy of snapshots [start, start + count) with the same positions and
  /// metadata.
  CsiDataset slice(std::size_t start, std::size_t count) const;
  /// Time series of one entry.
  std::vector<cdouble> series(std::size_t l, std::size_t m) const;
};

// -- CSIF file format ----------------------------------------------------------------
//
// "CSIF", u32 version = 1, u32 T, u32 L, u32 M, f32 ap_positions [M x 3],
// f32 (re, im) pairs row-major [t][l][m], u8 flag, and when flag == 1 four
// f64: mean_re, std_re, mean_im, std_im. Little-endian throughout.

std::vector<std::uint8_t> encode_csif(const CsiDataset& data);
CsiDataset decode_csif(const std::vector<std::uint8_t>& bytes);
void write_csif(const std::filesystem::path& path, const CsiDataset& data);
CsiDataset read_csif(const std::filesystem::path& path);

/// Rounds every CSI value and AP coordinate to single precision, the
/// resolution stored by CSIF.
void quantize_to_f32(CsiDataset& data);

}  // namespace cfcp
