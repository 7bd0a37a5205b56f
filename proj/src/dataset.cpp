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

#include "cfchanpred/dataset.hpp"

#include <cmath>

#include "cfchanpred/binary_io.hpp"
#include "cfchanpred/error.hpp"

namespace cfcp {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr char kCsifMagic[] = "CSIF";
constexpr std::uint32_t kCsifVersion = 1;
}  // namespace

double SimConfig::doppler() const { return ue_speed * carrier_freq / kSpeedOfLight; }

double SimConfig::subcarrier_spacing() const { return bandwidth / static_cast<double>(subcarriers); }

void SimConfig::validate() const {
  if (aps == 0 || subcarriers == 0 || snapshots == 0) throw ContractError("sim sizes must be positive");
  if (!(area_side > 0.0)) throw ContractError("area_side must be positive");
  if (!(ap_height_min <= ap_height_max)) throw ContractError("AP height range is inverted");
  if (!(ue_speed >= 0.0)) throw ContractError("ue_speed must be non-negative");
  if (!(delay_spread >= 0.0)) throw ContractError("delay_spread must be non-negative");
  if (!(corr_distance >= 0.0)) throw ContractError("corr_distance must be non-negative");
  if (paths == 0 || sinusoids == 0) throw ContractError("path and sinusoid counts must be positive");
  if (!(snapshot_interval > 0.0)) throw ContractError("snapshot_interval must be positive");
  if (!(noise_std >= 0.0)) throw ContractError("noise_std must be non-negative");
  if (!(carrier_freq > 0.0) || !(bandwidth > 0.0)) throw ContractError("frequencies must be positive");
}

SimConfig scenario_preset(const std::string& name) {
  SimConfig cfg;
  if (name == "umi")
    cfg.delay_spread = 50e-9;
  else if (name == "uma")
    cfg.delay_spread = 100e-9;
  else if (name == "rma")
    cfg.delay_spread = 300e-9;
  else
    throw UsageError("unknown scenario '" + name + "' (expected umi, uma or rma)");
  return cfg;
}

void CsiDataset::validate() const {
  if (snapshots == 0 || subcarriers == 0 || aps == 0) throw DataError("dataset has an empty dimension");
  if (csi.size() != snapshots * subcarriers * aps) throw DataError("dataset payload size mismatch");
  if (ap_positions.shape() != Shape{aps, 3}) throw DataError("ap_positions must be [M x 3]");
  for (const auto& v : csi)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DataError("dataset contains non-finite CSI");
}

Array CsiDataset::part(bool imaginary, std::size_t start, std::size_t count) const {
  if (count == 0 || start + count > snapshots)
    throw DataError("snapshot range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                    ") outside dataset of " + std::to_string(snapshots));
  Array out({count, subcarriers, aps});
  const std::size_t base = index(start, 0, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = imaginary ? csi[base + i].imag() : csi[base + i].real();
  return out;
}

CsiDataset CsiDataset::slice(std::size_t start, std::size_t count) const {
  if (count == 0 || start + count > snapshots)
    throw DataError("snapshot range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                    ") outside dataset of " + std::to_string(snapshots));
  CsiDataset out = *this;
  out.snapshots = count;
  out.csi.assign(csi.begin() + static_cast<std::ptrdiff_t>(index(start, 0, 0)),
                 csi.begin() + static_cast<std::ptrdiff_t>(index(start + count, 0, 0)));
  return out;
}

std::vector<cdouble> CsiDataset::series(std::size_t l, std::size_t m) const {
  std::vector<cdouble> s(snapshots);
  for (std::size_t t = 0; t < snapshots; ++t) s[t] = at(t, l, m);
  return s;
}

void quantize_to_f32(CsiDataset& data) {
  for (auto& v : data.csi)
    v = cdouble(static_cast<float>(v.real()), static_cast<float>(v.imag()));
  for (double& x : data.ap_positions.values()) x = static_cast<float>(x);
}

std::vector<std::uint8_t> encode_csif(const CsiDataset& data) {
  data.validate();
  io::Writer w;
  w.put_bytes(std::string_view(kCsifMagic, 4));
  w.put<std::uint32_t>(kCsifVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.snapshots));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.subcarriers));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.aps));
  for (double x : data.ap_positions.values()) w.put<float>(static_cast<float>(x));
  for (const auto& v : data.csi) {
    w.put<float>(static_cast<float>(v.real()));
    w.put<float>(static_cast<float>(v.imag()));
  }
  if (data.standardization) {
    w.put<std::uint8_t>(1);
    w.put<double>(data.standardization->mean_re);
    w.put<double>(data.standardization->std_re);
    w.put<double>(data.standardization->mean_im);
    w.put<double>(data.standardization->std_im);
  } else {
    w.put<std::uint8_t>(0);
  }
  return std::move(w.bytes());
}

CsiDataset decode_csif(const std::vector<std::uint8_t>& bytes) {
  io::Reader r(bytes);
  if (r.get_bytes(4) != std::string_view(kCsifMagic, 4)) throw DataError("not a CSIF file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCsifVersion) throw DataError("unsupported CSIF version " + std::to_string(version));
  CsiDataset d;
  d.snapshots = r.get<std::uint32_t>();
  d.subcarriers = r.get<std::uint32_t>();
  d.aps = r.get<std::uint32_t>();
  if (d.snapshots == 0 || d.subcarriers == 0 || d.aps == 0) throw DataError("CSIF header has an empty dimension");
  const std::size_t n = d.snapshots * d.subcarriers * d.aps;
  if (r.remaining() < d.aps * 3 * 4 + n * 8 + 1) throw DataError("CSIF payload truncated");
  std::vector<double> pos(d.aps * 3);
  for (auto& x : pos) x = r.get<float>();
  d.ap_positions = Array({d.aps, 3}, std::move(pos));
  d.csi.resize(n);
  for (auto& v : d.csi) {
    const float re = r.get<float>();
    const float im = r.get<float>();
    v = cdouble(re, im);
  }
  const auto flag = r.get<std::uint8_t>();
  if (flag == 1) {
    Standardization s;
    s.mean_re = r.get<double>();
    s.std_re = r.get<double>();
    s.mean_im = r.get<double>();
    s.std_im = r.get<double>();
    d.standardization = s;
  } else if (flag != 0) {
    throw DataError("CSIF footer flag must be 0 or 1");
  }
  if (!r.at_end()) throw DataError("trailing bytes after CSIF footer");
  d.validate();
  return d;
}

void write_csif(const std::filesystem::path& path, const CsiDataset& data) {
  io::write_file_atomic(path, encode_csif(data));
}

CsiDataset read_csif(const std::filesystem::path& path) { return decode_csif(io::read_file(path)); }

}  // namespace cfcp
