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

#include "cfchanpred/pipeline.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "cfchanpred/binary_io.hpp"
#include "cfchanpred/error.hpp"

namespace cfcp {

namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cdouble> unitary_dft(std::span<const cdouble> in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<cdouble> src(in.begin(), in.end()), dst(in.size());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(src.data()), reinterpret_cast<fftw_complex*>(dst.data()),
                            sign, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericError("FFT planning failed for size " + std::to_string(n));
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : dst) v *= s;
  return dst;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

// -- CFR <-> CIR -------------------------------------------------------------------------

double CirFrame::energy() const {
  double e = 0.0;
  for (const auto& v : taps) e += std::norm(v);
  return e;
}

CirFrame cfr_to_cir(std::span<const cdouble> cfr, double subcarrier_spacing, std::size_t timestamp) {
  if (cfr.empty()) throw DataError("empty CFR");
  if (!(subcarrier_spacing > 0.0)) throw ContractError("subcarrier spacing must be positive");
  CirFrame f;
  f.taps = unitary_dft(cfr, FFTW_BACKWARD);
  f.delay_resolution = 1.0 / (static_cast<double>(cfr.size()) * subcarrier_spacing);
  f.timestamp = timestamp;
  return f;
}

std::vector<cdouble> cir_to_cfr(const CirFrame& cir) {
  if (cir.taps.empty()) throw DataError("empty CIR");
  return unitary_dft(cir.taps, FFTW_FORWARD);
}

PowerDelayProfile compute_pdp(std::span<const CirFrame> cirs) {
  if (cirs.empty()) throw DataError("PDP needs at least one CIR frame");
  const std::size_t n = cirs.front().taps.size();
  PowerDelayProfile p{Array({n}), Array({n})};
  for (const auto& f : cirs) {
    if (f.taps.size() != n) throw DimensionError("CIR frames have different lengths");
    for (std::size_t i = 0; i < n; ++i) p.linear[i] += std::norm(f.taps[i]);
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.linear[i] /= static_cast<double>(cirs.size());
    peak = std::max(peak, p.linear[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    p.db[i] = peak > 0.0 && p.linear[i] > 0.0 ? std::max(-300.0, 10.0 * std::log10(p.linear[i] / peak)) : -300.0;
  return p;
}

// -- partitioning ---------------------------------------------------------------------

std::size_t PartitionSpec::ap_count() const {
  std::size_t n = 0;
  for (const auto& w : windows) n = std::max(n, w.ap + 1);
  return n;
}

void PartitionSpec::validate(std::size_t n_delay) const {
  for (const auto& w : windows)
    if (w.start > w.end || w.end > n_delay)
      throw ContractError("delay window [" + std::to_string(w.start) + ", " + std::to_string(w.end) +
                          ") is outside [0, " + std::to_string(n_delay) + ")");
  for (std::size_t i = 0; i < windows.size(); ++i)
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const auto& a = windows[i];
      const auto& b = windows[j];
      if (a.start < b.end && b.start < a.end) throw ContractError("delay windows overlap");
    }
}

PartitionSpec PartitionSpec::two_source(double threshold_seconds, double delay_resolution, std::size_t n_delay) {
  if (!(threshold_seconds > 0.0) || !(delay_resolution > 0.0))
    throw ContractError("threshold and delay resolution must be positive");
  const auto th = static_cast<std::size_t>(std::llround(threshold_seconds / delay_resolution));
  if (th == 0) throw ContractError("threshold is below one delay bin");
  PartitionSpec s;
  s.windows.push_back({0, std::min(th, n_delay), 0});
  s.windows.push_back({std::min(th, n_delay), std::min(2 * th, n_delay), 1});
  s.validate(n_delay);
  return s;
}

Partition partition_by_delay_window(std::span<const CirFrame> cirs, const PartitionSpec& spec) {
  if (cirs.empty()) throw DataError("partition needs at least one CIR frame");
  const std::size_t n = cirs.front().taps.size();
  spec.validate(n);
  Partition out;
  out.per_ap.resize(spec.ap_count());
  for (const auto& f : cirs) {
    if (f.taps.size() != n) throw DimensionError("CIR frames have different lengths");
    std::vector<bool> covered(n, false);
    for (auto& ap : out.per_ap) ap.push_back({std::vector<cdouble>(n), f.delay_resolution, f.timestamp});
    for (const auto& w : spec.windows)
      for (std::size_t i = w.start; i < w.end; ++i) {
        out.per_ap[w.ap].back().taps[i] = f.taps[i];
        covered[i] = true;
      }
    for (std::size_t i = 0; i < n; ++i) {
      out.total_energy += std::norm(f.taps[i]);
      if (!covered[i]) out.leakage += std::norm(f.taps[i]);
    }
  }
  return out;
}

CsiDataset build_dataset_from_cfrs(const std::vector<std::vector<std::vector<cdouble>>>& per_ap,
                                   const std::optional<Array>& positions) {
  if (per_ap.empty()) throw DataError("no AP CFR sequences given");
  const std::size_t t = per_ap.front().size();
  if (t == 0) throw DataError("AP CFR sequence is empty");
  const std::size_t l = per_ap.front().front().size();
  if (l == 0) throw DataError("CFR has no subcarriers");
  for (const auto& ap : per_ap) {
    if (ap.size() != t) throw DataError("AP CFR sequences have different lengths");
    for (const auto& cfr : ap)
      if (cfr.size() != l) throw DataError("CFRs have different subcarrier counts");
  }
  CsiDataset d;
  d.snapshots = t;
  d.subcarriers = l;
  d.aps = per_ap.size();
  d.ap_positions = positions ? *positions : Array({d.aps, 3});
  d.csi.resize(t * l * d.aps);
  for (std::size_t m = 0; m < d.aps; ++m)
    for (std::size_t ti = 0; ti < t; ++ti)
      for (std::size_t li = 0; li < l; ++li) d.at(ti, li, m) = per_ap[m][ti][li];
  d.validate();
  return d;
}

// -- configuration files ------------------------------------------------------------

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

ConfigEntries load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_config_text(std::string(bytes.begin(), bytes.end()));
}

}  // namespace cfcp
