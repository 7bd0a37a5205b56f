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

#include "cfchanpred/channel_sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "cfchanpred/error.hpp"

namespace cfcp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent generator per (seed, purpose, index).
enum class Stream : std::uint32_t { placement = 1, virtual_placement = 2, latent = 3, noise = 4 };

std::mt19937_64 substream(std::uint64_t seed, Stream purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Array place(const SimConfig& cfg, std::mt19937_64 rng) {
  std::uniform_real_distribution<double> xy(0.0, cfg.area_side);
  std::uniform_real_distribution<double> z(cfg.ap_height_min, cfg.ap_height_max);
  Array pos({cfg.aps, 3});
  for (std::size_t m = 0; m < cfg.aps; ++m) {
    pos.at(m, 0) = xy(rng);
    pos.at(m, 1) = xy(rng);
    pos.at(m, 2) = z(rng);
  }
  return pos;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers, strided.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
}

// One latent wideband channel, [T x L] row-major.
std::vector<cdouble> latent_channel(const SimConfig& cfg, std::uint64_t index) {
  auto rng = substream(cfg.seed, Stream::latent, index);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::exponential_distribution<double> delay(cfg.delay_spread > 0.0 ? 1.0 / cfg.delay_spread : 1.0);
  const std::size_t t_total = cfg.snapshots, l_count = cfg.subcarriers, p_count = cfg.paths, s_count = cfg.sinusoids;
  const double fd = cfg.doppler();
  const double df = cfg.subcarrier_spacing();
  const double path_amp = 1.0 / std::sqrt(static_cast<double>(p_count));
  const double sin_amp = 1.0 / std::sqrt(static_cast<double>(s_count));

  std::vector<cdouble> out(t_total * l_count, cdouble(0.0, 0.0));
  std::vector<double> omega(s_count), phi(s_count);
  std::vector<cdouble> steer(l_count);
  for (std::size_t p = 0; p < p_count; ++p) {
    const double tau = cfg.delay_spread > 0.0 ? delay(rng) : 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      omega[s] = kTwoPi * fd * std::cos(phase(rng)) * cfg.snapshot_interval;
      phi[s] = phase(rng);
    }
    for (std::size_t l = 0; l < l_count; ++l)
      steer[l] = path_amp * std::polar(1.0, -kTwoPi * static_cast<double>(l) * df * tau);
    for (std::size_t t = 0; t < t_total; ++t) {
      cdouble a(0.0, 0.0);
      for (std::size_t s = 0; s < s_count; ++s) a += std::polar(1.0, omega[s] * static_cast<double>(t) + phi[s]);
      a *= sin_amp;
      cdouble* row = out.data() + t * l_count;
      for (std::size_t l = 0; l < l_count; ++l) row[l] += a * steer[l];
    }
  }
  return out;
}

Eigen::MatrixXd mixing_factor(const Array& r) {
  const std::size_t m = r.dim(0);
  Eigen::MatrixXd rm(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) rm(i, j) = r.at(i, j);
  Eigen::LLT<Eigen::MatrixXd> llt(rm);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Coincident positions make R singular; fall back to the symmetric root.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rm);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Array place_aps(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return place(cfg, substream(seed, Stream::placement, 0));
}

Array virtual_positions(const SimConfig& cfg) {
  cfg.validate();
  return place(cfg, substream(cfg.seed, Stream::virtual_placement, 0));
}

Array spatial_correlation(const Array& positions, double corr_distance) {
  if (positions.rank() != 2 || positions.dim(1) != 3) throw DimensionError("positions must be [M x 3]");
  if (!(corr_distance >= 0.0)) throw ContractError("correlation distance must be non-negative");
  const std::size_t m = positions.dim(0);
  if (corr_distance == 0.0) return Array::identity(m);
  Array r({m, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = positions.at(i, c) - positions.at(j, c);
        d2 += d * d;
      }
      r.at(i, j) = std::exp(-std::sqrt(d2) / corr_distance);
    }
  return r;
}

CsiDataset generate(const SimConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::size_t m_count = cfg.aps, l_count = cfg.subcarriers, t_total = cfg.snapshots;

  CsiDataset d;
  d.snapshots = t_total;
  d.subcarriers = l_count;
  d.aps = m_count;
  d.config = cfg;
  d.ap_positions = place_aps(cfg, cfg.seed);
  const Array corr =
      spatial_correlation(cfg.decouple_space ? virtual_positions(cfg) : d.ap_positions, cfg.corr_distance);
  const Eigen::MatrixXd mix = mixing_factor(corr);

  std::vector<std::vector<cdouble>> latent(m_count);
  parallel_for(m_count, threads, [&](std::size_t j) { latent[j] = latent_channel(cfg, j); });

  d.csi.assign(t_total * l_count * m_count, cdouble(0.0, 0.0));
  parallel_for(m_count, threads, [&](std::size_t m) {
    auto rng = substream(cfg.seed, Stream::noise, m);
    std::normal_distribution<double> noise(0.0, cfg.noise_std / std::sqrt(2.0));
    for (std::size_t t = 0; t < t_total; ++t)
      for (std::size_t l = 0; l < l_count; ++l) {
        cdouble v(0.0, 0.0);
        for (std::size_t j = 0; j < m_count; ++j)
          if (mix(m, j) != 0.0) v += mix(m, j) * latent[j][t * l_count + l];
        if (cfg.noise_std > 0.0) {
          const double re = noise(rng);
          const double im = noise(rng);
          v += cdouble(re, im);
        }
        d.csi[d.index(t, l, m)] = v;
      }
  });
  quantize_to_f32(d);
  d.validate();
  return d;
}

double theoretical_freq_correlation(double delay_spread, double freq_offset) {
  if (!(delay_spread >= 0.0)) throw ContractError("delay spread must be non-negative");
  const double x = kTwoPi * freq_offset * delay_spread;
  return 1.0 / std::sqrt(1.0 + x * x);
}

}  // namespace cfcp
