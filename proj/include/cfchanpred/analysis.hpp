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

#include <span>
#include <string>
#include <vector>

#include "cfchanpred/dataset.hpp"
#include "cfchanpred/graph.hpp"

namespace cfcp {

// -- correlation primitives ---------------------------------------------------------

/// Partial autocorrelations at lags 0..max_lag (lag 0 is 1) by the
/// Durbin-Levinson recursion on the biased sample autocovariance.
/// DataError for a constant series or fewer than max_lag + 2 samples.
Array pacf(std::span<const double> series, std::size_t max_lag);

/// Pearson correlation. DataError on zero variance or length mismatch.
double pcc(std::span<const double> x, std::span<const double> y);
/// Complex correlation sum (x - mx)(y - my)^* / sqrt(var x * var y).
cdouble complex_pcc(std::span<const cdouble> x, std::span<const cdouble> y);

// -- adjacency ----------------------------------------------------------------------

/// a_ij = exp(-|p_i - p_j| / sigma) off the diagonal.
AdjacencyMatrix build_adjacency_distance(const Array& positions, double sigma);

/// How the per-AP series for PCC adjacency is formed.
enum class PccSeries {
  magnitude_mean,  // mean over subcarriers of |h|
  real_part,       // mean over subcarriers of Re h
  per_subcarrier,  // |complex PCC| per subcarrier, averaged over subcarriers
};
std::string to_string(PccSeries s);
PccSeries parse_pcc_series(const std::string& name);

/// a_ij = |r_ij| off the diagonal.
AdjacencyMatrix build_adjacency_pcc(const CsiDataset& data, PccSeries series = PccSeries::magnitude_mean);
/// Uniform off-diagonal value in [0, 1].
AdjacencyMatrix build_adjacency_constant(std::size_t aps, double value);

// -- hyper-parameter selection ------------------------------------------------------

struct WindowSelection {
  std::size_t length = 0;
  bool warning = false;          // no lag fell below the threshold
  Array mean_abs_pacf_re;        // lags 0..max_lag
  Array mean_abs_pacf_im;
  std::size_t series_used = 0;
};

/// Smallest lag k >= 1 at which the mean |PACF| of both the real and the
/// imaginary parts falls below `threshold`, over at most 64 evenly sampled
/// (subcarrier, AP) series. Returns max_lag with the warning flag when no
/// lag qualifies or every sampled series is constant.
WindowSelection select_window_length(const CsiDataset& data, double threshold = 0.1, std::size_t max_lag = 50);

/// [L x L] magnitude of the complex correlation between subcarriers, pooled
/// over APs and time.
Array freq_pcc(const CsiDataset& data);

struct KernelSelection {
  std::size_t size = 1;
  bool warning = false;  // capped at the subcarrier count
};

/// Smallest odd D = 2r + 1 whose first uncovered offset r + 1 has mean |PCC|
/// below `threshold`; capped at the largest odd size <= L.
KernelSelection select_kernel_size(const Array& freq_pcc, double threshold = 0.5);

/// Empirical CDF of pairwise inter-AP |PCC|.
struct PccCdf {
  std::vector<double> samples;  // ascending

  /// Fraction of samples <= x.
  double cdf(double x) const;
  /// Linear interpolation between order statistics, p in [0, 1].
  double quantile(double p) const;
  double mean() const;
};
PccCdf pcc_cdf(const CsiDataset& data, PccSeries series = PccSeries::magnitude_mean);

// -- report ---------------------------------------------------------------------------

struct AnalysisOptions {
  double window_threshold = 0.1;
  double kernel_threshold = 0.5;
  std::size_t max_lag = 50;
  PccSeries series = PccSeries::magnitude_mean;
};

struct CorrelationReport {
  WindowSelection window;
  Array freq_pcc;
  KernelSelection kernel;
  PccCdf space_pcc;
  AdjacencyMatrix adjacency;

  /// key = value lines.
  std::string to_text() const;
  std::string pacf_csv() const;
  std::string freq_pcc_csv() const;
  std::string adjacency_csv() const;
};

CorrelationReport analyze(const CsiDataset& data, const AnalysisOptions& options = {});

}  // namespace cfcp
