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

#include "cfchanpred/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cfchanpred/error.hpp"

namespace cfcp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string matrix_csv(const Array& a) {
  std::string s;
  for (std::size_t i = 0; i < a.dim(0); ++i) {
    for (std::size_t j = 0; j < a.dim(1); ++j) s += (j ? "," : "") + num(a.at(i, j));
    s += "\n";
  }
  return s;
}

}  // namespace

// -- correlation primitives ---------------------------------------------------------

Array pacf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < max_lag + 2) throw DataError("pacf needs at least max_lag + 2 samples");
  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += (x[t] - mu) * (x[t + k] - mu);
    gamma[k] = acc / static_cast<double>(n);
  }
  if (!(gamma[0] > 0.0)) throw DataError("pacf of a constant series is undefined");
  Array out({max_lag + 1});
  out[0] = 1.0;
  if (max_lag == 0) return out;
  std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
  double v = gamma[0];
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double acc = gamma[k];
    for (std::size_t j = 1; j < k; ++j) acc -= prev[j] * gamma[k - j];
    const double a = v > 0.0 ? acc / v : 0.0;
    phi[k] = a;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - a * prev[k - j];
    v *= (1.0 - a * a);
    out[k] = a;
    prev = phi;
  }
  return out;
}

double pcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("pcc needs two series of equal length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("pcc of a constant series is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

cdouble complex_pcc(std::span<const cdouble> x, std::span<const cdouble> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("pcc needs two series of equal length >= 2");
  const double n = static_cast<double>(x.size());
  const cdouble mx = std::accumulate(x.begin(), x.end(), cdouble(0.0, 0.0)) / n;
  const cdouble my = std::accumulate(y.begin(), y.end(), cdouble(0.0, 0.0)) / n;
  cdouble sxy(0.0, 0.0);
  double sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * std::conj(y[i] - my);
    sxx += std::norm(x[i] - mx);
    syy += std::norm(y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("pcc of a constant series is undefined");
  return sxy / std::sqrt(sxx * syy);
}

// -- adjacency ----------------------------------------------------------------------

AdjacencyMatrix build_adjacency_distance(const Array& positions, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("distance adjacency needs sigma > 0");
  if (positions.rank() != 2 || positions.dim(1) != 3) throw DimensionError("positions must be [M x 3]");
  const std::size_t m = positions.dim(0);
  AdjacencyMatrix adj{Array({m, m}), AdjacencyKind::distance, sigma};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = positions.at(i, c) - positions.at(j, c);
        d2 += d * d;
      }
      adj.a.at(i, j) = std::exp(-std::sqrt(d2) / sigma);
    }
  return adj;
}

std::string to_string(PccSeries s) {
  switch (s) {
    case PccSeries::magnitude_mean: return "magnitude-mean";
    case PccSeries::real_part: return "real-part";
    case PccSeries::per_subcarrier: return "per-subcarrier";
  }
  return "?";
}

PccSeries parse_pcc_series(const std::string& name) {
  for (auto s : {PccSeries::magnitude_mean, PccSeries::real_part, PccSeries::per_subcarrier})
    if (to_string(s) == name) return s;
  throw UsageError("unknown PCC series '" + name + "' (expected magnitude-mean, real-part or per-subcarrier)");
}

namespace {

// Pairwise |PCC| between APs, [M x M] with zero diagonal.
Array pairwise_ap_pcc(const CsiDataset& data, PccSeries series) {
  const std::size_t m = data.aps, t = data.snapshots, l = data.subcarriers;
  if (m < 2) throw DataError("PCC adjacency needs at least two APs");
  if (t < 2) throw DataError("PCC adjacency needs at least two snapshots");
  Array r({m, m});
  if (series == PccSeries::per_subcarrier) {
    std::vector<std::vector<cdouble>> s(m);
    for (std::size_t li = 0; li < l; ++li) {
      for (std::size_t a = 0; a < m; ++a) s[a] = data.series(li, a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          const double v = std::abs(complex_pcc(s[i], s[j])) / static_cast<double>(l);
          r.at(i, j) += v;
          r.at(j, i) += v;
        }
    }
  } else {
    std::vector<std::vector<double>> s(m, std::vector<double>(t, 0.0));
    for (std::size_t ti = 0; ti < t; ++ti)
      for (std::size_t li = 0; li < l; ++li)
        for (std::size_t a = 0; a < m; ++a) {
          const cdouble h = data.at(ti, li, a);
          s[a][ti] += (series == PccSeries::magnitude_mean ? std::abs(h) : h.real()) / static_cast<double>(l);
        }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) r.at(i, j) = r.at(j, i) = std::abs(pcc(s[i], s[j]));
  }
  for (double& v : r.values()) v = std::clamp(v, 0.0, 1.0);
  return r;
}

}  // namespace

AdjacencyMatrix build_adjacency_pcc(const CsiDataset& data, PccSeries series) {
  AdjacencyMatrix adj{pairwise_ap_pcc(data, series), AdjacencyKind::pcc, 0.0};
  adj.validate();
  return adj;
}

AdjacencyMatrix build_adjacency_constant(std::size_t aps, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ContractError("constant adjacency value must lie in [0, 1]");
  AdjacencyMatrix adj{Array({aps, aps}, value), AdjacencyKind::constant, 0.0};
  for (std::size_t i = 0; i < aps; ++i) adj.a.at(i, i) = 0.0;
  return adj;
}

// -- hyper-parameter selection ------------------------------------------------------

WindowSelection select_window_length(const CsiDataset& data, double threshold, std::size_t max_lag) {
  if (max_lag == 0) throw ContractError("max_lag must be positive");
  data.validate();
  const std::size_t total = data.subcarriers * data.aps;
  const std::size_t count = std::min<std::size_t>(64, total);
  WindowSelection w;
  w.mean_abs_pacf_re = Array({max_lag + 1});
  w.mean_abs_pacf_im = Array({max_lag + 1});
  std::vector<double> re(data.snapshots), im(data.snapshots);
  std::size_t used = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t flat = i * total / count;
    const std::size_t l = flat / data.aps, m = flat % data.aps;
    for (std::size_t t = 0; t < data.snapshots; ++t) {
      re[t] = data.at(t, l, m).real();
      im[t] = data.at(t, l, m).imag();
    }
    Array pr, pi;
    try {
      pr = pacf(re, max_lag);
      pi = pacf(im, max_lag);
    } catch (const DataError&) {
      continue;  // constant series carry no lag structure
    }
    for (std::size_t k = 0; k <= max_lag; ++k) {
      w.mean_abs_pacf_re[k] += std::abs(pr[k]);
      w.mean_abs_pacf_im[k] += std::abs(pi[k]);
    }
    ++used;
  }
  w.series_used = used;
  if (used == 0) {
    w.length = max_lag;
    w.warning = true;
    return w;
  }
  for (std::size_t k = 0; k <= max_lag; ++k) {
    w.mean_abs_pacf_re[k] /= static_cast<double>(used);
    w.mean_abs_pacf_im[k] /= static_cast<double>(used);
  }
  for (std::size_t k = 1; k <= max_lag; ++k)
    if (w.mean_abs_pacf_re[k] < threshold && w.mean_abs_pacf_im[k] < threshold) {
      w.length = k;
      return w;
    }
  w.length = max_lag;
  w.warning = true;
  return w;
}

Array freq_pcc(const CsiDataset& data) {
  data.validate();
  const std::size_t l = data.subcarriers, m = data.aps, t = data.snapshots;
  if (t < 2) throw DataError("frequency PCC needs at least two snapshots");
  // Centred series per (l, m).
  std::vector<cdouble> c(data.csi.size());
  for (std::size_t li = 0; li < l; ++li)
    for (std::size_t a = 0; a < m; ++a) {
      cdouble mu(0.0, 0.0);
      for (std::size_t ti = 0; ti < t; ++ti) mu += data.at(ti, li, a);
      mu /= static_cast<double>(t);
      for (std::size_t ti = 0; ti < t; ++ti) c[data.index(ti, li, a)] = data.at(ti, li, a) - mu;
    }
  std::vector<cdouble> cross(l * l, cdouble(0.0, 0.0));
  for (std::size_t ti = 0; ti < t; ++ti)
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i; j < l; ++j) {
        cdouble acc(0.0, 0.0);
        const cdouble* xi = c.data() + data.index(ti, i, 0);
        const cdouble* xj = c.data() + data.index(ti, j, 0);
        for (std::size_t a = 0; a < m; ++a) acc += xi[a] * std::conj(xj[a]);
        cross[i * l + j] += acc;
      }
  Array out({l, l});
  for (std::size_t i = 0; i < l; ++i)
    if (!(cross[i * l + i].real() > 0.0)) throw DataError("frequency PCC of a constant subcarrier is undefined");
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i; j < l; ++j) {
      const double v = i == j ? 1.0
                              : std::min(1.0, std::abs(cross[i * l + j]) /
                                                  std::sqrt(cross[i * l + i].real() * cross[j * l + j].real()));
      out.at(i, j) = out.at(j, i) = v;
    }
  return out;
}

KernelSelection select_kernel_size(const Array& fp, double threshold) {
  if (fp.rank() != 2 || fp.dim(0) != fp.dim(1)) throw DimensionError("frequency PCC must be square");
  const std::size_t l = fp.dim(0);
  const std::size_t cap = l % 2 == 1 ? l : l - 1;
  for (std::size_t r = 0; 2 * r + 1 <= cap; ++r) {
    const std::size_t off = r + 1;
    if (off >= l) break;
    double acc = 0.0;
    for (std::size_t i = 0; i + off < l; ++i) acc += std::abs(fp.at(i, i + off));
    if (acc / static_cast<double>(l - off) < threshold) return {2 * r + 1, false};
  }
  return {cap, true};
}

double PccCdf::cdf(double x) const {
  if (samples.empty()) throw DataError("empty PCC sample");
  const auto it = std::upper_bound(samples.begin(), samples.end(), x);
  return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

double PccCdf::quantile(double p) const {
  if (samples.empty()) throw DataError("empty PCC sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("quantile level must lie in [0, 1]");
  const double pos = p * static_cast<double>(samples.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

double PccCdf::mean() const {
  if (samples.empty()) throw DataError("empty PCC sample");
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

PccCdf pcc_cdf(const CsiDataset& data, PccSeries series) {
  const Array r = pairwise_ap_pcc(data, series);
  PccCdf out;
  for (std::size_t i = 0; i < data.aps; ++i)
    for (std::size_t j = i + 1; j < data.aps; ++j) out.samples.push_back(r.at(i, j));
  std::sort(out.samples.begin(), out.samples.end());
  return out;
}

// -- report ---------------------------------------------------------------------------

CorrelationReport analyze(const CsiDataset& data, const AnalysisOptions& o) {
  CorrelationReport r;
  r.window = select_window_length(data, o.window_threshold, o.max_lag);
  r.freq_pcc = freq_pcc(data);
  r.kernel = select_kernel_size(r.freq_pcc, o.kernel_threshold);
  r.adjacency = build_adjacency_pcc(data, o.series);
  r.space_pcc.samples.clear();
  for (std::size_t i = 0; i < data.aps; ++i)
    for (std::size_t j = i + 1; j < data.aps; ++j) r.space_pcc.samples.push_back(r.adjacency.a.at(i, j));
  std::sort(r.space_pcc.samples.begin(), r.space_pcc.samples.end());
  return r;
}

std::string CorrelationReport::to_text() const {
  std::string s;
  s += "recommended_T = " + std::to_string(window.length) + "\n";
  s += std::string("window_warning = ") + (window.warning ? "true" : "false") + "\n";
  s += "pacf_series = " + std::to_string(window.series_used) + "\n";
  s += "recommended_D_k = " + std::to_string(kernel.size) + "\n";
  s += std::string("kernel_warning = ") + (kernel.warning ? "true" : "false") + "\n";
  if (freq_pcc.dim(0) > 1) s += "adjacent_freq_pcc = " + num(freq_pcc.at(0, 1)) + "\n";
  s += "mean_space_pcc = " + num(space_pcc.mean()) + "\n";
  s += "space_pcc_q50 = " + num(space_pcc.quantile(0.5)) + "\n";
  s += "space_pcc_q80 = " + num(space_pcc.quantile(0.8)) + "\n";
  s += "space_pcc_cdf_at_0.4 = " + num(space_pcc.cdf(0.4)) + "\n";
  return s;
}

std::string CorrelationReport::pacf_csv() const {
  std::string s = "lag,mean_abs_pacf_re,mean_abs_pacf_im\n";
  for (std::size_t k = 0; k < window.mean_abs_pacf_re.size(); ++k)
    s += std::to_string(k) + "," + num(window.mean_abs_pacf_re[k]) + "," + num(window.mean_abs_pacf_im[k]) + "\n";
  return s;
}

std::string CorrelationReport::freq_pcc_csv() const { return matrix_csv(freq_pcc); }

std::string CorrelationReport::adjacency_csv() const { return matrix_csv(adjacency.a); }

}  // namespace cfcp
