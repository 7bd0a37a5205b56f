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

#include "cfchanpred/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "cfchanpred/error.hpp"

namespace cfcp {

using ad::Var;

// -- initialization -------------------------------------------------------------------

double glorot_bound(const Shape& shape) {
  if (shape.empty()) throw ContractError("glorot_bound: empty shape");
  const std::size_t fan_out = shape.back();
  const std::size_t fan_in = element_count(shape) / fan_out;
  return std::sqrt(6.0) / std::sqrt(static_cast<double>(fan_in + fan_out));
}

Array init_glorot(const Shape& shape, std::uint64_t seed, std::uint64_t stream) {
  const double bound = glorot_bound(shape);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Array out(shape);
  for (double& v : out.values()) v = dist(rng);
  return out;
}

// -- Adam -----------------------------------------------------------------------------

void AdamParams::validate() const {
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ContractError("Adam betas must lie in [0, 1)");
  if (!(eta > 0.0)) throw ContractError("Adam eta must be positive");
}

void adam_step(Array& weight, const Array& grad, Array& m, Array& v, std::size_t step, const AdamParams& p) {
  if (grad.shape() != weight.shape() || m.shape() != weight.shape() || v.shape() != weight.shape())
    throw DimensionError("adam_step: weight, gradient and moment shapes differ");
  if (step == 0) throw ContractError("adam_step: step counts from 1");
  const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double g = grad[i];
    m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g;
    v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    weight[i] -= p.learning_rate * m_hat / (std::sqrt(v_hat) + p.eta);
  }
}

Adam::Adam(std::vector<Var> weights, AdamParams params) : weights_(std::move(weights)), params_(params) {
  params_.validate();
  for (const auto& w : weights_) {
    m_.emplace_back(w.shape());
    v_.emplace_back(w.shape());
  }
}

void Adam::step() {
  ++step_;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    adam_step(weights_[i].mutable_value(), weights_[i].grad(), m_[i], v_[i], step_, params_);
}

void Adam::zero_grad() {
  for (auto& w : weights_) w.zero_grad();
}

Var mse_loss(const Var& pred, const Array& target) {
  if (pred.shape() != target.shape())
    throw DimensionError("mse_loss: prediction " + to_string(pred.shape()) + " vs target " +
                         to_string(target.shape()));
  const Var diff = ad::sub(pred, ad::constant(target));
  return ad::mean(ad::mul(diff, diff));
}

// -- NMSE -----------------------------------------------------------------------------

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(ratio));
}

namespace {
template <class T>
double ratio_impl(std::span<const T> pred, std::span<const T> truth) {
  if (pred.size() != truth.size()) throw DimensionError("nmse: prediction and truth sizes differ");
  double err = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    err += std::norm(pred[i] - truth[i]);
    energy += std::norm(truth[i]);
  }
  if (!(energy > 0.0)) throw DataError("nmse: ground truth has zero energy");
  return err / energy;
}
}  // namespace

double nmse_ratio(std::span<const double> pred, std::span<const double> truth) { return ratio_impl(pred, truth); }
double nmse_ratio(std::span<const cdouble> pred, std::span<const cdouble> truth) { return ratio_impl(pred, truth); }

Nmse nmse(const std::vector<Array>& preds, const std::vector<Array>& truths) {
  if (preds.size() != truths.size() || preds.empty()) throw DimensionError("nmse: batch sizes differ or are empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].shape() != truths[i].shape()) throw DimensionError("nmse: sample shapes differ");
    acc += nmse_ratio(preds[i].values(), truths[i].values());
  }
  const double lin = acc / static_cast<double>(preds.size());
  return {lin, to_db(lin)};
}

Nmse nmse(const Array& pred, const Array& truth) { return nmse(std::vector<Array>{pred}, std::vector<Array>{truth}); }

// -- standardization ------------------------------------------------------------------

Standardization fit_standardization(const CsiDataset& data,
                                    std::span<const std::pair<std::size_t, std::size_t>> ranges) {
  const std::size_t per = data.subcarriers * data.aps;
  double sr = 0.0, si = 0.0;
  std::size_t n = 0;
  for (auto [b, e] : ranges) {
    if (b >= e || e > data.snapshots) throw DataError("standardization range outside the dataset");
    for (std::size_t i = b * per; i < e * per; ++i) {
      sr += data.csi[i].real();
      si += data.csi[i].imag();
    }
    n += (e - b) * per;
  }
  if (n == 0) throw DataError("standardization needs at least one snapshot");
  Standardization s;
  s.mean_re = sr / static_cast<double>(n);
  s.mean_im = si / static_cast<double>(n);
  double vr = 0.0, vi = 0.0;
  for (auto [b, e] : ranges)
    for (std::size_t i = b * per; i < e * per; ++i) {
      vr += (data.csi[i].real() - s.mean_re) * (data.csi[i].real() - s.mean_re);
      vi += (data.csi[i].imag() - s.mean_im) * (data.csi[i].imag() - s.mean_im);
    }
  s.std_re = std::sqrt(vr / static_cast<double>(n));
  s.std_im = std::sqrt(vi / static_cast<double>(n));
  if (!(s.std_re > 0.0) || !(s.std_im > 0.0)) throw DataError("constant CSI part cannot be standardized");
  return s;
}

Standardization fit_standardization(const CsiDataset& data, std::size_t train_snapshots) {
  const std::pair<std::size_t, std::size_t> r{0, train_snapshots};
  return fit_standardization(data, std::span(&r, 1));
}

StandardizedParts standardize(const CsiDataset& data, const Standardization& s) {
  data.validate();
  StandardizedParts out{Array({data.snapshots, data.subcarriers, data.aps}),
                        Array({data.snapshots, data.subcarriers, data.aps}), s};
  for (std::size_t i = 0; i < data.csi.size(); ++i) {
    out.re[i] = (data.csi[i].real() - s.mean_re) / s.std_re;
    out.im[i] = (data.csi[i].imag() - s.mean_im) / s.std_im;
  }
  return out;
}

std::vector<cdouble> destandardize(const Array& re, const Array& im, const Standardization& s) {
  if (re.shape() != im.shape()) throw DimensionError("destandardize: part shapes differ");
  std::vector<cdouble> out(re.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cdouble(re[i] * s.std_re + s.mean_re, im[i] * s.std_im + s.mean_im);
  return out;
}

// -- training -------------------------------------------------------------------------

void TrainConfig::validate() const {
  adam.validate();
  if (epochs == 0) throw ContractError("epochs must be positive");
  if (batch_size == 0) throw ContractError("batch size must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ContractError("train fraction must lie in (0, 1)");
}

std::vector<std::size_t> window_starts(std::size_t begin, std::size_t end, std::size_t window, std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t t = begin; t + window + horizon <= end; ++t) out.push_back(t);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Copies `count` consecutive snapshots starting at each of `starts` (offset
// by `shift`) into [B x count x L x M].
Array gather(const Array& series, std::span<const std::size_t> starts, std::size_t shift, std::size_t count) {
  const std::size_t per = series.dim(1) * series.dim(2);
  Array out({starts.size(), count, series.dim(1), series.dim(2)});
  for (std::size_t b = 0; b < starts.size(); ++b)
    std::copy_n(series.data() + (starts[b] + shift) * per, count * per, out.data() + b * count * per);
  return out;
}

Array stack_batches(const Array& a, const Array& b) {
  Shape s = a.shape();
  s[0] += b.dim(0);
  Array out(s);
  std::copy_n(a.data(), a.size(), out.data());
  std::copy_n(b.data(), b.size(), out.data() + a.size());
  return out;
}

std::vector<Var> leaves(const PredictorModel& model) {
  std::vector<Var> out;
  for (const auto& p : model.parameters()) out.push_back(p.var);
  return out;
}

void check_model_fits(const PredictorModel& model, const CsiDataset& data) {
  const ModelConfig& c = model.config();
  if (c.subcarriers != data.subcarriers || c.aps != data.aps)
    throw DimensionError("model is configured for " + std::to_string(c.subcarriers) + " x " +
                         std::to_string(c.aps) + " CSI, dataset is " + std::to_string(data.subcarriers) + " x " +
                         std::to_string(data.aps));
}

// Runs the optimization. `im_model` null means weight sharing: both parts
// are stacked into one batch for `re_model`.
void fit(PredictorModel& re_model, PredictorModel* im_model, const StandardizedParts& parts,
         std::vector<std::size_t> starts, const TrainConfig& cfg, TrainReport& report) {
  if (starts.empty()) throw DataError("no complete training window fits the training split");
  const ModelConfig& c = re_model.config();
  Adam opt_re(leaves(re_model), cfg.adam);
  std::optional<Adam> opt_im;
  if (im_model) opt_im.emplace(leaves(*im_model), cfg.adam);

  std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dULL);
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    std::shuffle(starts.begin(), starts.end(), rng);
    double loss_acc = 0.0;
    for (std::size_t b0 = 0; b0 < starts.size(); b0 += cfg.batch_size) {
      const std::size_t nb = std::min(cfg.batch_size, starts.size() - b0);
      const std::span<const std::size_t> idx(starts.data() + b0, nb);
      const Array x_re = gather(parts.re, idx, 0, c.window);
      const Array y_re = gather(parts.re, idx, c.window, c.horizon);
      const Array x_im = gather(parts.im, idx, 0, c.window);
      const Array y_im = gather(parts.im, idx, c.window, c.horizon);
      double batch_loss = 0.0;
      if (!im_model) {
        opt_re.zero_grad();
        const Var loss = mse_loss(re_model.forward(stack_batches(x_re, x_im)), stack_batches(y_re, y_im));
        batch_loss = loss.value()[0];
        if (!std::isfinite(batch_loss)) break;
        ad::backward(loss);
        opt_re.step();
      } else {
        opt_re.zero_grad();
        opt_im->zero_grad();
        const Var l_re = mse_loss(re_model.forward(x_re), y_re);
        const Var l_im = mse_loss(im_model->forward(x_im), y_im);
        batch_loss = 0.5 * (l_re.value()[0] + l_im.value()[0]);
        if (!std::isfinite(batch_loss)) break;
        ad::backward(l_re);
        ad::backward(l_im);
        opt_re.step();
        opt_im->step();
      }
      loss_acc += batch_loss * static_cast<double>(nb);
      if (!std::isfinite(loss_acc)) break;
    }
    const double epoch_loss = loss_acc / static_cast<double>(starts.size());
    if (!std::isfinite(epoch_loss))
      throw NumericError("training diverged in epoch " + std::to_string(epoch + 1) + " (non-finite loss)");
    for (const auto& p : re_model.parameters())
      for (double v : p.var.value().values())
        if (!std::isfinite(v)) throw NumericError("training diverged: non-finite weight in " + p.name);
    report.epoch_loss.push_back(epoch_loss);
    report.epoch_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    if (cfg.patience > 0) {
      if (epoch_loss < best) {
        best = epoch_loss;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        report.stopped_early = true;
        break;
      }
    }
  }
  report.epochs = report.epoch_loss.size();
}

TrainReport train_impl(PredictorModel& re_model, PredictorModel* im_model, const CsiDataset& data,
                       const TrainConfig& cfg) {
  cfg.validate();
  check_model_fits(re_model, data);
  if (im_model) {
    check_model_fits(*im_model, data);
    if (im_model->config().window != re_model.config().window ||
        im_model->config().horizon != re_model.config().horizon)
      throw DimensionError("real and imaginary models disagree on window or horizon");
  }
  const std::size_t split = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(data.snapshots)));
  const ModelConfig& c = re_model.config();
  if (split < c.window + c.horizon || data.snapshots - split < c.window + c.horizon)
    throw DataError("dataset of " + std::to_string(data.snapshots) + " snapshots is too short for window " +
                    std::to_string(c.window) + " and horizon " + std::to_string(c.horizon));
  TrainReport report;
  report.standardization = fit_standardization(data, split);
  const StandardizedParts parts = standardize(data, report.standardization);
  auto starts = window_starts(0, split, c.window, c.horizon);
  report.train_windows = starts.size();
  report.batch_size = cfg.batch_size;
  report.separate_parts = im_model != nullptr;
  fit(re_model, im_model, parts, std::move(starts), cfg, report);
  report.test = evaluate(re_model, im_model ? *im_model : re_model, parts, split, data.snapshots);
  report.complexity = count_complexity(re_model);
  if (im_model) {
    report.complexity.n_parameters += im_model->parameter_count();
    report.complexity.memory_mb = memory_mb(report.complexity.n_parameters);
  }
  return report;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

TrainReport train(PredictorModel& model, const CsiDataset& data, const TrainConfig& cfg) {
  return train_impl(model, nullptr, data, cfg);
}

TrainReport train_separate(PredictorModel& model_re, PredictorModel& model_im, const CsiDataset& data,
                           const TrainConfig& cfg) {
  if (&model_re == &model_im) throw ContractError("train_separate needs two distinct models");
  return train_impl(model_re, &model_im, data, cfg);
}

EvalResult evaluate(const PredictorModel& model_re, const PredictorModel& model_im, const StandardizedParts& parts,
                    std::size_t begin, std::size_t end) {
  const ModelConfig& c = model_re.config();
  const auto starts = window_starts(begin, end, c.window, c.horizon);
  if (starts.empty()) throw DataError("no complete test window fits the evaluation range");
  const std::size_t per = c.subcarriers * c.aps;
  const Standardization& s = parts.stats;
  EvalResult r;
  r.horizon_nmse.assign(c.horizon, 0.0);
  constexpr std::size_t kChunk = 128;
  for (std::size_t b0 = 0; b0 < starts.size(); b0 += kChunk) {
    const std::span<const std::size_t> idx(starts.data() + b0, std::min(kChunk, starts.size() - b0));
    const Array pr = model_re.forward(gather(parts.re, idx, 0, c.window)).value();
    const Array pi = model_im.forward(gather(parts.im, idx, 0, c.window)).value();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      double err_all = 0.0, energy_all = 0.0;
      for (std::size_t k = 0; k < c.horizon; ++k) {
        const std::size_t src = (idx[b] + c.window + k) * per;
        const std::size_t dst = (b * c.horizon + k) * per;
        double err = 0.0, energy = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
          const cdouble truth(parts.re[src + i] * s.std_re + s.mean_re, parts.im[src + i] * s.std_im + s.mean_im);
          const cdouble pred(pr[dst + i] * s.std_re + s.mean_re, pi[dst + i] * s.std_im + s.mean_im);
          err += std::norm(pred - truth);
          energy += std::norm(truth);
        }
        if (!(energy > 0.0)) throw DataError("evaluation target has zero energy");
        r.horizon_nmse[k] += err / energy;
        err_all += err;
        energy_all += energy;
      }
      r.total_nmse += err_all / energy_all;
    }
  }
  r.windows = starts.size();
  for (double& v : r.horizon_nmse) {
    v /= static_cast<double>(r.windows);
    if (!std::isfinite(v)) throw NumericError("non-finite NMSE");
    r.horizon_nmse_db.push_back(to_db(v));
  }
  r.total_nmse /= static_cast<double>(r.windows);
  r.total_nmse_db = to_db(r.total_nmse);
  return r;
}

std::string TrainReport::to_text() const {
  std::string s;
  s += "epochs = " + std::to_string(epochs) + "\n";
  s += "batch_size = " + std::to_string(batch_size) + "\n";
  s += "train_windows = " + std::to_string(train_windows) + "\n";
  s += "test_windows = " + std::to_string(test.windows) + "\n";
  s += std::string("separate_parts = ") + (separate_parts ? "true" : "false") + "\n";
  s += std::string("stopped_early = ") + (stopped_early ? "true" : "false") + "\n";
  s += "final_loss = " + (epoch_loss.empty() ? std::string("nan") : fmt("%.9g", epoch_loss.back())) + "\n";
  s += "nmse_db = " + fmt("%.4f", test.total_nmse_db) + "\n";
  for (std::size_t k = 0; k < test.horizon_nmse_db.size(); ++k)
    s += "nmse_db_k" + std::to_string(k + 1) + " = " + fmt("%.4f", test.horizon_nmse_db[k]) + "\n";
  s += "parameters = " + std::to_string(complexity.n_parameters) + "\n";
  s += "flops = " + std::to_string(complexity.n_flops) + "\n";
  s += "memory_mb = " + fmt("%.6f", complexity.memory_mb) + "\n";
  s += "mean_std_re = " + fmt("%.9g", standardization.mean_re) + " " + fmt("%.9g", standardization.std_re) + "\n";
  s += "mean_std_im = " + fmt("%.9g", standardization.mean_im) + " " + fmt("%.9g", standardization.std_im) + "\n";
  return s;
}

std::string TrainReport::nmse_csv() const {
  std::string s = "horizon_k,nmse_db\n";
  for (std::size_t k = 0; k < test.horizon_nmse_db.size(); ++k)
    s += std::to_string(k + 1) + "," + fmt("%.6f", test.horizon_nmse_db[k]) + "\n";
  return s;
}

CrossValidationResult k_fold_cross_validate(const CsiDataset& data, std::size_t folds,
                                            const std::vector<ModelConfig>& grid, const TrainConfig& cfg,
                                            const std::optional<Array>& propagation) {
  cfg.validate();
  if (folds < 2) throw ContractError("cross-validation needs at least two folds");
  if (grid.empty()) throw ContractError("cross-validation grid is empty");
  CrossValidationResult out;
  for (const ModelConfig& mc : grid) {
    std::vector<double> per_fold;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::size_t tb = f * data.snapshots / folds;
      const std::size_t te = (f + 1) * data.snapshots / folds;
      std::vector<std::pair<std::size_t, std::size_t>> ranges;
      if (tb > 0) ranges.emplace_back(0, tb);
      if (te < data.snapshots) ranges.emplace_back(te, data.snapshots);
      TrainReport report;
      report.standardization = fit_standardization(data, ranges);
      const StandardizedParts parts = standardize(data, report.standardization);
      std::vector<std::size_t> starts;
      for (auto [b, e] : ranges) {
        const auto s = window_starts(b, e, mc.window, mc.horizon);
        starts.insert(starts.end(), s.begin(), s.end());
      }
      PredictorModel model(mc, mc.uses_space_conv() ? propagation : std::nullopt);
      check_model_fits(model, data);
      model.initialize(cfg.seed);
      fit(model, nullptr, parts, std::move(starts), cfg, report);
      per_fold.push_back(evaluate(model, model, parts, tb, te).total_nmse);
    }
    out.mean_nmse.push_back(std::accumulate(per_fold.begin(), per_fold.end(), 0.0) /
                            static_cast<double>(per_fold.size()));
    out.fold_nmse.push_back(std::move(per_fold));
  }
  out.best = static_cast<std::size_t>(
      std::min_element(out.mean_nmse.begin(), out.mean_nmse.end()) - out.mean_nmse.begin());
  out.best_config = grid[out.best];
  return out;
}

// -- complexity -----------------------------------------------------------------------

double memory_mb(std::uint64_t n_parameters) {
  return 4.0 * static_cast<double>(n_parameters) / (1024.0 * 1024.0);
}

double estimated_time(std::uint64_t flops, const HardwareProfile& hw) {
  const double rate = hw.f_gpu * hw.n_unit * hw.n_core;
  if (!(rate > 0.0)) throw ContractError("hardware throughput must be positive");
  return static_cast<double>(flops) / rate;
}

std::uint64_t matmul_flops(std::uint64_t m, std::uint64_t k, std::uint64_t n) { return 2 * m * k * n; }

namespace {

// Multi-head attention with `tq` queries over `tk` keys. Softmax costs four
// operations per score (max shift, exp, sum, divide).
std::uint64_t attention_flops(const ModelConfig& c, std::uint64_t tq, std::uint64_t tk) {
  const std::uint64_t d = c.d_model, h = c.heads, dk = c.d_k, dv = c.d_v;
  const std::uint64_t per_head = matmul_flops(tq, d, dk) + matmul_flops(tk, d, dk) + matmul_flops(tk, d, dv) +
                                 matmul_flops(tq, dk, tk) + tq * tk + 4 * tq * tk + matmul_flops(tq, tk, dv);
  return h * per_head + matmul_flops(tq, h * dv, d);
}

// Residual add plus normalization: mean, centre, square, variance, divide
// per element and eps/sqrt per normalized column.
std::uint64_t add_norm_flops(const ModelConfig& c) {
  const std::uint64_t t = c.window, d = c.d_model;
  return t * d + 5 * t * d + 2 * (c.norm_axis == layers::NormAxis::time ? d : t);
}

std::uint64_t ffn_flops(const ModelConfig& c) {
  const std::uint64_t t = c.window, d = c.d_model;
  return matmul_flops(t, d, d) + t * d + matmul_flops(t, d, d);
}

}  // namespace

std::vector<LayerFlops> forward_flops(const ModelConfig& c) {
  c.validate();
  std::vector<LayerFlops> out;
  const std::uint64_t t = c.window, l = c.subcarriers, m = c.aps, n = l * m, k = c.horizon;
  if (c.uses_encoder()) {
    std::uint64_t width = n;
    if (c.uses_space_conv()) out.push_back({"space_conv", 2 * m * m * m + matmul_flops(t * l, m, m)});
    if (c.uses_freq_conv()) {
      out.push_back({"freq_conv.dwc", 2 * c.kernel * t * n});
      out.push_back({"freq_conv.pwc", matmul_flops(t, t, n)});
    }
    if (c.uses_space_conv() && c.uses_freq_conv()) width = 2 * n;
    out.push_back({"embed", matmul_flops(t, width, c.d_model)});
    if (c.alpha != 0.0) out.push_back({"positional", t * c.d_model});
    for (std::size_t b = 0; b < ModelConfig::kEncoderBlocks; ++b) {
      const std::string p = "enc" + std::to_string(b);
      out.push_back({p + ".attention", attention_flops(c, t, t)});
      out.push_back({p + ".add_norm", 2 * add_norm_flops(c)});
      out.push_back({p + ".ffn", ffn_flops(c)});
    }
    if (c.kind == ModelKind::transformer)
      for (std::size_t b = 0; b < c.decoder_blocks; ++b) {
        const std::string p = "dec" + std::to_string(b);
        out.push_back({p + ".attention", 2 * attention_flops(c, t, t)});
        out.push_back({p + ".add_norm", 3 * add_norm_flops(c)});
        out.push_back({p + ".ffn", ffn_flops(c)});
      }
    out.push_back({"head", matmul_flops(1, t * c.d_model, k * n)});
  } else if (c.kind == ModelKind::dnn) {
    out.push_back({"dnn.dense1", matmul_flops(1, t * n, c.hidden) + (c.linear_probe ? 0 : c.hidden)});
    out.push_back({"dnn.dense2", matmul_flops(1, c.hidden, k * n)});
  } else {
    const bool lstm = c.kind == ModelKind::lstm;
    const std::uint64_t hid = c.hidden, g = (lstm ? 4 : 1) * hid;
    for (std::size_t layer = 0; layer < ModelConfig::kRecurrentLayers; ++layer) {
      const std::uint64_t in = layer == 0 ? n : hid;
      std::uint64_t f = 0;
      for (std::uint64_t step = 0; step < t; ++step) {
        f += matmul_flops(1, in, g);
        if (step > 0) f += matmul_flops(1, hid, g) + g;
        if (!lstm) {
          f += hid;
        } else {
          // gate activations, i*g, optional f*c + add, tanh(c), o*tanh(c)
          f += g + hid + (step > 0 ? 2 * hid : 0) + hid + hid;
        }
      }
      out.push_back({(lstm ? "lstm" : "rnn") + std::to_string(layer), f});
    }
    out.push_back({"head", matmul_flops(1, hid, k * n)});
  }
  return out;
}

ComplexityReport summarize_complexity(std::uint64_t n_parameters, std::vector<LayerFlops> breakdown,
                                      const HardwareProfile& hw) {
  ComplexityReport r;
  r.n_parameters = n_parameters;
  for (const auto& lf : breakdown) r.n_flops += lf.flops;
  r.breakdown = std::move(breakdown);
  r.memory_mb = memory_mb(n_parameters);
  r.est_time_s = estimated_time(r.n_flops, hw);
  r.hardware = hw;
  return r;
}

ComplexityReport count_complexity(const PredictorModel& model, const HardwareProfile& hw) {
  return summarize_complexity(model.parameter_count(), forward_flops(model.config()), hw);
}

}  // namespace cfcp
