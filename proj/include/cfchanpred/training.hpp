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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfchanpred/autodiff.hpp"
#include "cfchanpred/dataset.hpp"
#include "cfchanpred/models.hpp"

namespace cfcp {

// -- initialization and optimization -------------------------------------------------

/// sqrt(6) / sqrt(fan_in + fan_out) with the array matricized as
/// [prod(shape[0..r-2]) x shape[r-1]].
double glorot_bound(const Shape& shape);
/// i.i.d. uniform in +-glorot_bound(shape); `stream` selects an independent
/// substream of `seed`.
Array init_glorot(const Shape& shape, std::uint64_t seed, std::uint64_t stream = 0);

struct AdamParams {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta = 1e-8;  // added to sqrt(v_hat)

  void validate() const;
};

/// One Adam update of `weight` in place. `step` counts from 1.
void adam_step(Array& weight, const Array& grad, Array& first_moment, Array& second_moment, std::size_t step,
               const AdamParams& params);

/// Adam over a fixed set of leaves, reading their accumulated gradients.
class Adam {
 public:
  Adam(std::vector<ad::Var> weights, AdamParams params);
  void step();
  void zero_grad();
  std::size_t steps_taken() const { return step_; }

 private:
  std::vector<ad::Var> weights_;
  std::vector<Array> m_, v_;
  AdamParams params_;
  std::size_t step_ = 0;
};

/// Mean of squared differences over every element.
ad::Var mse_loss(const ad::Var& pred, const Array& target);

// -- NMSE ---------------------------------------------------------------------------

constexpr double kDbFloor = -300.0;
double to_db(double ratio);

/// ||pred - truth||^2 / ||truth||^2. DataError when truth has zero energy.
double nmse_ratio(std::span<const double> pred, std::span<const double> truth);
double nmse_ratio(std::span<const cdouble> pred, std::span<const cdouble> truth);

struct Nmse {
  double linear = 0.0;
  double db = 0.0;
};
/// Batch NMSE: mean of per-sample ratios.
Nmse nmse(const std::vector<Array>& preds, const std::vector<Array>& truths);
Nmse nmse(const Array& pred, const Array& truth);

// -- standardization ------------------------------------------------------------------

/// Per-part mean and standard deviation over snapshots [0, train_snapshots).
Standardization fit_standardization(const CsiDataset& data, std::size_t train_snapshots);
/// Statistics over the union of the given [begin, end) snapshot ranges.
Standardization fit_standardization(const CsiDataset& data,
                                    std::span<const std::pair<std::size_t, std::size_t>> ranges);

struct StandardizedParts {
  Array re;  // [T_total x L x M]
  Array im;
  Standardization stats;
};
StandardizedParts standardize(const CsiDataset& data, const Standardization& stats);
std::vector<cdouble> destandardize(const Array& re, const Array& im, const Standardization& stats);

// -- training -------------------------------------------------------------------------

struct TrainConfig {
  AdamParams adam;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  std::size_t patience = 0;       // early stopping on train loss; 0 = off
  bool separate_parts = false;    // informational; set by train_separate

  void validate() const;
};

/// Window start indices t such that [t, t + window + horizon) lies in [begin, end).
std::vector<std::size_t> window_starts(std::size_t begin, std::size_t end, std::size_t window, std::size_t horizon);

struct EvalResult {
  std::vector<double> horizon_nmse;     // linear, per step k = 1..K
  std::vector<double> horizon_nmse_db;
  double total_nmse = 0.0;              // mean over windows of sum_k err / sum_k energy
  double total_nmse_db = 0.0;
  std::size_t windows = 0;
};

struct HardwareProfile {
  double f_gpu = 1.35e9;   // Hz
  double n_unit = 1.0;
  double n_core = 5120.0;
};

struct LayerFlops {
  std::string layer;
  std::uint64_t flops = 0;
};

struct ComplexityReport {
  std::uint64_t n_parameters = 0;
  std::uint64_t n_flops = 0;   // one forward pass over one window
  double memory_mb = 0.0;      // 4 * n_parameters / 1024^2
  double est_time_s = 0.0;     // n_flops / (f_gpu * n_unit * n_core)
  HardwareProfile hardware;
  std::vector<LayerFlops> breakdown;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_seconds;
  EvalResult test;
  Standardization standardization;
  std::size_t train_windows = 0;
  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  bool separate_parts = false;
  bool stopped_early = false;
  ComplexityReport complexity;

  /// key = value text; wall-clock times are omitted so the text is
  /// reproducible.
  std::string to_text() const;
  /// "horizon_k,nmse_db" CSV.
  std::string nmse_csv() const;
};

/// Trains one weight-shared model on both parts (real and imaginary windows
/// stacked in every batch), then evaluates on the chronological test split.
/// The model is not re-initialized.
TrainReport train(PredictorModel& model, const CsiDataset& data, const TrainConfig& cfg);
/// Trains independent models for the real and imaginary parts.
TrainReport train_separate(PredictorModel& model_re, PredictorModel& model_im, const CsiDataset& data,
                           const TrainConfig& cfg);

/// Evaluates complex predictions over windows inside [begin, end), in
/// original units.
EvalResult evaluate(const PredictorModel& model_re, const PredictorModel& model_im, const StandardizedParts& parts,
                    std::size_t begin, std::size_t end);

struct CrossValidationResult {
  std::size_t best = 0;
  ModelConfig best_config;
  std::vector<double> mean_nmse;               // per candidate, linear
  std::vector<std::vector<double>> fold_nmse;  // [candidate][fold], linear
};

/// Contiguous k-fold selection over a grid of configurations: train on all
/// other folds, test on one, rotate, pick the lowest mean NMSE. Each
/// candidate is initialized with `cfg.seed`; `propagation` feeds SpaceConv.
CrossValidationResult k_fold_cross_validate(const CsiDataset& data, std::size_t folds,
                                            const std::vector<ModelConfig>& grid, const TrainConfig& cfg,
                                            const std::optional<Array>& propagation = std::nullopt);

// -- complexity -----------------------------------------------------------------------

double memory_mb(std::uint64_t n_parameters);
double estimated_time(std::uint64_t flops, const HardwareProfile& hw);
std::uint64_t matmul_flops(std::uint64_t m, std::uint64_t k, std::uint64_t n);
/// Analytic per-layer FLOPs of one forward pass over one window.
std::vector<LayerFlops> forward_flops(const ModelConfig& config);
ComplexityReport summarize_complexity(std::uint64_t n_parameters, std::vector<LayerFlops> breakdown,
                                      const HardwareProfile& hw);
ComplexityReport count_complexity(const PredictorModel& model, const HardwareProfile& hw = {});

}  // namespace cfcp
