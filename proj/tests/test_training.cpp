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


#include <cmath>
#include <random>

#include "cfchanpred/error.hpp"
#include "cfchanpred/models.hpp"
#include "cfchanpred/training.hpp"
#include "doctest.h"
#include "gradcheck.hpp"

using namespace cfcp;

namespace {

// Deterministic complex series with a smooth time structure, [T x L x M].
CsiDataset toy_dataset(std::size_t t_total, std::size_t l, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  CsiDataset d;
  d.snapshots = t_total;
  d.subcarriers = l;
  d.aps = m;
  d.csi.resize(t_total * l * m);
  d.ap_positions = Array({m, 3});
  std::vector<double> ph(l * m);
  for (auto& p : ph) p = phase(rng);
  for (std::size_t t = 0; t < t_total; ++t)
    for (std::size_t i = 0; i < l * m; ++i)
      d.csi[t * l * m + i] = std::polar(1.0 + 0.1 * static_cast<double>(i % 3), 0.2 * static_cast<double>(t) + ph[i]);
  return d;
}

ModelConfig tiny(ModelKind kind, std::size_t l, std::size_t m) {
  ModelConfig c;
  c.kind = kind;
  c.window = 4;
  c.horizon = 2;
  c.subcarriers = l;
  c.aps = m;
  c.d_model = 4;
  c.d_k = c.d_v = 2;
  c.hidden = 8;
  c.kernel = 1;
  return c;
}

}  // namespace

TEST_CASE("glorot bound and initializer") {
  CHECK(glorot_bound({3, 5}) == doctest::Approx(std::sqrt(6.0 / 8.0)));
  CHECK(glorot_bound({2, 3, 4}) == doctest::Approx(std::sqrt(6.0 / 10.0)));
  CHECK_THROWS_AS(glorot_bound({}), ContractError);
  const Array a = init_glorot({20, 30}, 7);
  const double b = glorot_bound({20, 30});
  for (double v : a.values()) CHECK(std::abs(v) <= b);
  CHECK(a == init_glorot({20, 30}, 7));
  CHECK_FALSE(a == init_glorot({20, 30}, 7, 1));
  CHECK_FALSE(a == init_glorot({20, 30}, 8));
}

TEST_CASE("adam step by hand") {
  AdamParams p;
  p.learning_rate = 0.1;
  Array w({1}, 1.0), g({1}, 0.5), m({1}), v({1});
  adam_step(w, g, m, v, 1, p);
  CHECK(m[0] == doctest::Approx(0.05));
  CHECK(v[0] == doctest::Approx(0.00025));
  // Bias-corrected first step moves by lr * g / (|g| + eta).
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  g[0] = -1.0;
  adam_step(w, g, m, v, 2, p);
  const double m2 = 0.9 * 0.05 - 0.1, v2 = 0.999 * 0.00025 + 0.001;
  const double expect = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(w[0] == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(adam_step(w, g, m, v, 0, p), ContractError);
  Array wrong({2});
  CHECK_THROWS_AS(adam_step(w, wrong, m, v, 3, p), DimensionError);
  p.beta1 = 1.0;
  CHECK_THROWS_AS(p.validate(), ContractError);
}

TEST_CASE("adam minimizes a quadratic") {
  ad::Var w = ad::parameter(Array({3}, {2.0, -1.0, 0.5}));
  AdamParams p;
  p.learning_rate = 0.05;
  Adam opt({w}, p);
  const Array target({3}, {0.3, 0.1, -0.2});
  for (int i = 0; i < 2000; ++i) {
    opt.zero_grad();
    ad::backward(mse_loss(w, target));
    opt.step();
  }
  CHECK(opt.steps_taken() == 2000);
  for (std::size_t i = 0; i < 3; ++i) CHECK(w.value()[i] == doctest::Approx(target[i]).epsilon(1e-3));
}

TEST_CASE("mse loss value and gradient") {
  ad::Var p = ad::parameter(Array({2, 2}, {1.0, 2.0, 3.0, 4.0}));
  const Array t({2, 2}, {0.0, 2.0, 5.0, 4.0});
  const ad::Var l = mse_loss(p, t);
  CHECK(l.value()[0] == doctest::Approx(5.0 / 4.0));
  ad::backward(l);
  CHECK(p.grad() == Array({2, 2}, {0.5, 0.0, -1.0, 0.0}));
  CHECK_THROWS_AS(mse_loss(p, Array({4})), DimensionError);
}

TEST_CASE("nmse definitions") {
  const std::vector<double> truth{1.0, -2.0, 2.0};
  CHECK(nmse_ratio(truth, truth) == 0.0);
  CHECK(to_db(0.0) == kDbFloor);
  CHECK(to_db(0.1) == doctest::Approx(-10.0));
  const std::vector<double> zero(3, 0.0);
  CHECK(nmse_ratio(zero, truth) == doctest::Approx(1.0));
  CHECK_THROWS_AS(nmse_ratio(truth, zero), DataError);
  const std::vector<cdouble> ct{{1.0, 1.0}, {0.0, 2.0}};
  const std::vector<cdouble> cp{{1.0, 0.0}, {0.0, 2.0}};
  CHECK(nmse_ratio(cp, ct) == doctest::Approx(1.0 / 6.0));

  // Batch NMSE is the mean of per-sample ratios, not the pooled ratio.
  const std::vector<Array> truths{Array({2}, {1.0, 0.0}), Array({2}, {10.0, 0.0})};
  const std::vector<Array> preds{Array({2}, {0.0, 0.0}), Array({2}, {10.0, 0.0})};
  const Nmse n = nmse(preds, truths);
  CHECK(n.linear == doctest::Approx(0.5));
  CHECK(n.db == doctest::Approx(10.0 * std::log10(0.5)));
  CHECK_THROWS_AS(nmse(std::vector<Array>{}, std::vector<Array>{}), DimensionError);
}

TEST_CASE("standardization round trip") {
  CsiDataset d = toy_dataset(30, 2, 3, 1);
  const Standardization s = fit_standardization(d, 20);
  double mean = 0.0;
  for (std::size_t i = 0; i < 20 * 6; ++i) mean += d.csi[i].real();
  CHECK(s.mean_re == doctest::Approx(mean / 120.0));
  const StandardizedParts parts = standardize(d, s);
  double m2 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < 120; ++i) m2 += parts.re[i];
  m2 /= 120.0;
  for (std::size_t i = 0; i < 120; ++i) v2 += (parts.re[i] - m2) * (parts.re[i] - m2);
  CHECK(std::abs(m2) < 1e-12);
  CHECK(v2 / 120.0 == doctest::Approx(1.0));
  const auto back = destandardize(parts.re, parts.im, s);
  for (std::size_t i = 0; i < d.csi.size(); ++i) CHECK(std::abs(back[i] - d.csi[i]) < 1e-12);

  const std::pair<std::size_t, std::size_t> ranges[] = {{0, 10}, {10, 20}};
  const Standardization s2 = fit_standardization(d, ranges);
  CHECK(s2.mean_re == doctest::Approx(s.mean_re).epsilon(1e-12));
  CHECK(s2.std_im == doctest::Approx(s.std_im).epsilon(1e-12));

  CsiDataset flat = d;
  for (auto& v : flat.csi) v = {1.0, 1.0};
  CHECK_THROWS_AS(fit_standardization(flat, 20), DataError);
}

TEST_CASE("window starts") {
  CHECK(window_starts(0, 20, 10, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(window_starts(16, 20, 3, 1) == std::vector<std::size_t>{16});
  CHECK(window_starts(0, 14, 10, 5).empty());
}

TEST_CASE("evaluate with a zero model gives unit NMSE") {
  CsiDataset d = toy_dataset(30, 2, 3, 2);
  const StandardizedParts parts = standardize(d, Standardization{});
  PredictorModel m(tiny(ModelKind::dnn, 2, 3));
  const EvalResult r = evaluate(m, m, parts, 20, 30);
  CHECK(r.windows == 5);
  CHECK(r.total_nmse == doctest::Approx(1.0));
  REQUIRE(r.horizon_nmse.size() == 2);
  for (double v : r.horizon_nmse_db) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate(m, m, parts, 25, 30), DataError);
}

TEST_CASE("training reduces loss, is deterministic and reports") {
  const CsiDataset d = toy_dataset(60, 2, 3, 3);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  cfg.adam.learning_rate = 1e-2;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    PredictorModel m(tiny(ModelKind::dnn, 2, 3));
    m.initialize(4);
    const TrainReport r = train(m, d, cfg);
    CHECK(r.epoch_loss.size() == 15);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
    CHECK(r.test.total_nmse_db < 0.0);
    CHECK(r.train_windows == window_starts(0, 48, 4, 2).size());
    CHECK(r.test.windows == window_starts(48, 60, 4, 2).size());
    CHECK(r.complexity.n_parameters == m.parameter_count());
    CHECK(r.nmse_csv().rfind("horizon_k,nmse_db\n", 0) == 0);
    if (run == 0)
      first = r.to_text();
    else
      CHECK(r.to_text() == first);
  }
  CHECK(first.find("second") == std::string::npos);
}

TEST_CASE("separate real and imaginary models") {
  const CsiDataset d = toy_dataset(60, 2, 3, 5);
  TrainConfig cfg;
  cfg.epochs = 3;
  PredictorModel re(tiny(ModelKind::dnn, 2, 3)), im(tiny(ModelKind::dnn, 2, 3));
  re.initialize(1);
  im.initialize(2);
  const TrainReport r = train_separate(re, im, d, cfg);
  CHECK(r.separate_parts);
  CHECK_THROWS_AS(train_separate(re, re, d, cfg), ContractError);
}

TEST_CASE("training contracts") {
  const CsiDataset d = toy_dataset(60, 2, 3, 6);
  TrainConfig cfg;
  cfg.epochs = 0;
  PredictorModel m(tiny(ModelKind::dnn, 2, 3));
  CHECK_THROWS_AS(train(m, d, cfg), ContractError);
  cfg.epochs = 1;
  PredictorModel wrong(tiny(ModelKind::dnn, 4, 3));
  CHECK_THROWS_AS(train(wrong, d, cfg), DimensionError);
  const CsiDataset short_data = toy_dataset(8, 2, 3, 6);
  CHECK_THROWS_AS(train(m, short_data, cfg), DataError);
  cfg.adam.learning_rate = 1e300;
  m.initialize(1);
  CHECK_THROWS_AS(train(m, d, cfg), NumericError);
}

TEST_CASE("cross-validation picks the lowest mean fold NMSE") {
  const CsiDataset d = toy_dataset(80, 2, 3, 7);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.adam.learning_rate = 1e-2;
  std::vector<ModelConfig> grid{tiny(ModelKind::dnn, 2, 3), tiny(ModelKind::dnn, 2, 3)};
  grid[1].window = 2;
  const CrossValidationResult r = k_fold_cross_validate(d, 4, grid, cfg);
  REQUIRE(r.mean_nmse.size() == 2);
  REQUIRE(r.fold_nmse[0].size() == 4);
  const std::size_t best = r.mean_nmse[0] <= r.mean_nmse[1] ? 0 : 1;
  CHECK(r.best == best);
  CHECK(r.best_config == grid[best]);
  double mean = 0.0;
  for (double v : r.fold_nmse[0]) mean += v / 4.0;
  CHECK(r.mean_nmse[0] == doctest::Approx(mean));
  CHECK_THROWS_AS(k_fold_cross_validate(d, 1, grid, cfg), ContractError);
}

TEST_CASE("complexity accounting") {
  CHECK(matmul_flops(2, 3, 4) == 48);
  CHECK(memory_mb(1024 * 1024) == doctest::Approx(4.0));
  CHECK(estimated_time(1350 * 5120, HardwareProfile{}) == doctest::Approx(1e-6));
  CHECK_THROWS_AS(estimated_time(1, HardwareProfile{0.0, 1.0, 1.0}), ContractError);
  const double table[][2] = {{1.25e6, 4.77}, {1.28e6, 4.88}, {4.37e6, 16.67}, {2.87e6, 10.95}, {1.46e6, 5.57}};
  for (const auto& row : table)
    CHECK(std::abs(memory_mb(static_cast<std::uint64_t>(row[0])) - row[1]) <= 0.01);

  for (auto kind : all_model_kinds()) {
    CAPTURE(to_string(kind));
    ModelConfig c;
    c.kind = kind;
    PredictorModel m(c);
    const ComplexityReport r = count_complexity(m);
    std::uint64_t sum = 0;
    for (const auto& l : r.breakdown) sum += l.flops;
    CHECK(sum == r.n_flops);
    CHECK(r.n_parameters == m.parameter_count());
    CHECK(r.memory_mb == doctest::Approx(memory_mb(r.n_parameters)));
    CHECK(r.n_flops > 0);
  }
  // Hand count for the DNN: two matmuls plus one relu per hidden unit.
  ModelConfig c = tiny(ModelKind::dnn, 2, 3);
  std::uint64_t sum = 0;
  for (const auto& l : forward_flops(c)) sum += l.flops;
  CHECK(sum == matmul_flops(1, 4 * 6, 8) + 8 + matmul_flops(1, 8, 2 * 6));
}
