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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "cfchanpred/channel_sim.hpp"
#include "cfchanpred/error.hpp"
#include "cfchanpred/pipeline.hpp"
#include "cfchanpred/training.hpp"
#include "doctest.h"

using namespace cfcp;

namespace {

std::vector<cdouble> random_complex(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cdouble> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double energy(std::span<const cdouble> v) {
  double e = 0.0;
  for (const auto& x : v) e += std::norm(x);
  return e;
}

CirFrame frame_with(std::vector<cdouble> taps) {
  CirFrame f;
  f.taps = std::move(taps);
  f.delay_resolution = 1.0;
  return f;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cfchanpred_test_" + name);
}

}  // namespace

TEST_CASE("CFR and CIR form a unitary pair") {
  const std::vector<cdouble> flat(16, 1.0);
  const CirFrame delta = cfr_to_cir(flat, 1e6, 3);
  CHECK(std::abs(delta.taps[0] - 4.0) < 1e-12);
  for (std::size_t n = 1; n < 16; ++n) CHECK(std::abs(delta.taps[n]) < 1e-12);
  CHECK(delta.delay_resolution == doctest::Approx(1.0 / 16e6));
  CHECK(delta.timestamp == 3);

  std::mt19937_64 rng(1);
  for (std::size_t n : {1u, 7u, 16u, 18u}) {
    const auto x = random_complex(n, rng);
    const CirFrame c = cfr_to_cir(x);
    CHECK(std::abs(energy(c.taps) - energy(x)) < 1e-10);
    CHECK(c.energy() == doctest::Approx(energy(x)));
    const auto back = cir_to_cfr(c);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
  CHECK_THROWS(cfr_to_cir(std::vector<cdouble>{}));
}

TEST_CASE("two-ray channel ripples with period four") {
  std::vector<cdouble> taps(16, 0.0);
  taps[0] = 1.0;
  taps[4] = 0.5;
  const auto cfr = cir_to_cfr(frame_with(taps));
  for (std::size_t l = 0; l + 4 < 16; ++l) CHECK(std::abs(std::abs(cfr[l]) - std::abs(cfr[l + 4])) < 1e-12);
  CHECK(std::abs(std::abs(cfr[0]) - std::abs(cfr[2])) > 0.1);
}

TEST_CASE("power delay profile") {
  std::vector<cdouble> a(4, 0.0), b(4, 0.0);
  a[0] = 1.0;
  b[0] = std::sqrt(3.0);
  b[2] = 1.0;
  const std::vector<CirFrame> frames{frame_with(a), frame_with(b)};
  const PowerDelayProfile p = compute_pdp(frames);
  CHECK(p.linear[0] == doctest::Approx(2.0));
  CHECK(p.linear[2] == doctest::Approx(0.5));
  CHECK(p.db[0] == doctest::Approx(0.0));
  CHECK(p.db[1] == kDbFloor);
  const std::vector<CirFrame> swapped{frame_with(b), frame_with(a)};
  CHECK(compute_pdp(swapped).linear == p.linear);
  const std::vector<CirFrame> single{frame_with(a)};
  CHECK(compute_pdp(single).db[3] == kDbFloor);
  CHECK_THROWS_AS(compute_pdp(std::span<const CirFrame>{}), DataError);
}

TEST_CASE("partition specs") {
  const PartitionSpec s = PartitionSpec::two_source(1e-6, 0.25e-6, 16);
  REQUIRE(s.windows.size() == 2);
  CHECK(s.windows[0].start == 0);
  CHECK(s.windows[0].end == 4);
  CHECK(s.windows[1].start == 4);
  CHECK(s.windows[1].end == 8);
  CHECK(s.ap_count() == 2);
  PartitionSpec bad;
  bad.windows = {{0, 5, 0}, {4, 8, 1}};
  CHECK_THROWS_AS(bad.validate(16), ContractError);
  bad.windows = {{0, 17, 0}};
  CHECK_THROWS_AS(bad.validate(16), ContractError);
  bad.windows = {{5, 3, 0}};
  CHECK_THROWS_AS(bad.validate(16), ContractError);
  CHECK_THROWS_AS(PartitionSpec::two_source(1e-9, 1e-6, 16), ContractError);
}

TEST_CASE("partitioning keeps energy bookkeeping") {
  std::mt19937_64 rng(2);
  std::vector<CirFrame> frames;
  for (int i = 0; i < 5; ++i) frames.push_back(frame_with(random_complex(8, rng)));
  double total = 0.0;
  for (const auto& f : frames) total += f.energy();

  PartitionSpec all;
  all.windows = {{0, 8, 0}};
  const Partition whole = partition_by_delay_window(frames, all);
  CHECK(whole.leakage == 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(whole.per_ap[0][i].taps == frames[i].taps);

  PartitionSpec split;
  split.windows = {{0, 3, 0}, {3, 6, 1}};
  const Partition p = partition_by_delay_window(frames, split);
  double parts = p.leakage;
  for (const auto& ap : p.per_ap)
    for (const auto& f : ap) parts += f.energy();
  CHECK(std::abs(parts - total) < 1e-10);
  CHECK(p.total_energy == doctest::Approx(total));

  PartitionSpec empty;
  empty.windows = {{2, 2, 0}};
  const Partition e = partition_by_delay_window(frames, empty);
  CHECK(e.leakage == doctest::Approx(total));
  for (const auto& f : e.per_ap[0]) CHECK(f.energy() == 0.0);
}

TEST_CASE("two sources with disjoint delay supports separate exactly") {
  std::mt19937_64 rng(3);
  SimConfig c;
  c.aps = 2;
  c.subcarriers = 32;
  c.snapshots = 20;
  const double res = 1.0 / c.bandwidth;
  // Band-limit each generated AP channel to its own delay window.
  const CsiDataset d = generate(c);
  std::vector<std::vector<std::vector<cdouble>>> truth(2);
  std::vector<CirFrame> mixed;
  for (std::size_t t = 0; t < c.snapshots; ++t) {
    std::vector<cdouble> sum(c.subcarriers, 0.0);
    for (std::size_t m = 0; m < 2; ++m) {
      std::vector<cdouble> cfr(c.subcarriers);
      for (std::size_t l = 0; l < c.subcarriers; ++l) cfr[l] = d.at(t, l, m);
      CirFrame cir = cfr_to_cir(cfr, c.subcarrier_spacing());
      for (std::size_t n = 0; n < c.subcarriers; ++n)
        if (n / 8 != m) cir.taps[n] = 0.0;
      truth[m].push_back(cir_to_cfr(cir));
      for (std::size_t l = 0; l < c.subcarriers; ++l) sum[l] += truth[m].back()[l];
    }
    mixed.push_back(cfr_to_cir(sum, c.subcarrier_spacing(), t));
  }
  const Partition p = partition_by_delay_window(mixed, PartitionSpec::two_source(8 * res, res, c.subcarriers));
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<cdouble> est, ref;
    for (std::size_t t = 0; t < c.snapshots; ++t) {
      const auto cfr = cir_to_cfr(p.per_ap[m][t]);
      est.insert(est.end(), cfr.begin(), cfr.end());
      ref.insert(ref.end(), truth[m][t].begin(), truth[m][t].end());
    }
    CHECK(to_db(nmse_ratio(est, ref)) < -40.0);
  }
  CHECK(p.leakage < 1e-20);
}

TEST_CASE("dataset assembly and CSIF files") {
  std::mt19937_64 rng(4);
  std::vector<std::vector<std::vector<cdouble>>> per_ap(2);
  for (auto& ap : per_ap)
    for (int t = 0; t < 5; ++t) ap.push_back(random_complex(18, rng));
  const CsiDataset d = build_dataset_from_cfrs(per_ap);
  CHECK(d.snapshots == 5);
  CHECK(d.subcarriers == 18);
  CHECK(d.aps == 2);
  CHECK(d.at(3, 7, 1) == per_ap[1][3][7]);
  CHECK(d.ap_positions == Array({2, 3}));
  CHECK_THROWS_AS(build_dataset_from_cfrs({}), DataError);
  auto ragged = per_ap;
  ragged[1].pop_back();
  CHECK_THROWS_AS(build_dataset_from_cfrs(ragged), DataError);

  SimConfig c;
  c.aps = 3;
  c.subcarriers = 4;
  c.snapshots = 50;
  CsiDataset g = generate(c);
  g.standardization = Standardization{0.1, 2.0, -0.5, 3.0};
  const auto bytes = encode_csif(g);
  CHECK(bytes.size() == 20 + 3 * 3 * 4 + 50 * 4 * 3 * 8 + 1 + 32);
  const auto path = temp_path("roundtrip.csif");
  write_csif(path, g);
  const CsiDataset back = read_csif(path);
  CHECK(back.csi == g.csi);
  CHECK(back.ap_positions == g.ap_positions);
  CHECK(back.standardization == g.standardization);
  CHECK(encode_csif(back) == bytes);
  std::filesystem::remove(path);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_csif(bad), DataError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_csif(bad), DataError);
  bad = bytes;
  bad.resize(100);
  CHECK_THROWS_AS(decode_csif(bad), DataError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_csif(bad), DataError);
  CHECK_THROWS_AS(read_csif(temp_path("missing.csif")), DataError);
}

TEST_CASE("config text") {
  const ConfigEntries e = parse_config_text("# comment\nseed = 7\n\n  epochs=3 # trailing\nout = a b\n");
  REQUIRE(e.size() == 3);
  CHECK(e[0] == std::pair<std::string, std::string>{"seed", "7"});
  CHECK(e[1] == std::pair<std::string, std::string>{"epochs", "3"});
  CHECK(e[2].second == "a b");
  CHECK_THROWS_AS(parse_config_text("seed 7\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text(" = 7\n"), UsageError);
  const auto path = temp_path("cfg.txt");
  std::ofstream(path) << "kind = lstm\n";
  CHECK(load_config(path).front().second == "lstm");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(temp_path("nope.txt")), DataError);
}
