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


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cfchanpred/binary_io.hpp"
#include "cfchanpred/channel_sim.hpp"
#include "cfchanpred/dataset.hpp"
#include "cfchanpred/pipeline.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace cfcp;

namespace {

struct Workdir {
  fs::path path;
  Workdir() : path(fs::temp_directory_path() / "cfchanpred_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
};

int run(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" CFCHANPRED_CLI "' " + args + " >stdout.txt 2>stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kGen = "generate --aps 4 --subcarriers 8 --snapshots 200 --snapshot-interval 1e-4 --seed 5";
const std::string kModel = "--d-model 8 --d-k 4 --d-v 4 --hidden 8 --window 4 --horizon 2 --epochs 2";

}  // namespace

TEST_CASE("exit codes") {
  Workdir w;
  CHECK(run(w.path, "") == 2);
  CHECK(run(w.path, "frobnicate") == 2);
  CHECK(run(w.path, "--help") == 0);
  CHECK(run(w.path, "generate --aps nope") == 2);
  CHECK(run(w.path, "generate --snapshots 0") == 2);
  CHECK(run(w.path, "complexity --kernel 4") == 2);
  CHECK(run(w.path, "train --data missing.csif") == 3);
  CHECK(run(w.path, "generate --config missing.cfg") == 2);
  std::ofstream(w.path / "junk.csif") << "not a dataset";
  CHECK(run(w.path, "info --data junk.csif") == 3);
  REQUIRE(run(w.path, kGen + " --out d.csif") == 0);
  CHECK(run(w.path, "train --data d.csif --epochs 1 --lr 1e300 --d-model 8 --d-k 4 --d-v 4 --out diverged") == 4);
  CHECK(run(w.path, "train --data d.csif --window 400") == 3);
  CHECK(run(w.path, "info --data d.csif --model-file x") == 2);
  CHECK(run(w.path, "partition --data d.csif --threshold 1e-6") == 3);
}

TEST_CASE("generate writes the dataset the library produces") {
  Workdir w;
  REQUIRE(run(w.path, kGen + " --out d.csif") == 0);
  SimConfig c;
  c.aps = 4;
  c.subcarriers = 8;
  c.snapshots = 200;
  c.snapshot_interval = 1e-4;
  c.seed = 5;
  CHECK(read_csif(w.path / "d.csif").csi == generate(c).csi);
  CHECK(slurp(w.path / "stdout.txt").empty());
  CHECK(slurp(w.path / "stderr.txt").find("finished in") != std::string::npos);
}

TEST_CASE("config files and flag precedence") {
  Workdir w;
  std::ofstream(w.path / "gen.cfg") << "# small run\naps = 3\nsubcarriers = 4\nsnapshots = 50\nseed = 9\n";
  REQUIRE(run(w.path, "generate --config gen.cfg --snapshots 60 --out d.csif") == 0);
  const CsiDataset d = read_csif(w.path / "d.csif");
  CHECK(d.aps == 3);
  CHECK(d.subcarriers == 4);
  CHECK(d.snapshots == 60);
  std::ofstream(w.path / "bad.cfg") << "no_such_flag = 1\n";
  CHECK(run(w.path, "generate --config bad.cfg") == 2);
  std::ofstream(w.path / "broken.cfg") << "aps 3\n";
  CHECK(run(w.path, "generate --config broken.cfg") == 2);
}

TEST_CASE("train, evaluate, predict and info round trip") {
  Workdir w;
  REQUIRE(run(w.path, kGen + " --out d.csif") == 0);
  REQUIRE(run(w.path, "train --data d.csif " + kModel + " --out run") == 0);
  for (const char* f : {"model.cfwt", "train_report.txt", "nmse_vs_horizon.csv", "loss.csv"})
    CHECK(fs::exists(w.path / "run" / f));
  CHECK(slurp(w.path / "run/nmse_vs_horizon.csv").rfind("horizon_k,nmse_db\n", 0) == 0);
  REQUIRE(run(w.path, "evaluate --data d.csif --model-file run/model.cfwt --out ev") == 0);
  // Evaluating the saved model reproduces the training report's test NMSE.
  const auto report = parse_config_text(slurp(w.path / "run/train_report.txt"));
  const auto eval = parse_config_text(slurp(w.path / "ev/eval_report.txt"));
  auto value = [](const ConfigEntries& e, const std::string& key) {
    for (const auto& [k, v] : e)
      if (k == key) return std::stod(v);
    return std::nan("");
  };
  CHECK(value(eval, "nmse_db") == doctest::Approx(value(report, "nmse_db")).epsilon(1e-3));
  REQUIRE(run(w.path, "predict --data d.csif --model-file run/model.cfwt --start 10 --out p.csv") == 0);
  const std::string p = slurp(w.path / "p.csv");
  CHECK(std::count(p.begin(), p.end(), '\n') == 1 + 2 * 8 * 4);
  CHECK(run(w.path, "predict --data d.csif --model-file run/model.cfwt --start 198 --out p.csv") == 3);
  REQUIRE(run(w.path, "info --model-file run/model.cfwt") == 0);
  CHECK(slurp(w.path / "stdout.txt").find("standardization = present") != std::string::npos);

  REQUIRE(run(w.path, "train --data d.csif " + kModel + " --separate --model lstm --out sep") == 0);
  CHECK(fs::exists(w.path / "sep/model_im.cfwt"));
  CHECK(run(w.path, "evaluate --data d.csif --model-file sep/model.cfwt --model-im-file sep/model_im.cfwt --out ev2") ==
        0);
}

TEST_CASE("analyze and complexity outputs") {
  Workdir w;
  REQUIRE(run(w.path, kGen + " --out d.csif") == 0);
  REQUIRE(run(w.path, "analyze --data d.csif --max-lag 20 --adjacency distance --out an") == 0);
  for (const char* f : {"report.txt", "pacf.csv", "freq_pcc.csv", "adjacency.csv"}) CHECK(fs::exists(w.path / "an" / f));
  REQUIRE(run(w.path, "complexity --model transformer --out cx") == 0);
  const std::string t = slurp(w.path / "cx/complexity.txt");
  CHECK(t.find("memory_mb = ") != std::string::npos);
  CHECK(t.find("flops.") != std::string::npos);
}

TEST_CASE("partition separates two delay supports") {
  Workdir w;
  // One mixed series: source 0 in bins [0, 4), source 1 in bins [4, 8).
  std::vector<std::vector<std::vector<cdouble>>> mixed(1);
  for (int t = 0; t < 10; ++t) {
    CirFrame f;
    f.taps.assign(16, 0.0);
    f.taps[1] = {1.0, static_cast<double>(t)};
    f.taps[5] = {0.5, -1.0};
    mixed[0].push_back(cir_to_cfr(f));
  }
  write_csif(w.path / "mixed.csif", build_dataset_from_cfrs(mixed));
  REQUIRE(run(w.path, "partition --data mixed.csif --windows 0:4:0,4:8:1 --out parts.csif") == 0);
  const CsiDataset parts = read_csif(w.path / "parts.csif");
  CHECK(parts.aps == 2);
  CHECK(parts.snapshots == 10);
  CHECK(fs::exists(w.path / "pdp.csv"));
  // Only single-precision rounding of the stored CFRs leaks out of the windows.
  const auto summary = parse_config_text(slurp(w.path / "partition.txt"));
  REQUIRE(summary.size() == 4);
  CHECK(std::stod(summary[3].second) < 1e-10);
  CHECK(run(w.path, "partition --data mixed.csif --windows 0:5:0,4:8:1") == 2);
  CHECK(run(w.path, "partition --data mixed.csif") == 2);
  // 20 MHz over 16 bins: 50 ns per bin, so 200 ns splits at bin 4.
  REQUIRE(run(w.path, "partition --data mixed.csif --threshold 200e-9 --out thr.csif") == 0);
  CHECK(read_csif(w.path / "thr.csif").csi == parts.csi);
}
