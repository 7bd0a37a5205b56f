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


// Command-line front end: generate | analyze | train | evaluate | predict |
// complexity | partition | info.
//
// Exit codes: 0 success, 2 usage error, 3 data error (also dimension and
// contract violations), 4 numeric failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfchanpred/analysis.hpp"
#include "cfchanpred/binary_io.hpp"
#include "cfchanpred/channel_sim.hpp"
#include "cfchanpred/error.hpp"
#include "cfchanpred/graph.hpp"
#include "cfchanpred/models.hpp"
#include "cfchanpred/pipeline.hpp"
#include "cfchanpred/training.hpp"

namespace fs = std::filesystem;
using namespace cfcp;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log(const std::string& command, const std::string& message) {
  std::cerr << "cfchanpred " << command << ": " << message << "\n";
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// Invalid flag values are usage errors, not data errors.
template <class F>
auto checked(F&& f) {
  try {
    return f();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
}

// -- shared option groups -------------------------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, const std::string& out_default, const std::string& out_help) {
  c.out = out_default;
  app->add_option("--config", "key = value file; flags on the command line win");
  app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  app->add_option("--out", c.out, out_help)->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
}

struct SimFlags {
  SimConfig cfg;
  std::string scenario;
  double speed_kmh = 100.0;
  double delay_spread_ns = 50.0;
};

void add_sim(CLI::App* app, SimFlags& s) {
  app->add_option("--scenario", s.scenario, "delay-spread preset: umi, uma or rma");
  app->add_option("--aps", s.cfg.aps, "number of APs M")->capture_default_str();
  app->add_option("--subcarriers", s.cfg.subcarriers, "number of subcarriers L")->capture_default_str();
  app->add_option("--snapshots", s.cfg.snapshots, "number of snapshots")->capture_default_str();
  app->add_option("--area-side", s.cfg.area_side, "square deployment side, m")->capture_default_str();
  app->add_option("--carrier-freq", s.cfg.carrier_freq, "carrier frequency, Hz")->capture_default_str();
  app->add_option("--bandwidth", s.cfg.bandwidth, "bandwidth, Hz")->capture_default_str();
  app->add_option("--ue-speed", s.speed_kmh, "UE speed, km/h")->capture_default_str();
  app->add_option("--paths", s.cfg.paths, "multipath components per channel")->capture_default_str();
  app->add_option("--sinusoids", s.cfg.sinusoids, "Doppler sinusoids per path")->capture_default_str();
  app->add_option("--delay-spread", s.delay_spread_ns, "mean path delay, ns")->capture_default_str();
  app->add_option("--corr-distance", s.cfg.corr_distance, "spatial decorrelation distance, m (0 = none)")
      ->capture_default_str();
  app->add_flag("--decouple-space", s.cfg.decouple_space, "draw spatial correlation from unrelated positions");
  app->add_option("--snapshot-interval", s.cfg.snapshot_interval, "time between snapshots, s")
      ->capture_default_str();
  app->add_option("--noise-std", s.cfg.noise_std, "complex noise standard deviation")->capture_default_str();
}

SimConfig finish_sim(const SimFlags& s, std::uint64_t seed) {
  SimConfig c = s.cfg;
  if (!s.scenario.empty()) c.delay_spread = scenario_preset(s.scenario).delay_spread;
  else c.delay_spread = s.delay_spread_ns * 1e-9;
  c.ue_speed = s.speed_kmh / 3.6;
  c.seed = seed;
  checked([&] { c.validate(); return 0; });
  return c;
}

struct ModelFlags {
  ModelConfig cfg;
  std::string kind = "proposed";
  std::string norm_axis = "time";
};

void add_model(CLI::App* app, ModelFlags& m) {
  app->add_option("--model", m.kind, "proposed, variant_a, variant_b, variant_c, dnn, rnn, lstm, transformer")
      ->capture_default_str();
  app->add_option("--window", m.cfg.window, "input window T")->capture_default_str();
  app->add_option("--horizon", m.cfg.horizon, "prediction horizon K")->capture_default_str();
  app->add_option("--d-model", m.cfg.d_model, "embedding width")->capture_default_str();
  app->add_option("--heads", m.cfg.heads, "attention heads")->capture_default_str();
  app->add_option("--d-k", m.cfg.d_k, "key width per head")->capture_default_str();
  app->add_option("--d-v", m.cfg.d_v, "value width per head")->capture_default_str();
  app->add_option("--kernel", m.cfg.kernel, "FreqConv kernel size (odd)")->capture_default_str();
  app->add_option("--hidden", m.cfg.hidden, "baseline hidden width")->capture_default_str();
  app->add_option("--decoder-blocks", m.cfg.decoder_blocks, "transformer decoder blocks")->capture_default_str();
  app->add_option("--norm-axis", m.norm_axis, "Add & Norm statistics axis: time or feature")->capture_default_str();
  app->add_flag("--linear-probe", m.cfg.linear_probe, "DNN without activation");
  app->add_option("--alpha", m.cfg.alpha, "positional-encoding scale")->capture_default_str();
  app->add_option("--eps", m.cfg.eps, "Add & Norm constant")->capture_default_str();
}

ModelConfig finish_model(const ModelFlags& m, const CsiDataset* data) {
  ModelConfig c = m.cfg;
  c.kind = parse_model_kind(m.kind);
  if (m.norm_axis == "time")
    c.norm_axis = layers::NormAxis::time;
  else if (m.norm_axis == "feature")
    c.norm_axis = layers::NormAxis::feature;
  else
    throw UsageError("unknown norm axis '" + m.norm_axis + "' (expected time or feature)");
  if (data) {
    c.subcarriers = data->subcarriers;
    c.aps = data->aps;
  }
  checked([&] { c.validate(); return 0; });
  return c;
}

struct AdjacencyFlags {
  std::string kind = "pcc";
  std::string series = "magnitude-mean";
  double sigma = 0.0;
  double value = 0.3;
};

void add_adjacency(CLI::App* app, AdjacencyFlags& a) {
  app->add_option("--adjacency", a.kind, "pcc, distance, constant or identity")->capture_default_str();
  app->add_option("--pcc-series", a.series, "magnitude-mean, real-part or per-subcarrier")->capture_default_str();
  app->add_option("--sigma", a.sigma, "distance decay length, m (0 = area side / 4)")->capture_default_str();
  app->add_option("--adjacency-value", a.value, "off-diagonal value of the constant adjacency")
      ->capture_default_str();
}

double area_side_of(const CsiDataset& data) {
  if (data.config) return data.config->area_side;
  double side = 0.0;
  for (std::size_t m = 0; m < data.aps; ++m)
    side = std::max({side, data.ap_positions.at(m, 0), data.ap_positions.at(m, 1)});
  return side;
}

AdjacencyMatrix build_adjacency(const AdjacencyFlags& a, const CsiDataset& data) {
  switch (parse_adjacency_kind(a.kind)) {
    case AdjacencyKind::pcc:
      return build_adjacency_pcc(data, parse_pcc_series(a.series));
    case AdjacencyKind::distance: {
      const double sigma = a.sigma > 0.0 ? a.sigma : area_side_of(data) / 4.0;
      return build_adjacency_distance(data.ap_positions, sigma);
    }
    case AdjacencyKind::constant:
      return build_adjacency_constant(data.aps, a.value);
    case AdjacencyKind::identity:
      break;
  }
  return AdjacencyMatrix::empty(data.aps);
}

std::size_t split_point(std::size_t snapshots, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(snapshots)));
}

std::string complexity_text(const ComplexityReport& r) {
  std::string s;
  s += "parameters = " + std::to_string(r.n_parameters) + "\n";
  s += "flops = " + std::to_string(r.n_flops) + "\n";
  s += "memory_mb = " + num(r.memory_mb) + "\n";
  s += "est_time_s = " + num(r.est_time_s) + "\n";
  s += "f_gpu = " + num(r.hardware.f_gpu) + "\n";
  s += "n_unit = " + num(r.hardware.n_unit) + "\n";
  s += "n_core = " + num(r.hardware.n_core) + "\n";
  for (const auto& l : r.breakdown) s += "flops." + l.layer + " = " + std::to_string(l.flops) + "\n";
  return s;
}

std::string model_text(const ModelConfig& c) {
  std::string s;
  s += "model = " + to_string(c.kind) + "\n";
  s += "window = " + std::to_string(c.window) + "\n";
  s += "horizon = " + std::to_string(c.horizon) + "\n";
  s += "subcarriers = " + std::to_string(c.subcarriers) + "\n";
  s += "aps = " + std::to_string(c.aps) + "\n";
  s += "d_model = " + std::to_string(c.d_model) + "\n";
  s += "heads = " + std::to_string(c.heads) + "\n";
  s += "d_k = " + std::to_string(c.d_k) + "\n";
  s += "d_v = " + std::to_string(c.d_v) + "\n";
  s += "kernel = " + std::to_string(c.kernel) + "\n";
  s += "hidden = " + std::to_string(c.hidden) + "\n";
  s += "decoder_blocks = " + std::to_string(c.decoder_blocks) + "\n";
  s += std::string("norm_axis = ") + (c.norm_axis == layers::NormAxis::time ? "time" : "feature") + "\n";
  return s;
}

std::string eval_text(const EvalResult& r) {
  std::string s;
  s += "windows = " + std::to_string(r.windows) + "\n";
  s += "nmse = " + num(r.total_nmse) + "\n";
  s += "nmse_db = " + num(r.total_nmse_db) + "\n";
  for (std::size_t k = 0; k < r.horizon_nmse_db.size(); ++k)
    s += "nmse_db_k" + std::to_string(k + 1) + " = " + num(r.horizon_nmse_db[k]) + "\n";
  return s;
}

std::string horizon_csv(const EvalResult& r) {
  std::string s = "horizon_k,nmse_db\n";
  for (std::size_t k = 0; k < r.horizon_nmse_db.size(); ++k)
    s += std::to_string(k + 1) + "," + num(r.horizon_nmse_db[k]) + "\n";
  return s;
}

// -- config merging -----------------------------------------------------------------------

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Expands "--config FILE" into "--key=value" arguments placed before the
// command-line arguments, skipping keys that are given explicitly.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> file;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!file) return rest;
  ConfigEntries entries;
  try {
    entries = load_config(*file);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> out;
  if (!rest.empty()) out.push_back(rest.front());  // subcommand
  for (const auto& [key, value] : entries) {
    const std::string flag = "--" + key;
    if (key == "config") throw UsageError("config files cannot include other config files");
    if (!given(rest, flag)) out.push_back(flag + "=" + value);
  }
  out.insert(out.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfchanpred: space-time-frequency channel prediction for cell-free massive MIMO"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cfchanpred 0.1.0");

  // generate
  Common gen_common;
  SimFlags gen_sim;
  CLI::App* gen = app.add_subcommand("generate", "synthesize a CSIF dataset");
  add_common(gen, gen_common, "data.csif", "output CSIF file");
  add_sim(gen, gen_sim);

  // analyze
  Common an_common;
  std::string an_data;
  AnalysisOptions an_opts;
  std::string an_series = "magnitude-mean";
  AdjacencyFlags an_adj;
  CLI::App* an = app.add_subcommand("analyze", "PACF window length, kernel size and space correlation");
  add_common(an, an_common, "analysis", "output directory");
  an->add_option("--data", an_data, "input CSIF file")->required();
  an->add_option("--window-threshold", an_opts.window_threshold, "PACF threshold")->capture_default_str();
  an->add_option("--kernel-threshold", an_opts.kernel_threshold, "frequency PCC threshold")->capture_default_str();
  an->add_option("--max-lag", an_opts.max_lag, "largest PACF lag")->capture_default_str();
  add_adjacency(an, an_adj);

  // train
  Common tr_common;
  std::string tr_data;
  ModelFlags tr_model;
  AdjacencyFlags tr_adj;
  TrainConfig tr_cfg;
  bool tr_separate = false;
  CLI::App* tr = app.add_subcommand("train", "train a predictor and evaluate it on the test split");
  add_common(tr, tr_common, "run", "output directory");
  tr->add_option("--data", tr_data, "input CSIF file")->required();
  add_model(tr, tr_model);
  add_adjacency(tr, tr_adj);
  tr->add_option("--epochs", tr_cfg.epochs, "training epochs")->capture_default_str();
  tr->add_option("--batch-size", tr_cfg.batch_size, "windows per batch")->capture_default_str();
  tr->add_option("--lr", tr_cfg.adam.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--beta1", tr_cfg.adam.beta1, "Adam beta1")->capture_default_str();
  tr->add_option("--beta2", tr_cfg.adam.beta2, "Adam beta2")->capture_default_str();
  tr->add_option("--adam-eta", tr_cfg.adam.eta, "Adam denominator constant")->capture_default_str();
  tr->add_option("--train-fraction", tr_cfg.train_fraction, "chronological training share")->capture_default_str();
  tr->add_option("--patience", tr_cfg.patience, "early-stopping patience on training loss (0 = off)")
      ->capture_default_str();
  tr->add_flag("--separate", tr_separate, "independent real and imaginary models");

  // evaluate
  Common ev_common;
  std::string ev_data, ev_model, ev_model_im;
  double ev_fraction = 0.8;
  std::optional<std::size_t> ev_begin, ev_end;
  CLI::App* ev = app.add_subcommand("evaluate", "NMSE versus horizon of a saved model");
  add_common(ev, ev_common, "eval", "output directory");
  ev->add_option("--data", ev_data, "input CSIF file")->required();
  ev->add_option("--model-file", ev_model, "checkpoint (real part, or shared)")->required();
  ev->add_option("--model-im-file", ev_model_im, "checkpoint for the imaginary part");
  ev->add_option("--train-fraction", ev_fraction, "evaluate after this share of snapshots")->capture_default_str();
  ev->add_option("--begin", ev_begin, "first snapshot of the evaluation range");
  ev->add_option("--end", ev_end, "end of the evaluation range (exclusive)");

  // predict
  Common pr_common;
  std::string pr_data, pr_model, pr_model_im;
  std::size_t pr_start = 0;
  CLI::App* pr = app.add_subcommand("predict", "predict K snapshots after one window");
  add_common(pr, pr_common, "prediction.csv", "output CSV file");
  pr->add_option("--data", pr_data, "input CSIF file")->required();
  pr->add_option("--model-file", pr_model, "checkpoint (real part, or shared)")->required();
  pr->add_option("--model-im-file", pr_model_im, "checkpoint for the imaginary part");
  pr->add_option("--start", pr_start, "first snapshot of the input window")->capture_default_str();

  // complexity
  Common cx_common;
  ModelFlags cx_model;
  std::string cx_file;
  HardwareProfile cx_hw;
  CLI::App* cx = app.add_subcommand("complexity", "parameters, FLOPs, memory and estimated time");
  add_common(cx, cx_common, "complexity", "output directory");
  add_model(cx, cx_model);
  cx->add_option("--aps", cx_model.cfg.aps, "number of APs M")->capture_default_str();
  cx->add_option("--subcarriers", cx_model.cfg.subcarriers, "number of subcarriers L")->capture_default_str();
  cx->add_option("--model-file", cx_file, "take the configuration from a checkpoint");
  cx->add_option("--f-gpu", cx_hw.f_gpu, "clock, Hz")->capture_default_str();
  cx->add_option("--n-unit", cx_hw.n_unit, "operations per core per cycle")->capture_default_str();
  cx->add_option("--n-core", cx_hw.n_core, "cores")->capture_default_str();

  // partition
  Common pa_common;
  std::string pa_data, pa_windows;
  double pa_threshold = 0.0, pa_spacing = 0.0;
  CLI::App* pa = app.add_subcommand("partition", "split mixed CFRs into per-AP CFRs by delay windows");
  add_common(pa, pa_common, "partitioned.csif", "output CSIF file (pdp.csv and partition.txt alongside)");
  pa->add_option("--data", pa_data, "input CSIF file with one mixed CFR series")->required();
  pa->add_option("--threshold", pa_threshold, "two-source delay threshold, s");
  pa->add_option("--windows", pa_windows, "explicit windows start:end:ap,... in delay bins");
  pa->add_option("--subcarrier-spacing", pa_spacing, "Hz (0 = 20 MHz / L)")->capture_default_str();

  // info
  Common in_common;
  std::string in_data, in_model;
  CLI::App* in = app.add_subcommand("info", "describe a dataset or checkpoint");
  add_common(in, in_common, "", "optional output text file");
  in->add_option("--data", in_data, "CSIF file");
  in->add_option("--model-file", in_model, "checkpoint file");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "cfchanpred: " << e.what() << "\n";
    return kExitUsage;
  }

  const Stopwatch clock;
  std::string command;
  try {
    if (*gen) {
      command = "generate";
      const SimConfig cfg = finish_sim(gen_sim, gen_common.seed);
      const CsiDataset data = generate(cfg, gen_common.threads);
      if (const fs::path dir = fs::path(gen_common.out).parent_path(); !dir.empty()) fs::create_directories(dir);
      write_csif(gen_common.out, data);
      log(command, std::to_string(data.snapshots) + " x " + std::to_string(data.subcarriers) + " x " +
                       std::to_string(data.aps) + " written to " + gen_common.out);
    } else if (*an) {
      command = "analyze";
      const CsiDataset data = read_csif(an_data);
      an_opts.series = parse_pcc_series(an_adj.series);
      CorrelationReport report = analyze(data, an_opts);
      report.adjacency = build_adjacency(an_adj, data);
      const fs::path dir = prepare_dir(an_common.out);
      io::write_text_atomic(dir / "report.txt", report.to_text());
      io::write_text_atomic(dir / "pacf.csv", report.pacf_csv());
      io::write_text_atomic(dir / "freq_pcc.csv", report.freq_pcc_csv());
      io::write_text_atomic(dir / "adjacency.csv", report.adjacency_csv());
      std::cout << report.to_text();
    } else if (*tr) {
      command = "train";
      const CsiDataset data = read_csif(tr_data);
      const ModelConfig mc = finish_model(tr_model, &data);
      tr_cfg.seed = tr_common.seed;
      checked([&] { tr_cfg.validate(); return 0; });
      const std::size_t split = split_point(data.snapshots, tr_cfg.train_fraction);
      if (split < 2) throw DataError("training split is too short");
      // Adjacency from the training snapshots only.
      const Array propagation = normalized_propagation(build_adjacency(tr_adj, data.slice(0, split)));
      PredictorModel model(mc, propagation);
      model.initialize(tr_common.seed);
      std::optional<PredictorModel> model_im;
      TrainReport report;
      if (tr_separate) {
        model_im.emplace(mc, propagation);
        model_im->initialize(tr_common.seed + 1);
        report = train_separate(model, *model_im, data, tr_cfg);
      } else {
        report = train(model, data, tr_cfg);
      }
      const fs::path dir = prepare_dir(tr_common.out);
      save_checkpoint(dir / "model.cfwt", model, report.standardization);
      if (model_im) save_checkpoint(dir / "model_im.cfwt", *model_im, report.standardization);
      io::write_text_atomic(dir / "train_report.txt", model_text(mc) + report.to_text());
      io::write_text_atomic(dir / "nmse_vs_horizon.csv", report.nmse_csv());
      std::string loss = "epoch,loss\n";
      for (std::size_t e = 0; e < report.epoch_loss.size(); ++e)
        loss += std::to_string(e + 1) + "," + num(report.epoch_loss[e]) + "\n";
      io::write_text_atomic(dir / "loss.csv", loss);
      std::cout << report.to_text();
    } else if (*ev) {
      command = "evaluate";
      const CsiDataset data = read_csif(ev_data);
      const Checkpoint re = load_checkpoint(ev_model);
      std::optional<Checkpoint> im;
      if (!ev_model_im.empty()) im.emplace(load_checkpoint(ev_model_im));
      if (!re.standardization) throw DataError("checkpoint carries no standardization statistics");
      const StandardizedParts parts = standardize(data, *re.standardization);
      const std::size_t begin = ev_begin.value_or(split_point(data.snapshots, ev_fraction));
      const std::size_t end = ev_end.value_or(data.snapshots);
      if (begin >= end || end > data.snapshots) throw DataError("evaluation range outside the dataset");
      const EvalResult r = evaluate(re.model, im ? im->model : re.model, parts, begin, end);
      const fs::path dir = prepare_dir(ev_common.out);
      io::write_text_atomic(dir / "nmse_vs_horizon.csv", horizon_csv(r));
      io::write_text_atomic(dir / "eval_report.txt", eval_text(r));
      std::cout << eval_text(r);
    } else if (*pr) {
      command = "predict";
      const CsiDataset data = read_csif(pr_data);
      const Checkpoint re = load_checkpoint(pr_model);
      std::optional<Checkpoint> im;
      if (!pr_model_im.empty()) im.emplace(load_checkpoint(pr_model_im));
      const ModelConfig& c = re.model.config();
      if (pr_start + c.window > data.snapshots) throw DataError("input window runs past the dataset");
      const std::size_t per = data.subcarriers * data.aps;
      const std::vector<cdouble> window(data.csi.begin() + static_cast<std::ptrdiff_t>(pr_start * per),
                                        data.csi.begin() + static_cast<std::ptrdiff_t>((pr_start + c.window) * per));
      const auto out = predict_complex(re.model, im ? im->model : re.model, window, re.standardization);
      std::string csv = "k,subcarrier,ap,re,im\n";
      for (std::size_t k = 0; k < c.horizon; ++k)
        for (std::size_t l = 0; l < c.subcarriers; ++l)
          for (std::size_t m = 0; m < c.aps; ++m) {
            const cdouble v = out[(k * c.subcarriers + l) * c.aps + m];
            csv += std::to_string(k + 1) + "," + std::to_string(l) + "," + std::to_string(m) + "," + num(v.real()) +
                   "," + num(v.imag()) + "\n";
          }
      io::write_text_atomic(pr_common.out, csv);
    } else if (*cx) {
      command = "complexity";
      ModelConfig mc = cx_file.empty() ? finish_model(cx_model, nullptr) : load_checkpoint(cx_file).model.config();
      const PredictorModel model(mc);
      const ComplexityReport r = count_complexity(model, cx_hw);
      const fs::path dir = prepare_dir(cx_common.out);
      io::write_text_atomic(dir / "complexity.txt", model_text(mc) + complexity_text(r));
      std::cout << complexity_text(r);
    } else if (*pa) {
      command = "partition";
      const CsiDataset data = read_csif(pa_data);
      if (data.aps != 1) throw DataError("partition expects one mixed CFR series (M = 1)");
      const double spacing = pa_spacing > 0.0 ? pa_spacing : 20e6 / static_cast<double>(data.subcarriers);
      std::vector<CirFrame> frames;
      for (std::size_t t = 0; t < data.snapshots; ++t)
        frames.push_back(cfr_to_cir(
            std::span<const cdouble>(data.csi.data() + t * data.subcarriers, data.subcarriers), spacing, t));
      PartitionSpec spec;
      if (!pa_windows.empty()) {
        for (const auto& item : CLI::detail::split(pa_windows, ',')) {
          const auto f = CLI::detail::split(item, ':');
          if (f.size() != 3) throw UsageError("window '" + item + "' is not start:end:ap");
          try {
            spec.windows.push_back({std::stoul(f[0]), std::stoul(f[1]), std::stoul(f[2])});
          } catch (const std::logic_error&) {
            throw UsageError("window '" + item + "' is not numeric");
          }
        }
        checked([&] { spec.validate(data.subcarriers); return 0; });
      } else if (pa_threshold > 0.0) {
        spec = checked(
            [&] { return PartitionSpec::two_source(pa_threshold, frames.front().delay_resolution, data.subcarriers); });
      } else {
        throw UsageError("partition needs --threshold or --windows");
      }
      const Partition part = partition_by_delay_window(frames, spec);
      std::vector<std::vector<std::vector<cdouble>>> per_ap(part.per_ap.size());
      for (std::size_t a = 0; a < part.per_ap.size(); ++a)
        for (const auto& f : part.per_ap[a]) per_ap[a].push_back(cir_to_cfr(f));
      const fs::path base = fs::path(pa_common.out).parent_path();
      if (!base.empty()) fs::create_directories(base);
      write_csif(pa_common.out, build_dataset_from_cfrs(per_ap));
      const PowerDelayProfile pdp = compute_pdp(frames);
      std::string csv = "bin,delay_s,power,power_db\n";
      for (std::size_t n = 0; n < pdp.linear.size(); ++n)
        csv += std::to_string(n) + "," + num(static_cast<double>(n) * frames.front().delay_resolution) + "," +
               num(pdp.linear[n]) + "," + num(pdp.db[n]) + "\n";
      io::write_text_atomic(base / "pdp.csv", csv);
      std::string text = "aps = " + std::to_string(spec.ap_count()) + "\n";
      text += "total_energy = " + num(part.total_energy) + "\n";
      text += "leakage = " + num(part.leakage) + "\n";
      text += "leakage_fraction = " + num(part.total_energy > 0.0 ? part.leakage / part.total_energy : 0.0) + "\n";
      io::write_text_atomic(base / "partition.txt", text);
      std::cout << text;
    } else if (*in) {
      command = "info";
      if (in_data.empty() == in_model.empty()) throw UsageError("info needs exactly one of --data or --model-file");
      std::string text;
      if (!in_data.empty()) {
        const CsiDataset d = read_csif(in_data);
        double power = 0.0;
        for (const auto& v : d.csi) power += std::norm(v);
        text += "snapshots = " + std::to_string(d.snapshots) + "\n";
        text += "subcarriers = " + std::to_string(d.subcarriers) + "\n";
        text += "aps = " + std::to_string(d.aps) + "\n";
        text += "mean_power = " + num(power / static_cast<double>(d.csi.size())) + "\n";
        text += std::string("standardization = ") + (d.standardization ? "present" : "absent") + "\n";
      } else {
        const Checkpoint ck = load_checkpoint(in_model);
        text += model_text(ck.model.config());
        text += "parameters = " + std::to_string(ck.model.parameter_count()) + "\n";
        text += std::string("standardization = ") + (ck.standardization ? "present" : "absent") + "\n";
      }
      if (!in_common.out.empty()) io::write_text_atomic(in_common.out, text);
      std::cout << text;
    }
  } catch (const UsageError& e) {
    std::cerr << "cfchanpred " << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "cfchanpred " << command << ": numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "cfchanpred " << command << ": " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "cfchanpred " << command << ": " << e.what() << "\n";
    return kExitData;
  }
  log(command, "finished in " + num(clock.seconds()) + " s");
  return 0;
}
