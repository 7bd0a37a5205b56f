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

#include "cfchanpred/models.hpp"

#include <algorithm>
#include <map>

#include "cfchanpred/binary_io.hpp"
#include "cfchanpred/error.hpp"
#include "cfchanpred/training.hpp"

namespace cfcp {

using ad::Var;

namespace {

const std::map<ModelKind, std::string>& kind_names() {
  static const std::map<ModelKind, std::string> names = {
      {ModelKind::proposed, "proposed"},       {ModelKind::variant_a, "variant_a"},
      {ModelKind::variant_b, "variant_b"},     {ModelKind::variant_c, "variant_c"},
      {ModelKind::dnn, "dnn"},                 {ModelKind::rnn, "rnn"},
      {ModelKind::lstm, "lstm"},               {ModelKind::transformer, "transformer"}};
  return names;
}

std::string indexed(const std::string& prefix, std::size_t i, const std::string& suffix = "") {
  return prefix + std::to_string(i) + suffix;
}

void add_attention_layout(std::vector<std::pair<std::string, Shape>>& out, const std::string& prefix,
                          const ModelConfig& c) {
  for (std::size_t i = 0; i < c.heads; ++i) {
    out.emplace_back(indexed(prefix + ".q", i), Shape{c.d_model, c.d_k});
    out.emplace_back(indexed(prefix + ".k", i), Shape{c.d_model, c.d_k});
    out.emplace_back(indexed(prefix + ".v", i), Shape{c.d_model, c.d_v});
  }
  out.emplace_back(prefix + ".o", Shape{c.heads * c.d_v, c.d_model});
}

}  // namespace

std::string to_string(ModelKind kind) { return kind_names().at(kind); }

ModelKind parse_model_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  throw UsageError("unknown model kind '" + name + "'");
}

std::vector<ModelKind> all_model_kinds() {
  std::vector<ModelKind> kinds;
  for (const auto& [k, n] : kind_names()) kinds.push_back(k);
  return kinds;
}

bool ModelConfig::uses_encoder() const {
  return kind == ModelKind::proposed || kind == ModelKind::variant_a || kind == ModelKind::variant_b ||
         kind == ModelKind::variant_c || kind == ModelKind::transformer;
}

void ModelConfig::validate() const {
  if (window == 0 || horizon == 0 || subcarriers == 0 || aps == 0 || d_model == 0 || heads == 0 || d_k == 0 ||
      d_v == 0 || kernel == 0 || hidden == 0)
    throw ContractError("model sizes must all be at least 1");
  if (kernel % 2 == 0) throw ContractError("kernel size must be odd, got " + std::to_string(kernel));
  if (uses_freq_conv() && kernel > subcarriers)
    throw ContractError("kernel size " + std::to_string(kernel) + " exceeds subcarrier count " +
                        std::to_string(subcarriers));
  if (!(eps >= 0.0)) throw ContractError("eps must be non-negative");
}

// -- layout --------------------------------------------------------------------------

std::vector<std::pair<std::string, Shape>> PredictorModel::weight_layout(const ModelConfig& c) {
  std::vector<std::pair<std::string, Shape>> out;
  const std::size_t lm = c.subcarriers * c.aps;
  const std::size_t klm = c.horizon * lm;
  if (c.uses_encoder()) {
    if (c.uses_space_conv()) out.emplace_back("space.w_s", Shape{c.aps, c.aps});
    if (c.uses_freq_conv()) {
      out.emplace_back("freq.dwc", Shape{c.window, c.kernel, c.aps});
      out.emplace_back("freq.pwc", Shape{c.window, c.window});
    }
    const std::size_t branches = (c.uses_space_conv() ? 1 : 0) + (c.uses_freq_conv() ? 1 : 0);
    out.emplace_back("embed", Shape{std::max<std::size_t>(branches, 1) * lm, c.d_model});
    for (std::size_t b = 0; b < ModelConfig::kEncoderBlocks; ++b) {
      const std::string p = indexed("enc", b);
      add_attention_layout(out, p, c);
      out.emplace_back(p + ".d1", Shape{c.d_model, c.d_model});
      out.emplace_back(p + ".d2", Shape{c.d_model, c.d_model});
    }
    if (c.kind == ModelKind::transformer)
      for (std::size_t b = 0; b < c.decoder_blocks; ++b) {
        const std::string p = indexed("dec", b);
        add_attention_layout(out, p + ".self", c);
        add_attention_layout(out, p + ".cross", c);
        out.emplace_back(p + ".d1", Shape{c.d_model, c.d_model});
        out.emplace_back(p + ".d2", Shape{c.d_model, c.d_model});
      }
    out.emplace_back("head", Shape{c.window * c.d_model, klm});
  } else if (c.kind == ModelKind::dnn) {
    out.emplace_back("dnn.w1", Shape{c.window * lm, c.hidden});
    out.emplace_back("dnn.w2", Shape{c.hidden, klm});
  } else {
    const bool lstm = c.kind == ModelKind::lstm;
    const std::string p = lstm ? "lstm" : "rnn";
    const std::size_t gates = lstm ? 4 : 1;
    for (std::size_t l = 0; l < ModelConfig::kRecurrentLayers; ++l) {
      out.emplace_back(indexed(p, l, ".wx"), Shape{l == 0 ? lm : c.hidden, gates * c.hidden});
      out.emplace_back(indexed(p, l, ".wh"), Shape{c.hidden, gates * c.hidden});
    }
    out.emplace_back("head", Shape{c.hidden, klm});
  }
  return out;
}

PredictorModel::PredictorModel(ModelConfig config, std::optional<Array> propagation)
    : config_(std::move(config)) {
  config_.validate();
  propagation_ = propagation ? std::move(*propagation) : Array::identity(config_.aps);
  if (propagation_.shape() != Shape{config_.aps, config_.aps})
    throw DimensionError("propagation matrix " + to_string(propagation_.shape()) + " does not match " +
                         std::to_string(config_.aps) + " APs");
  for (auto& [name, shape] : weight_layout(config_)) params_.push_back({name, ad::parameter(Array(shape))});

  auto attention = [this](const std::string& prefix) {
    layers::AttentionWeights w;
    for (std::size_t i = 0; i < config_.heads; ++i) {
      w.w_q.push_back(parameter(indexed(prefix + ".q", i)));
      w.w_k.push_back(parameter(indexed(prefix + ".k", i)));
      w.w_v.push_back(parameter(indexed(prefix + ".v", i)));
    }
    w.w_o = parameter(prefix + ".o");
    return w;
  };
  if (config_.uses_encoder()) {
    for (std::size_t b = 0; b < ModelConfig::kEncoderBlocks; ++b) {
      const std::string p = indexed("enc", b);
      encoder_.push_back({attention(p), parameter(p + ".d1"), parameter(p + ".d2")});
    }
    if (config_.kind == ModelKind::transformer)
      for (std::size_t b = 0; b < config_.decoder_blocks; ++b) {
        const std::string p = indexed("dec", b);
        decoder_.push_back({attention(p + ".self"), attention(p + ".cross"), parameter(p + ".d1"),
                            parameter(p + ".d2")});
      }
  }
}

PredictorModel PredictorModel::clone() const {
  PredictorModel copy(config_, propagation_);
  for (std::size_t i = 0; i < params_.size(); ++i) copy.params_[i].var.mutable_value() = params_[i].var.value();
  return copy;
}

void PredictorModel::initialize(std::uint64_t seed) {
  for (std::size_t i = 0; i < params_.size(); ++i)
    params_[i].var.mutable_value() = init_glorot(params_[i].var.shape(), seed, i);
}

const ad::Var& PredictorModel::parameter(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.var;
  throw ContractError("model has no weight named '" + name + "'");
}

std::size_t PredictorModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().size();
  return n;
}

void PredictorModel::audit() const {
  const auto layout = weight_layout(config_);
  if (layout.size() != params_.size()) throw DimensionError("weight count does not match the configuration");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].first != params_[i].name)
      throw DimensionError("weight " + std::to_string(i) + " is '" + params_[i].name + "', expected '" +
                           layout[i].first + "'");
    if (layout[i].second != params_[i].var.shape())
      throw DimensionError("weight '" + params_[i].name + "' has shape " + to_string(params_[i].var.shape()) +
                           ", expected " + to_string(layout[i].second));
  }
}

// -- forward ----------------------------------------------------------------------------

ad::Var PredictorModel::forward(const Array& batch) const {
  const ModelConfig& c = config_;
  if (batch.rank() != 4 || batch.dim(1) != c.window || batch.dim(2) != c.subcarriers || batch.dim(3) != c.aps)
    throw DimensionError("model expects [B x " + std::to_string(c.window) + " x " + std::to_string(c.subcarriers) +
                         " x " + std::to_string(c.aps) + "] input, got " + to_string(batch.shape()));
  const Var x = ad::constant(batch);
  Var flat_out;
  if (c.uses_encoder())
    flat_out = forward_attention(x);
  else if (c.kind == ModelKind::dnn)
    flat_out = forward_dnn(x);
  else
    flat_out = forward_recurrent(x, c.kind == ModelKind::lstm);
  return ad::reshape(flat_out, {batch.dim(0), c.horizon, c.subcarriers, c.aps});
}

ad::Var PredictorModel::forward_attention(const Var& x) const {
  const ModelConfig& c = config_;
  const std::size_t batch = x.shape()[0];
  std::vector<Var> branches;
  if (c.uses_space_conv()) branches.push_back(layers::space_conv(x, propagation_, parameter("space.w_s")));
  if (c.uses_freq_conv())
    branches.push_back(
        layers::freq_conv_pwc(layers::freq_conv_dwc(x, parameter("freq.dwc")), parameter("freq.pwc")));
  if (branches.empty()) branches.push_back(x);
  // Splice along the AP axis, then vectorize every snapshot row-major.
  const Var spliced = branches.size() == 1 ? branches[0] : ad::concat(branches, 3);
  const std::size_t width = spliced.shape()[2] * spliced.shape()[3];
  const Var rows = ad::reshape(spliced, {batch * c.window, width});
  Var h = ad::reshape(ad::matmul(rows, parameter("embed")), {batch, c.window, c.d_model});
  if (c.alpha != 0.0) {
    const Array pe = layers::positional_encoding(c.window, c.d_model);
    Array tiled({batch, c.window, c.d_model});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < pe.size(); ++i) tiled[b * pe.size() + i] = c.alpha * pe[i];
    h = ad::add(h, ad::constant(std::move(tiled)));
  }
  Var y = layers::encoder_forward(h, encoder_, c.eps, c.norm_axis);
  if (!decoder_.empty()) {
    const Var memory = y;
    y = h;
    for (const auto& block : decoder_) y = layers::decoder_block(y, memory, block, c.eps, c.norm_axis);
  }
  return ad::matmul(ad::reshape(y, {batch, c.window * c.d_model}), parameter("head"));
}

ad::Var PredictorModel::forward_dnn(const Var& x) const {
  const ModelConfig& c = config_;
  const std::size_t batch = x.shape()[0];
  const Var in = ad::reshape(x, {batch, c.window * c.subcarriers * c.aps});
  Var h = ad::matmul(in, parameter("dnn.w1"));
  if (!c.linear_probe) h = ad::relu(h);
  return ad::matmul(h, parameter("dnn.w2"));
}

ad::Var PredictorModel::forward_recurrent(const Var& x, bool lstm) const {
  const ModelConfig& c = config_;
  const std::size_t batch = x.shape()[0];
  const std::size_t lm = c.subcarriers * c.aps;
  const std::size_t hid = c.hidden;
  const std::string p = lstm ? "lstm" : "rnn";
  std::vector<Var> hs(ModelConfig::kRecurrentLayers), cs(ModelConfig::kRecurrentLayers);
  for (std::size_t t = 0; t < c.window; ++t) {
    Var input = ad::reshape(ad::slice(x, 1, t, 1), {batch, lm});
    for (std::size_t l = 0; l < ModelConfig::kRecurrentLayers; ++l) {
      Var pre = ad::matmul(input, parameter(indexed(p, l, ".wx")));
      if (hs[l]) pre = ad::add(pre, ad::matmul(hs[l], parameter(indexed(p, l, ".wh"))));
      if (!lstm) {
        hs[l] = ad::tanh(pre);
      } else {
        const Var in_gate = ad::sigmoid(ad::slice(pre, 1, 0, hid));
        const Var forget = ad::sigmoid(ad::slice(pre, 1, hid, hid));
        const Var cand = ad::tanh(ad::slice(pre, 1, 2 * hid, hid));
        const Var out_gate = ad::sigmoid(ad::slice(pre, 1, 3 * hid, hid));
        const Var fresh = ad::mul(in_gate, cand);
        cs[l] = cs[l] ? ad::add(ad::mul(forget, cs[l]), fresh) : fresh;
        hs[l] = ad::mul(out_gate, ad::tanh(cs[l]));
      }
      input = hs[l];
    }
  }
  return ad::matmul(hs.back(), parameter("head"));
}

Array PredictorModel::predict(const Array& window) const {
  const ModelConfig& c = config_;
  if (window.shape() != Shape{c.window, c.subcarriers, c.aps})
    throw DimensionError("predict expects a [" + std::to_string(c.window) + " x " + std::to_string(c.subcarriers) +
                         " x " + std::to_string(c.aps) + "] window, got " + to_string(window.shape()));
  const Var out = forward(window.reshaped({1, c.window, c.subcarriers, c.aps}));
  return out.value().reshaped({c.horizon, c.subcarriers, c.aps});
}

std::size_t proposed_parameter_count(const ModelConfig& c) {
  const std::size_t m = c.aps, l = c.subcarriers, t = c.window, d = c.d_model, h = c.heads;
  const std::size_t attention = h * (2 * d * c.d_k + d * c.d_v) + h * c.d_v * d;
  return m * m + t * (c.kernel * m + t) + 2 * m * l * d + 2 * (attention + 2 * d * d) + t * d * c.horizon * l * m;
}

std::vector<cdouble> predict_complex(const PredictorModel& model_re, const PredictorModel& model_im,
                                     const std::vector<cdouble>& window,
                                     const std::optional<Standardization>& standardization) {
  if (!standardization) throw DataError("standardization metadata missing");
  const ModelConfig& c = model_re.config();
  if (!(model_im.config().window == c.window && model_im.config().horizon == c.horizon &&
        model_im.config().subcarriers == c.subcarriers && model_im.config().aps == c.aps))
    throw DimensionError("real and imaginary models have different shapes");
  const std::size_t n = c.window * c.subcarriers * c.aps;
  if (window.size() != n) throw DimensionError("window has " + std::to_string(window.size()) + " values, expected " +
                                                std::to_string(n));
  const Standardization& s = *standardization;
  Array re({c.window, c.subcarriers, c.aps}), im({c.window, c.subcarriers, c.aps});
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = (window[i].real() - s.mean_re) / s.std_re;
    im[i] = (window[i].imag() - s.mean_im) / s.std_im;
  }
  const Array pr = model_re.predict(re);
  const Array pi = model_im.predict(im);
  std::vector<cdouble> out(pr.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cdouble(pr[i] * s.std_re + s.mean_re, pi[i] * s.std_im + s.mean_im);
  return out;
}

// -- checkpoint --------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "CFWT";
constexpr std::uint32_t kVersion = 1;
const std::string kPropagationName = "const.propagation";
const std::string kStandardizationName = "const.standardization";

void put_array(io::Writer& w, const std::string& name, const Array& a) {
  if (name.size() > 0xFFFF) throw ContractError("weight name too long");
  w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.put_bytes(name);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(a.rank()));
  for (auto d : a.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  for (double v : a.values()) w.put<double>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const PredictorModel& model,
                                            const std::optional<Standardization>& standardization) {
  const ModelConfig& c = model.config();
  io::Writer w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kVersion);
  for (std::size_t v : {static_cast<std::size_t>(c.kind), c.window, c.horizon, c.subcarriers, c.aps, c.d_model,
                        c.heads, c.d_k, c.d_v, c.kernel, c.hidden, c.decoder_blocks,
                        static_cast<std::size_t>(c.norm_axis), static_cast<std::size_t>(c.linear_probe)})
    w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
  w.put<double>(c.alpha);
  w.put<double>(c.eps);
  for (const auto& p : model.parameters()) put_array(w, p.name, p.var.value());
  put_array(w, kPropagationName, model.propagation());
  if (standardization) {
    const auto& s = *standardization;
    put_array(w, kStandardizationName, Array({4}, {s.mean_re, s.std_re, s.mean_im, s.std_im}));
  }
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  io::Reader r(bytes);
  if (r.get_bytes(4) != std::string_view(kMagic, 4)) throw DataError("not a CFWT checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  const auto kind = r.get<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(ModelKind::transformer)) throw DataError("unknown model kind in checkpoint");
  c.kind = static_cast<ModelKind>(kind);
  for (std::size_t* f : {&c.window, &c.horizon, &c.subcarriers, &c.aps, &c.d_model, &c.heads, &c.d_k, &c.d_v,
                         &c.kernel, &c.hidden, &c.decoder_blocks})
    *f = r.get<std::uint32_t>();
  const auto axis = r.get<std::uint32_t>();
  if (axis > 1) throw DataError("bad normalization axis in checkpoint");
  c.norm_axis = static_cast<layers::NormAxis>(axis);
  c.linear_probe = r.get<std::uint32_t>() != 0;
  c.alpha = r.get<double>();
  c.eps = r.get<double>();
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }

  std::map<std::string, Array> arrays;
  while (!r.at_end()) {
    const auto len = r.get<std::uint16_t>();
    std::string name = r.get_bytes(len);
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    const std::size_t n = element_count(shape);
    if (rank == 0 || r.remaining() < n * 8) throw DataError("checkpoint array '" + name + "' truncated");
    std::vector<double> values(n);
    for (auto& v : values) v = r.get<double>();
    arrays.emplace(std::move(name), Array(std::move(shape), std::move(values)));
  }

  std::optional<Array> propagation;
  if (auto it = arrays.find(kPropagationName); it != arrays.end()) propagation = it->second;
  Checkpoint ck{PredictorModel(c, propagation), std::nullopt};
  for (const auto& p : ck.model.parameters()) {
    auto it = arrays.find(p.name);
    if (it == arrays.end()) throw DataError("checkpoint is missing weight '" + p.name + "'");
    if (it->second.shape() != p.var.shape())
      throw DataError("checkpoint weight '" + p.name + "' has shape " + to_string(it->second.shape()));
    ad::Var v = p.var;
    v.mutable_value() = it->second;
  }
  if (auto it = arrays.find(kStandardizationName); it != arrays.end()) {
    const Array& s = it->second;
    if (s.size() != 4) throw DataError("standardization record must hold 4 values");
    ck.standardization = Standardization{s[0], s[1], s[2], s[3]};
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const PredictorModel& model,
                     const std::optional<Standardization>& standardization) {
  io::write_file_atomic(path, encode_checkpoint(model, standardization));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace cfcp
