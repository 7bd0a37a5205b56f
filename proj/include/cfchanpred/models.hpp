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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfchanpred/autodiff.hpp"
#include "cfchanpred/dataset.hpp"
#include "cfchanpred/layers.hpp"

namespace cfcp {

enum class ModelKind : std::uint32_t { proposed, variant_a, variant_b, variant_c, dnn, rnn, lstm, transformer };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
std::vector<ModelKind> all_model_kinds();

struct ModelConfig {
  ModelKind kind = ModelKind::proposed;
  std::size_t window = 10;        // T
  std::size_t horizon = 5;        // K
  std::size_t subcarriers = 16;   // L
  std::size_t aps = 16;           // M
  std::size_t d_model = 128;
  std::size_t heads = 2;
  std::size_t d_k = 64;
  std::size_t d_v = 64;
  std::size_t kernel = 3;         // D_k
  std::size_t hidden = 128;       // baseline width
  std::size_t decoder_blocks = 2; // transformer baseline only
  layers::NormAxis norm_axis = layers::NormAxis::time;
  bool linear_probe = false;      // DNN: identity instead of relu
  double alpha = 1.0;             // positional-encoding scale
  double eps = 1e-6;              // Add & Norm constant

  static constexpr std::size_t kEncoderBlocks = 2;
  static constexpr std::size_t kRecurrentLayers = 2;

  bool uses_space_conv() const { return kind == ModelKind::proposed || kind == ModelKind::variant_b; }
  bool uses_freq_conv() const { return kind == ModelKind::proposed || kind == ModelKind::variant_c; }
  bool uses_encoder() const;

  /// Throws ContractError on any invalid field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct NamedParameter {
  std::string name;
  ad::Var var;
};

/// Predictor of K future CSI snapshots from a window of T past snapshots of
/// one real-valued part (real or imaginary) of standardized CSI.
///
/// Weights are held by `ad::Var` handles, so the model is move-only; use
/// `clone` for an independent copy.
class PredictorModel {
 public:
  /// Builds a model with all weights zero. `propagation` is the fixed
  /// [M x M] SpaceConv matrix; it is ignored by kinds without SpaceConv and
  /// defaults to the identity.
  explicit PredictorModel(ModelConfig config, std::optional<Array> propagation = std::nullopt);

  PredictorModel(PredictorModel&&) noexcept = default;
  PredictorModel& operator=(PredictorModel&&) noexcept = default;
  PredictorModel(const PredictorModel&) = delete;
  PredictorModel& operator=(const PredictorModel&) = delete;

  PredictorModel clone() const;

  /// Glorot-uniform initialization of every weight, deterministic in `seed`.
  void initialize(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Array& propagation() const { return propagation_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  const ad::Var& parameter(const std::string& name) const;
  std::size_t parameter_count() const;

  /// Expected shape of every weight for this configuration, in creation order.
  static std::vector<std::pair<std::string, Shape>> weight_layout(const ModelConfig& config);
  /// Throws DimensionError if any weight deviates from `weight_layout`.
  void audit() const;

  /// Batched forward pass: [B x T x L x M] -> [B x K x L x M].
  ad::Var forward(const Array& batch) const;
  /// Single window: [T x L x M] -> [K x L x M].
  Array predict(const Array& window) const;

 private:
  ad::Var forward_attention(const ad::Var& x) const;
  ad::Var forward_dnn(const ad::Var& x) const;
  ad::Var forward_recurrent(const ad::Var& x, bool lstm) const;

  ModelConfig config_;
  Array propagation_;
  std::vector<NamedParameter> params_;
  std::vector<layers::EncoderBlockWeights> encoder_;
  std::vector<layers::DecoderBlockWeights> decoder_;
};

/// Closed-form trainable parameter count of the proposed model.
std::size_t proposed_parameter_count(const ModelConfig& config);

/// Recombines real- and imaginary-part predictions into complex CSI in the
/// original units. `window` is [T x L x M] complex CSI in original units.
/// Throws DataError when `standardization` is empty.
std::vector<cdouble> predict_complex(const PredictorModel& model_re, const PredictorModel& model_im,
                                     const std::vector<cdouble>& window,
                                     const std::optional<Standardization>& standardization);

// -- CFWT checkpoint -------------------------------------------------------------------
//
// "CFWT", u32 version, config block (u32 fields then f64 alpha and eps), then
// named arrays until end of file: u16 name length, name bytes, u8 rank,
// u32 dims, f64 data. Besides the weights the file carries the propagation
// matrix ("const.propagation") and, when present, the standardization
// statistics ("const.standardization", 4 values).

struct Checkpoint {
  PredictorModel model;
  std::optional<Standardization> standardization;
};

std::vector<std::uint8_t> encode_checkpoint(const PredictorModel& model,
                                            const std::optional<Standardization>& standardization);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const PredictorModel& model,
                     const std::optional<Standardization>& standardization);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cfcp
