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

#include <string>

#include "cfchanpred/array.hpp"

namespace cfcp {

enum class AdjacencyKind { distance, pcc, constant, identity };

std::string to_string(AdjacencyKind kind);
AdjacencyKind parse_adjacency_kind(const std::string& name);

/// Weighted AP graph without self loops: symmetric, entries in [0, 1], zero
/// diagonal.
struct AdjacencyMatrix {
  Array a;
  AdjacencyKind kind = AdjacencyKind::identity;
  double sigma = 0.0;  // decay length for the distance kind, metres

  std::size_t size() const { return a.dim(0); }
  /// Throws ContractError when an invariant is broken.
  void validate() const;

  /// Graph with no edges.
  static AdjacencyMatrix empty(std::size_t m);
};

/// D~^(-1/2) (A + I) D~^(-1/2) with D~ the row sums of A + I.
Array normalized_propagation(const AdjacencyMatrix& adj);

/// I - D^(-1/2) A D^(-1/2) on the raw adjacency. Isolated nodes use
/// D^(-1/2) = 0. Only used to cross-check the propagation matrix.
Array normalized_laplacian(const AdjacencyMatrix& adj);

}  // namespace cfcp
