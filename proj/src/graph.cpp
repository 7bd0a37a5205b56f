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

#include "cfchanpred/graph.hpp"

#include <cmath>

#include "cfchanpred/error.hpp"

namespace cfcp {

std::string to_string(AdjacencyKind kind) {
  switch (kind) {
    case AdjacencyKind::distance: return "distance";
    case AdjacencyKind::pcc: return "pcc";
    case AdjacencyKind::constant: return "constant";
    case AdjacencyKind::identity: return "identity";
  }
  return "?";
}

AdjacencyKind parse_adjacency_kind(const std::string& name) {
  if (name == "distance") return AdjacencyKind::distance;
  if (name == "pcc") return AdjacencyKind::pcc;
  if (name == "constant") return AdjacencyKind::constant;
  if (name == "identity" || name == "none") return AdjacencyKind::identity;
  throw UsageError("unknown adjacency kind '" + name + "'");
}

void AdjacencyMatrix::validate() const {
  if (a.rank() != 2 || a.dim(0) != a.dim(1))
    throw ContractError("adjacency must be square, got " + to_string(a.shape()));
  const std::size_t m = a.dim(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (a.at(i, i) != 0.0) throw ContractError("adjacency diagonal must be zero");
    for (std::size_t j = 0; j < m; ++j) {
      const double v = a.at(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw ContractError("adjacency entries must lie in [0, 1]");
      if (v != a.at(j, i)) throw ContractError("adjacency must be symmetric");
    }
  }
}

AdjacencyMatrix AdjacencyMatrix::empty(std::size_t m) {
  return {Array({m, m}), AdjacencyKind::identity, 0.0};
}

Array normalized_propagation(const AdjacencyMatrix& adj) {
  adj.validate();
  const std::size_t m = adj.size();
  std::vector<double> inv_sqrt_deg(m);
  for (std::size_t i = 0; i < m; ++i) {
    double d = 1.0;  // self loop
    for (std::size_t j = 0; j < m; ++j) d += adj.a.at(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
  }
  Array out({m, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double aij = adj.a.at(i, j) + (i == j ? 1.0 : 0.0);
      out.at(i, j) = aij * (inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  return out;
}

Array normalized_laplacian(const AdjacencyMatrix& adj) {
  adj.validate();
  const std::size_t m = adj.size();
  std::vector<double> inv_sqrt_deg(m);
  for (std::size_t i = 0; i < m; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) d += adj.a.at(i, j);
    inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Array out({m, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.at(i, j) = (i == j ? 1.0 : 0.0) - adj.a.at(i, j) * (inv_sqrt_deg[i] * inv_sqrt_deg[j]);
  return out;
}

}  // namespace cfcp
