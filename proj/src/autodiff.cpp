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

#include "cfchanpred/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_set>

#include "cfchanpred/error.hpp"

namespace cfcp::ad {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

struct Node {
  Array value;
  mutable Array grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> push;  // empty on leaves

  Array& ensure_grad() const {
    if (grad.empty()) grad = Array(value.shape());
    return grad;
  }
};

struct Builder {
  static Var wrap(std::shared_ptr<Node> n) { return Var(std::move(n)); }
  static const std::shared_ptr<Node>& node(const Var& v) {
    if (!v.node_) throw ContractError("operation on an empty Var");
    return v.node_;
  }
};

namespace {

using NodePtr = std::shared_ptr<Node>;

Var make(Array value, std::vector<NodePtr> parents, std::function<void(Node&)> push) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->push = std::move(push);
  }
  return Builder::wrap(std::move(n));
}

const NodePtr& N(const Var& v) { return Builder::node(v); }

ConstMatMap cmat(const Array& a, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
  return ConstMatMap(a.data() + offset, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MatMap mmat(Array& a, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
  return MatMap(a.data() + offset, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_rank(const Array& a, std::size_t rank, const char* op) {
  if (a.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(a.shape()));
}

// Binary elementwise with single-element broadcasting.
enum class Bcast { none, left_scalar, right_scalar };

Bcast broadcast_kind(const Array& a, const Array& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::none;
  if (b.size() == 1) return Bcast::right_scalar;
  if (a.size() == 1) return Bcast::left_scalar;
  throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                       to_string(b.shape()));
}

template <class Fwd, class DA, class DB>
Var binary(const Var& a, const Var& b, const char* op, Fwd fwd, DA da, DB db) {
  const Array& va = N(a)->value;
  const Array& vb = N(b)->value;
  const Bcast bc = broadcast_kind(va, vb, op);
  const Shape& out_shape = bc == Bcast::left_scalar ? vb.shape() : va.shape();
  Array out(out_shape);
  const std::size_t n = out.size();
  auto ia = [bc](std::size_t i) { return bc == Bcast::left_scalar ? 0 : i; };
  auto ib = [bc](std::size_t i) { return bc == Bcast::right_scalar ? 0 : i; };
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(va[ia(i)], vb[ib(i)]);
  return make(std::move(out), {N(a), N(b)}, [bc, n, ia, ib, da, db](Node& self) {
    const Array& g = self.grad;
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      Array& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ga[ia(i)] += g[i] * da(pa.value[ia(i)], pb.value[ib(i)]);
    }
    if (pb.requires_grad) {
      Array& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) gb[ib(i)] += g[i] * db(pa.value[ia(i)], pb.value[ib(i)]);
    }
  });
}

// Unary elementwise; `deriv(x, y)` receives input and output values.
template <class Fwd, class Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv) {
  const Array& va = N(a)->value;
  Array out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = fwd(va[i]);
  return make(std::move(out), {N(a)}, [deriv](Node& self) {
    Node& p = *self.parents[0];
    Array& gp = p.ensure_grad();
    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
  });
}

struct AxisSplit {
  std::size_t outer, n, inner;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit r{1, s[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

}  // namespace

// -- Var ------------------------------------------------------------------------

const Array& Var::value() const { return Builder::node(*this)->value; }
Array& Var::mutable_value() { return Builder::node(*this)->value; }
const Array& Var::grad() const { return Builder::node(*this)->ensure_grad(); }
bool Var::requires_grad() const { return Builder::node(*this)->requires_grad; }
void Var::zero_grad() {
  auto& g = Builder::node(*this)->ensure_grad();
  std::fill(g.values().begin(), g.values().end(), 0.0);
}

Var parameter(Array value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Builder::wrap(std::move(n));
}

Var constant(Array value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Builder::wrap(std::move(n));
}

void backward(const Var& loss) {
  const NodePtr& root = N(loss);
  if (root->value.size() != 1)
    throw ContractError("backward needs a single-element loss, got shape " + to_string(root->value.shape()));
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order of the subgraph that
  // carries gradient.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order)
    if (n->push) {
      Array& g = n->ensure_grad();
      std::fill(g.values().begin(), g.values().end(), 0.0);
    }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->push) (*it)->push(**it);
}

// -- linear algebra -------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  const Array& va = N(a)->value;
  const Array& vb = N(b)->value;
  require_rank(va, 2, "matmul");
  require_rank(vb, 2, "matmul");
  const std::size_t m = va.dim(0), k = va.dim(1), n = vb.dim(1);
  if (vb.dim(0) != k)
    throw DimensionError("matmul: inner dimensions disagree, " + to_string(va.shape()) + " * " +
                         to_string(vb.shape()));
  Array out({m, n});
  mmat(out, m, n).noalias() = cmat(va, m, k) * cmat(vb, k, n);
  return make(std::move(out), {N(a), N(b)}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    auto g = cmat(self.grad, m, n);
    if (pa.requires_grad) mmat(pa.ensure_grad(), m, k).noalias() += g * cmat(pb.value, k, n).transpose();
    if (pb.requires_grad) mmat(pb.ensure_grad(), k, n).noalias() += cmat(pa.value, m, k).transpose() * g;
  });
}

Var bmm(const Var& a, const Var& b) {
  const Array& va = N(a)->value;
  const Array& vb = N(b)->value;
  if (va.rank() == 2 && vb.rank() == 2) return matmul(a, b);
  if ((va.rank() != 2 && va.rank() != 3) || (vb.rank() != 2 && vb.rank() != 3))
    throw DimensionError("bmm: operands must be rank 2 or 3, got " + to_string(va.shape()) + " and " +
                         to_string(vb.shape()));
  const bool a_shared = va.rank() == 2;
  const bool b_shared = vb.rank() == 2;
  const std::size_t batch = a_shared ? vb.dim(0) : va.dim(0);
  const std::size_t m = va.dim(va.rank() - 2), k = va.dim(va.rank() - 1);
  const std::size_t kb = vb.dim(vb.rank() - 2), n = vb.dim(vb.rank() - 1);
  if (k != kb || (!a_shared && !b_shared && va.dim(0) != vb.dim(0)))
    throw DimensionError("bmm: incompatible shapes " + to_string(va.shape()) + " and " + to_string(vb.shape()));
  Array out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i)
    mmat(out, m, n, i * m * n).noalias() =
        cmat(va, m, k, a_shared ? 0 : i * m * k) * cmat(vb, k, n, b_shared ? 0 : i * k * n);
  return make(std::move(out), {N(a), N(b)}, [=](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < batch; ++i) {
      auto g = cmat(self.grad, m, n, i * m * n);
      const std::size_t oa = a_shared ? 0 : i * m * k;
      const std::size_t ob = b_shared ? 0 : i * k * n;
      if (pa.requires_grad) mmat(pa.ensure_grad(), m, k, oa).noalias() += g * cmat(pb.value, k, n, ob).transpose();
      if (pb.requires_grad) mmat(pb.ensure_grad(), k, n, ob).noalias() += cmat(pa.value, m, k, oa).transpose() * g;
    }
  });
}

Var transpose(const Var& a) {
  const Array& va = N(a)->value;
  if (va.rank() != 2 && va.rank() != 3)
    throw DimensionError("transpose: expected rank 2 or 3, got " + to_string(va.shape()));
  const std::size_t batch = va.rank() == 3 ? va.dim(0) : 1;
  const std::size_t r = va.dim(va.rank() - 2), c = va.dim(va.rank() - 1);
  Shape s = va.shape();
  std::swap(s[s.size() - 1], s[s.size() - 2]);
  Array out(s);
  for (std::size_t i = 0; i < batch; ++i) mmat(out, c, r, i * r * c) = cmat(va, r, c, i * r * c).transpose();
  return make(std::move(out), {N(a)}, [batch, r, c](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < batch; ++i) mmat(g, r, c, i * r * c) += cmat(self.grad, c, r, i * r * c).transpose();
  });
}

// -- elementwise ----------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var scale(const Var& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(const Var& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var sqrt_eps(const Var& a, double eps) {
  for (double x : N(a)->value.values())
    if (x + eps < 0.0) throw NumericError("sqrt_eps: negative argument after epsilon offset");
  return unary(
      a, [eps](double x) { return std::sqrt(x + eps); }, [](double, double y) { return 0.5 / y; });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

Var elementwise(Elementwise kind, const Var& a, const Var& b, double eps) {
  switch (kind) {
    case Elementwise::add: return add(a, b);
    case Elementwise::sub: return sub(a, b);
    case Elementwise::mul: return mul(a, b);
    case Elementwise::relu: return relu(a);
    case Elementwise::exp: return exp(a);
    case Elementwise::sqrt_eps: return sqrt_eps(a, eps);
  }
  throw ContractError("unknown elementwise kind");
}

// -- reductions -------------------------------------------------------------------

Var sum(const Var& a) {
  double s = 0.0;
  for (double x : N(a)->value.values()) s += x;
  return make(Array::scalar(s), {N(a)}, [](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    const double gs = self.grad[0];
    for (double& x : g.values()) x += gs;
  });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(N(a)->value.size())); }

Var softmax_rows(const Var& a) {
  const Array& va = N(a)->value;
  const std::size_t cols = va.dim(va.rank() - 1);
  const std::size_t rows = va.size() / cols;
  Array out(va.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = va.data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += (y[c] = std::exp(x[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
  }
  return make(std::move(out), {N(a)}, [rows, cols](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += y[c] * (gy[c] - dot);
    }
  });
}

Var normalize_along(const Var& a, std::size_t axis, double eps) {
  const Array& va = N(a)->value;
  if (axis >= va.rank()) throw DimensionError("normalize_along: axis out of range for " + to_string(va.shape()));
  const AxisSplit s = split_axis(va.shape(), axis);
  const double inv_n = 1.0 / static_cast<double>(s.n);
  Array out(va.shape());
  std::vector<double> inv_std(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t r = 0; r < s.inner; ++r) {
      const std::size_t base = o * s.n * s.inner + r;
      double mu = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) mu += va[base + i * s.inner];
      mu *= inv_n;
      double var = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double d = va[base + i * s.inner] - mu;
        var += d * d;
      }
      var *= inv_n;
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std[o * s.inner + r] = is;
      for (std::size_t i = 0; i < s.n; ++i) out[base + i * s.inner] = (va[base + i * s.inner] - mu) * is;
    }
  return make(std::move(out), {N(a)}, [s, inv_n, inv_std = std::move(inv_std)](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t r = 0; r < s.inner; ++r) {
        const std::size_t base = o * s.n * s.inner + r;
        double mg = 0.0, mgy = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
          const std::size_t at = base + i * s.inner;
          mg += self.grad[at];
          mgy += self.grad[at] * self.value[at];
        }
        mg *= inv_n;
        mgy *= inv_n;
        const double is = inv_std[o * s.inner + r];
        for (std::size_t i = 0; i < s.n; ++i) {
          const std::size_t at = base + i * s.inner;
          g[at] += is * (self.grad[at] - mg - self.value[at] * mgy);
        }
      }
  });
}

// -- structure ------------------------------------------------------------------

Var reshape(const Var& a, Shape shape) {
  Array out = N(a)->value.reshaped(std::move(shape));
  return make(std::move(out), {N(a)}, [](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Array& va = N(a)->value;
  if (axis >= va.rank() || length == 0 || start + length > va.dim(axis))
    throw DimensionError("slice [" + std::to_string(start) + ", +" + std::to_string(length) + ") on axis " +
                         std::to_string(axis) + " of " + to_string(va.shape()));
  const AxisSplit s = split_axis(va.shape(), axis);
  Shape os = va.shape();
  os[axis] = length;
  Array out(os);
  const std::size_t chunk = length * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(va.data() + (o * s.n + start) * s.inner, chunk, out.data() + o * chunk);
  return make(std::move(out), {N(a)}, [s, start, chunk](Node& self) {
    Array& g = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = g.data() + (o * s.n + start) * s.inner;
      const double* src = self.grad.data() + o * chunk;
      for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
    }
  });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero arrays");
  const Shape& first = N(parts[0])->value.shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + to_string(first));
  Shape os = first;
  os[axis] = 0;
  std::vector<std::size_t> widths;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    const Shape& ps = N(p)->value.shape();
    bool ok = ps.size() == first.size();
    for (std::size_t i = 0; ok && i < ps.size(); ++i) ok = i == axis || ps[i] == first[i];
    if (!ok) throw DimensionError("concat: " + to_string(ps) + " does not match " + to_string(first));
    os[axis] += ps[axis];
    widths.push_back(ps[axis]);
    parents.push_back(N(p));
  }
  const AxisSplit s = split_axis(os, axis);
  Array out(os);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Array& v = parents[k]->value;
    const std::size_t chunk = widths[k] * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o)
      std::copy_n(v.data() + o * chunk, chunk, out.data() + (o * s.n + offset) * s.inner);
    offset += widths[k];
  }
  return make(std::move(out), std::move(parents), [s, widths](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      Node& p = *self.parents[k];
      const std::size_t chunk = widths[k] * s.inner;
      if (p.requires_grad) {
        Array& g = p.ensure_grad();
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* src = self.grad.data() + (o * s.n + offset) * s.inner;
          double* dst = g.data() + o * chunk;
          for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
        }
      }
      offset += widths[k];
    }
  });
}

Var depthwise_conv(const Var& x, const Var& w) {
  const Array& vx = N(x)->value;
  const Array& vw = N(w)->value;
  require_rank(vx, 4, "depthwise_conv input");
  require_rank(vw, 3, "depthwise_conv kernel");
  const std::size_t B = vx.dim(0), C = vx.dim(1), L = vx.dim(2), J = vx.dim(3);
  const std::size_t D = vw.dim(1);
  if (vw.dim(0) != C || vw.dim(2) != J)
    throw DimensionError("depthwise_conv: kernel " + to_string(vw.shape()) + " does not fit input " +
                         to_string(vx.shape()));
  if (D % 2 == 0) throw ContractError("depthwise_conv: kernel size must be odd");
  if (D > L) throw DimensionError("depthwise_conv: kernel size exceeds signal length");
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(D - 1) / 2;
  Array out(vx.shape());
  auto loop = [=](auto&& body) {
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < L; ++i)
          for (std::size_t k = 0; k < D; ++k) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + k) - pad;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
            const std::size_t xo = ((b * C + c) * L + static_cast<std::size_t>(src)) * J;
            const std::size_t oo = ((b * C + c) * L + i) * J;
            const std::size_t wo = (c * D + k) * J;
            body(xo, oo, wo);
          }
  };
  loop([&](std::size_t xo, std::size_t oo, std::size_t wo) {
    for (std::size_t j = 0; j < J; ++j) out[oo + j] += vw[wo + j] * vx[xo + j];
  });
  return make(std::move(out), {N(x), N(w)}, [loop, J](Node& self) {
    Node& px = *self.parents[0];
    Node& pw = *self.parents[1];
    Array* gx = px.requires_grad ? &px.ensure_grad() : nullptr;
    Array* gw = pw.requires_grad ? &pw.ensure_grad() : nullptr;
    loop([&](std::size_t xo, std::size_t oo, std::size_t wo) {
      for (std::size_t j = 0; j < J; ++j) {
        const double g = self.grad[oo + j];
        if (gx) (*gx)[xo + j] += g * pw.value[wo + j];
        if (gw) (*gw)[wo + j] += g * px.value[xo + j];
      }
    });
  });
}

}  // namespace cfcp::ad
