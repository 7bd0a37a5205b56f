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

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cfchanpred/error.hpp"
#include "cfchanpred/graph.hpp"
#include "cfchanpred/layers.hpp"
#include "doctest.h"
#include "gradcheck.hpp"
#include "gradient_suite.hpp"

using namespace cfcp;
using cfcp::testing::gradient_error;
using cfcp::testing::probe;
using cfcp::testing::random_array;
using cfcp::testing::random_attention;
using cfcp::testing::random_block;

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat to_mat(const Array& a) {
  Mat m(a.dim(0), a.dim(1));
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < a.dim(1); ++j) m(i, j) = a.at(i, j);
  return m;
}

Mat ref_softmax(Mat s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    s.row(r).array() -= s.row(r).maxCoeff();
    s.row(r) = s.row(r).array().exp();
    s.row(r) /= s.row(r).sum();
  }
  return s;
}

Mat ref_norm_columns(const Mat& x, double eps) {
  Mat y = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mu = x.col(c).mean();
    const double var = (x.col(c).array() - mu).square().mean();
    y.col(c) = (x.col(c).array() - mu) / std::sqrt(var + eps);
  }
  return y;
}

Mat ref_block(const Mat& x, const layers::EncoderBlockWeights& w, double eps) {
  const std::size_t h = w.attention.w_q.size();
  Mat cat(x.rows(), 0);
  for (std::size_t i = 0; i < h; ++i) {
    const Mat q = x * to_mat(w.attention.w_q[i].value());
    const Mat k = x * to_mat(w.attention.w_k[i].value());
    const Mat v = x * to_mat(w.attention.w_v[i].value());
    const Mat a = ref_softmax(q * k.transpose() / std::sqrt(static_cast<double>(q.cols())));
    Mat next(x.rows(), cat.cols() + v.cols());
    next << cat, a * v;
    cat = next;
  }
  const Mat o = cat * to_mat(w.attention.w_o.value());
  const Mat z = ref_norm_columns(x + o, eps);
  const Mat f = (z * to_mat(w.w_d1.value())).cwiseMax(0.0) * to_mat(w.w_d2.value());
  return ref_norm_columns(z + f, eps);
}

}  // namespace

TEST_CASE("normalized propagation and Laplacian") {
  SUBCASE("no edges gives identity") {
    CHECK(normalized_propagation(AdjacencyMatrix::empty(3)) == Array::identity(3));
    CHECK(normalized_laplacian(AdjacencyMatrix::empty(3)) == Array::identity(3));
  }
  SUBCASE("two connected nodes") {
    AdjacencyMatrix adj{Array({2, 2}, {0.0, 1.0, 1.0, 0.0}), AdjacencyKind::constant, 0.0};
    const Array p = normalized_propagation(adj);
    for (double v : p.values()) CHECK(v == doctest::Approx(0.5));
    const Array l = normalized_laplacian(adj);
    CHECK(l == Array({2, 2}, {1.0, -1.0, -1.0, 1.0}));
  }
  SUBCASE("spectra on random graphs") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      const std::size_t m = 6;
      AdjacencyMatrix adj{Array({m, m}), AdjacencyKind::pcc, 0.0};
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) adj.a.at(i, j) = adj.a.at(j, i) = u(rng) < 0.3 ? 0.0 : u(rng);
      Eigen::SelfAdjointEigenSolver<Mat> lap(to_mat(normalized_laplacian(adj)));
      CHECK(lap.eigenvalues().minCoeff() > -1e-9);
      CHECK(lap.eigenvalues().maxCoeff() < 2.0 + 1e-9);
      const Mat p = to_mat(normalized_propagation(adj));
      CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-15);
      Eigen::SelfAdjointEigenSolver<Mat> prop(p);
      CHECK(prop.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
      for (std::size_t i = 0; i < m; ++i) CHECK(p(i, i) > 0.0);
    }
  }
  SUBCASE("invalid adjacency rejected") {
    AdjacencyMatrix bad{Array({2, 2}, {0.0, 0.5, 0.2, 0.0}), AdjacencyKind::pcc, 0.0};
    CHECK_THROWS_AS(bad.validate(), ContractError);
  }
}

TEST_CASE("space_conv") {
  std::mt19937_64 rng(11);
  const Array h = random_array({4, 3}, rng);
  CHECK(layers::space_conv(h, Array::identity(3), Array::identity(3)) == h);

  AdjacencyMatrix full{Array({2, 2}, {0.0, 1.0, 1.0, 0.0}), AdjacencyKind::constant, 0.0};
  const Array out = layers::space_conv(Array({1, 2}, {1.0, 3.0}), normalized_propagation(full), Array::identity(2));
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(2.0));

  SUBCASE("relabeling APs permutes output columns") {
    const Array a = normalized_propagation(
        {Array({3, 3}, {0.0, 0.4, 0.1, 0.4, 0.0, 0.9, 0.1, 0.9, 0.0}), AdjacencyKind::pcc, 0.0});
    const Array w = random_array({3, 3}, rng);
    const std::size_t perm[3] = {2, 0, 1};
    Array hp({4, 3}), ap({3, 3}), wp({3, 3});
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) hp.at(r, c) = h.at(r, perm[c]);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        ap.at(i, j) = a.at(perm[i], perm[j]);
        wp.at(i, j) = w.at(perm[i], perm[j]);
      }
    const Array base = layers::space_conv(h, a, w);
    const Array moved = layers::space_conv(hp, ap, wp);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) CHECK(moved.at(r, c) == doctest::Approx(base.at(r, perm[c])).epsilon(1e-12));
  }
  CHECK_THROWS_AS(layers::space_conv(h, Array::identity(4), Array::identity(3)), DimensionError);
}

TEST_CASE("freq_conv") {
  std::mt19937_64 rng(12);
  const Array h = random_array({5, 2}, rng);
  CHECK(layers::freq_conv_dwc(h, Array({3, 2}, {0.0, 0.0, 1.0, 1.0, 0.0, 0.0})) == h);
  CHECK(layers::freq_conv_dwc(Array({3, 1}, {1.0, 2.0, 3.0}), Array({3, 1}, 1.0)) == Array({3, 1}, {3.0, 6.0, 5.0}));
  CHECK(layers::freq_conv_dwc(Array({5, 2}), random_array({3, 2}, rng)) == Array({5, 2}));
  CHECK_THROWS(layers::freq_conv_dwc(Array({2, 2}), Array({3, 2})));

  SUBCASE("dwc is linear") {
    const Array w = random_array({3, 2}, rng);
    const Array x = random_array({5, 2}, rng), y = random_array({5, 2}, rng);
    Array mix({5, 2});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * x[i] - 0.5 * y[i];
    const Array fx = layers::freq_conv_dwc(x, w), fy = layers::freq_conv_dwc(y, w);
    const Array fm = layers::freq_conv_dwc(mix, w);
    for (std::size_t i = 0; i < fm.size(); ++i) CHECK(std::abs(fm[i] - (2.0 * fx[i] - 0.5 * fy[i])) < 1e-12);
  }
  SUBCASE("pwc") {
    const Array stack = random_array({3, 2, 2}, rng);
    const Array sel = layers::freq_conv_pwc(stack, Array({3}, {0.0, 1.0, 0.0}));
    for (std::size_t i = 0; i < 4; ++i) CHECK(sel[i] == stack[4 + i]);
    Array same({2, 1, 2});
    for (std::size_t i = 0; i < 2; ++i) same[i] = same[2 + i] = static_cast<double>(i) + 1.5;
    const Array avg = layers::freq_conv_pwc(same, Array({2}, {0.5, 0.5}));
    CHECK(avg == Array({1, 2}, {1.5, 2.5}));
    CHECK(layers::freq_conv_pwc(Array({2, 1, 1}, {1.0, 10.0}), Array({2}, {1.0, 2.0}))[0] == 21.0);
    CHECK_THROWS_AS(layers::freq_conv_pwc(stack, Array({2})), DimensionError);
  }
}

TEST_CASE("positional encoding") {
  const Array p = layers::positional_encoding(4, 6);
  for (std::size_t j = 0; j < 6; j += 2) CHECK(p.at(0, j) == 0.0);
  for (std::size_t j = 1; j < 6; j += 2) CHECK(p.at(0, j) == doctest::Approx(-1.0));
  CHECK(p.at(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(layers::positional_encoding(3, 1).at(1, 0) == doctest::Approx(std::sin(1.0)));
}

TEST_CASE("multi-head attention") {
  SUBCASE("hand example") {
    layers::AttentionWeights w;
    w.w_q = {ad::constant(Array::identity(2))};
    w.w_k = {ad::constant(Array::identity(2))};
    w.w_v = {ad::constant(Array::identity(2))};
    w.w_o = ad::constant(Array::identity(2));
    std::vector<Array> att;
    const auto x = ad::constant(Array::identity(2));
    const Array out = layers::multi_head_attention(x, x, w, &att).value();
    const double hi = std::exp(1.0 / std::sqrt(2.0)) / (std::exp(1.0 / std::sqrt(2.0)) + 1.0);
    CHECK(hi == doctest::Approx(0.6698).epsilon(1e-4));
    CHECK(out.at(0, 0) == doctest::Approx(hi));
    CHECK(out.at(0, 1) == doctest::Approx(1.0 - hi));
    CHECK(out.at(1, 0) == doctest::Approx(1.0 - hi));
    CHECK(out.at(1, 1) == doctest::Approx(hi));
  }
  std::mt19937_64 rng(13);
  const auto w = random_attention(4, 2, 3, 2, rng);
  SUBCASE("single key") {
    const Array x = random_array({1, 4}, rng);
    const auto xv = ad::constant(x);
    const Array out = layers::multi_head_attention(xv, xv, w).value();
    // weight 1 on the only key: concat_i(x W_v,i) W_o
    Mat cat(1, 4);
    cat << to_mat(x) * to_mat(w.w_v[0].value()), to_mat(x) * to_mat(w.w_v[1].value());
    const Mat ref = cat * to_mat(w.w_o.value());
    for (std::size_t j = 0; j < 4; ++j) CHECK(out[j] == doctest::Approx(ref(0, j)).epsilon(1e-12));
  }
  SUBCASE("identical rows give identical outputs and rows sum to one") {
    Array x = random_array({3, 4}, rng);
    for (std::size_t j = 0; j < 4; ++j) x.at(2, j) = x.at(0, j);
    std::vector<Array> att;
    const auto xv = ad::constant(x);
    const Array out = layers::multi_head_attention(xv, xv, w, &att).value();
    for (std::size_t j = 0; j < 4; ++j) CHECK(out.at(2, j) == doctest::Approx(out.at(0, j)).epsilon(1e-12));
    REQUIRE(att.size() == 2);
    for (const Array& a : att)
      for (std::size_t r = 0; r < 3; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 3; ++c) s += a[r * 3 + c];
        CHECK(std::abs(s - 1.0) < 1e-12);
      }
  }
  CHECK_THROWS_AS(layers::multi_head_attention(ad::constant(Array({3, 5})), ad::constant(Array({3, 5})), w),
                  DimensionError);
}

TEST_CASE("layer norm") {
  const auto c = layers::layer_norm(ad::constant(Array({2, 1}, {3.0, 3.0})), 1e-6, layers::NormAxis::time).value();
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);
  const auto v = layers::layer_norm(ad::constant(Array({2, 1}, {0.0, 2.0})), 1e-15, layers::NormAxis::time).value();
  CHECK(v[0] == doctest::Approx(-1.0));
  CHECK(v[1] == doctest::Approx(1.0));

  std::mt19937_64 rng(14);
  const Array x = random_array({5, 3}, rng);
  Array shifted = x;
  for (std::size_t i = 0; i < 5; ++i) shifted.at(i, 1) += 7.0;
  const double eps = 1e-3;
  const Array a = layers::layer_norm(ad::constant(x), eps, layers::NormAxis::time).value();
  const Array b = layers::layer_norm(ad::constant(shifted), eps, layers::NormAxis::time).value();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  for (std::size_t j = 0; j < 3; ++j) {
    double mu = 0.0, var_in = 0.0, var_out = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      mu += a.at(i, j) / 5.0;
      mx += x.at(i, j) / 5.0;
    }
    for (std::size_t i = 0; i < 5; ++i) {
      var_out += (a.at(i, j) - mu) * (a.at(i, j) - mu) / 5.0;
      var_in += (x.at(i, j) - mx) * (x.at(i, j) - mx) / 5.0;
    }
    CHECK(std::abs(mu) < 1e-10);
    CHECK(std::abs(var_out - var_in / (var_in + eps)) < 1e-6);
  }
  SUBCASE("feature axis normalizes rows") {
    const Array f = layers::layer_norm(ad::constant(x), 1e-9, layers::NormAxis::feature).value();
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 3; ++j) s += f.at(i, j);
      CHECK(std::abs(s) < 1e-10);
    }
  }
}

TEST_CASE("feed forward") {
  const auto eye = ad::constant(Array::identity(2));
  const Array z({2, 2}, {1.0, 0.5, 2.0, 0.0});
  CHECK(layers::feed_forward(ad::constant(z), eye, eye).value() == z);
  const Array neg({1, 2}, {-1.0, -3.0});
  CHECK(layers::feed_forward(ad::constant(neg), eye, ad::constant(Array({2, 2}, 5.0))).value() == Array({1, 2}));
  const Array out =
      layers::feed_forward(ad::constant(Array({1, 2}, {1.0, -1.0})), eye, ad::constant(Array({2, 2}, {2.0, 0.0, 0.0, 2.0})))
          .value();
  CHECK(out == Array({1, 2}, {2.0, 0.0}));
}

TEST_CASE("encoder") {
  std::mt19937_64 rng(15);
  const std::size_t t = 4, d = 6;
  SUBCASE("zero weights collapse to repeated normalization") {
    layers::AttentionWeights w;
    w.w_q = {ad::constant(Array({d, 3}))};
    w.w_k = {ad::constant(Array({d, 3}))};
    w.w_v = {ad::constant(Array({d, 3}))};
    w.w_o = ad::constant(Array({3, d}));
    const layers::EncoderBlockWeights blk{w, ad::constant(Array({d, d})), ad::constant(Array({d, d}))};
    const std::vector<layers::EncoderBlockWeights> blocks{blk, blk};
    const auto x = ad::constant(random_array({t, d}, rng));
    const Array out = layers::encoder_forward(x, blocks, 1e-6, layers::NormAxis::time).value();
    auto ln = [](const ad::Var& v) { return layers::layer_norm(v, 1e-6, layers::NormAxis::time); };
    const Array ref = ln(ln(ln(ln(x)))).value();
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  SUBCASE("matches straight-line reference") {
    const std::vector<layers::EncoderBlockWeights> blocks{random_block(d, 2, 3, 3, rng), random_block(d, 2, 3, 3, rng)};
    const Array x = random_array({t, d}, rng);
    const Array out = layers::encoder_forward(ad::constant(x), blocks, 1e-6, layers::NormAxis::time).value();
    CHECK(out.shape() == Shape{t, d});
    const Mat ref = ref_block(ref_block(to_mat(x), blocks[0], 1e-6), blocks[1], 1e-6);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j) CHECK(std::abs(out.at(i, j) - ref(i, j)) < 1e-10);
  }
  SUBCASE("batched input equals per-sample input") {
    const std::vector<layers::EncoderBlockWeights> blocks{random_block(d, 2, 3, 3, rng), random_block(d, 2, 3, 3, rng)};
    const Array x = random_array({2, t, d}, rng);
    const Array both = layers::encoder_forward(ad::constant(x), blocks, 1e-6, layers::NormAxis::time).value();
    for (std::size_t b = 0; b < 2; ++b) {
      Array one({t, d});
      std::copy_n(x.data() + b * t * d, t * d, one.data());
      const Array single = layers::encoder_forward(ad::constant(one), blocks, 1e-6, layers::NormAxis::time).value();
      for (std::size_t i = 0; i < t * d; ++i) CHECK(std::abs(both[b * t * d + i] - single[i]) < 1e-12);
    }
  }
}

TEST_CASE("finite-difference gradients of every layer, 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (const auto& check : testing::gradient_suite(seed)) {
      CAPTURE(seed);
      CAPTURE(check.name);
      CHECK(check.error < 1e-4);
    }
}
