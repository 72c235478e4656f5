/*
Copyright 2026 The ebdoa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "ebdoa/nn.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace ebdoa::nn {
namespace {

template <class Vec>
void fill_normal(Vec& v, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  for (auto& x : v) x = static_cast<typename Vec::value_type>(g(rng));
}

template <class T>
Tensor<T> random_tensor(typename Tensor<T>::Shape shape, std::mt19937_64& rng) {
  Tensor<T> t(shape);
  fill_normal(t.values(), rng);
  return t;
}

// Loss 0.5 * sum(out .* probe): gradient wrt out is probe.
double probe_loss(const Tensor<double>& out, const Tensor<double>& probe) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * probe.values()[i];
  return s;
}

TEST(DenseTest, IdentityLayer) {
  auto p = LayerParams<double>::make_dense(4, 4);
  for (int i = 0; i < 4; ++i) p.weight[static_cast<std::size_t>(i * 4 + i)] = 1.0;
  const Tensor<double> x({2, 4, 1, 1}, std::vector<double>{1, 2, 3, 4, -1, -2, -3, -4});
  EXPECT_EQ(dense(p, x).values(), x.values());
  EXPECT_THROW(dense(p, Tensor<double>({1, 3, 1, 1})), DomainError);
}

TEST(DenseTest, HalfSquaredNormGradient) {
  std::mt19937_64 rng(1);
  auto p = LayerParams<double>::make_dense(6, 3);
  fill_normal(p.weight, rng);
  fill_normal(p.bias, rng);
  const auto x = random_tensor<double>({1, 6, 1, 1}, rng);
  const auto out = dense(p, x);
  // d(0.5 |out|^2)/d out = out, so dW = out x^T.
  const auto back = dense_backward(p, x, out);
  for (int o = 0; o < 3; ++o)
    for (int i = 0; i < 6; ++i)
      EXPECT_NEAR(back.grad_params.weight[static_cast<std::size_t>(o * 6 + i)],
                  out.values()[static_cast<std::size_t>(o)] * x.values()[static_cast<std::size_t>(i)],
                  1e-14);
  for (int o = 0; o < 3; ++o)
    EXPECT_DOUBLE_EQ(back.grad_params.bias[static_cast<std::size_t>(o)], out.values()[static_cast<std::size_t>(o)]);
}

TEST(DenseTest, FiniteDifferences) {
  std::mt19937_64 rng(2);
  auto p = LayerParams<double>::make_dense(8, 5);
  fill_normal(p.weight, rng);
  fill_normal(p.bias, rng);
  auto x = random_tensor<double>({3, 8, 1, 1}, rng);
  const auto probe = random_tensor<double>({3, 5, 1, 1}, rng);
  const auto back = dense_backward(p, x, probe);
  auto loss = [&] { return probe_loss(dense(p, x), probe); };
  const auto r = gradient_check<double>({p.weight, p.bias, x.values()},
                                        {back.grad_params.weight, back.grad_params.bias,
                                         back.grad_input.values()},
                                        loss, 1000, 3, 1e-4);
  EXPECT_LT(r.max_relative_error, 1e-4);
  EXPECT_EQ(r.coordinates, 8u * 5u + 5u + 24u);
}

TEST(DeconvTest, SingleElementScatter) {
  auto p = LayerParams<double>::make_deconv({1, 1, 2, 2, 2, 2, 0, 0, 0, 0});
  p.weight = {1.0, 2.0, 3.0, 4.0};
  p.bias = {0.5};
  const Tensor<double> x({1, 1, 1, 1}, std::vector<double>{3.0});
  const auto y = deconv2d(p, x);
  ASSERT_EQ(y.shape(), (Tensor<double>::Shape{1, 1, 2, 2}));
  EXPECT_EQ(y.values(), (AlignedVector<double>{3.5, 6.5, 9.5, 12.5}));
}

TEST(DeconvTest, OutputSize) {
  const DeconvGeometry g{16, 8, 4, 4, 2, 2, 1, 1, 0, 0};
  EXPECT_EQ(g.out_height(15), 30);
  EXPECT_EQ(g.out_width(30), 60);
  auto p = LayerParams<float>::make_deconv({1, 1, 4, 4, 2, 2, 1, 1, 0, 0});
  EXPECT_EQ(deconv2d(p, Tensor<float>({1, 1, 15, 30})).shape(), (Tensor<float>::Shape{1, 1, 30, 60}));
  EXPECT_THROW(deconv2d(p, Tensor<float>({1, 2, 15, 30})), DomainError);
  EXPECT_THROW(LayerParams<float>::make_deconv({1, 1, 4, 4, 2, 2, 1, 1, 2, 0}), ConfigError);
}

// Alternate definition: insert (stride - 1) zeros between input pixels, pad
// by (kernel - 1 - pad) (plus output padding at the far edge) and run a plain
// stride-1 correlation with the spatially flipped kernel.
Tensor<double> zero_insert_oracle(const LayerParams<double>& p, const Tensor<double>& x) {
  const DeconvGeometry& g = p.deconv;
  const int uh = (x.height() - 1) * g.stride_h + 1, uw = (x.width() - 1) * g.stride_w + 1;
  const int lead_h = g.kernel_h - 1 - g.pad_h, lead_w = g.kernel_w - 1 - g.pad_w;
  const int ph = uh + 2 * lead_h + g.output_pad_h, pw = uw + 2 * lead_w + g.output_pad_w;
  Tensor<double> padded({x.batch(), g.in_channels, ph, pw});
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < g.in_channels; ++c)
      for (int y = 0; y < x.height(); ++y)
        for (int z = 0; z < x.width(); ++z)
          padded(n, c, lead_h + y * g.stride_h, lead_w + z * g.stride_w) = x(n, c, y, z);
  const int oh = ph - g.kernel_h + 1, ow = pw - g.kernel_w + 1;
  Tensor<double> out({x.batch(), g.out_channels, oh, ow});
  auto w = [&](int ci, int co, int ki, int kj) {
    return p.weight[static_cast<std::size_t>(((ci * g.out_channels + co) * g.kernel_h + ki) * g.kernel_w + kj)];
  };
  for (int n = 0; n < x.batch(); ++n)
    for (int co = 0; co < g.out_channels; ++co)
      for (int y = 0; y < oh; ++y)
        for (int z = 0; z < ow; ++z) {
          double acc = p.bias[static_cast<std::size_t>(co)];
          for (int ci = 0; ci < g.in_channels; ++ci)
            for (int ki = 0; ki < g.kernel_h; ++ki)
              for (int kj = 0; kj < g.kernel_w; ++kj)
                acc += padded(n, ci, y + ki, z + kj) * w(ci, co, g.kernel_h - 1 - ki, g.kernel_w - 1 - kj);
          out(n, co, y, z) = acc;
        }
  return out;
}

TEST(DeconvTest, MatchesZeroInsertionOracle) {
  std::mt19937_64 rng(4);
  const std::vector<DeconvGeometry> geometries{
      {3, 2, 4, 4, 2, 2, 1, 1, 0, 0}, {2, 3, 3, 3, 1, 1, 1, 1, 0, 0}, {2, 2, 3, 2, 2, 3, 0, 1, 1, 2},
      {1, 4, 5, 3, 3, 2, 2, 0, 0, 1}};
  for (const auto& g : geometries) {
    auto p = LayerParams<double>::make_deconv(g);
    fill_normal(p.weight, rng);
    fill_normal(p.bias, rng);
    const auto x = random_tensor<double>({2, g.in_channels, 4, 5}, rng);
    const auto fast = deconv2d(p, x);
    const auto slow = zero_insert_oracle(p, x);
    ASSERT_EQ(fast.shape(), slow.shape());
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      err = std::max(err, std::abs(fast.values()[i] - slow.values()[i]));
      norm = std::max(norm, std::abs(slow.values()[i]));
    }
    EXPECT_LT(err, 1e-10 * norm);
  }
}

TEST(DeconvTest, FiniteDifferences) {
  std::mt19937_64 rng(5);
  for (const DeconvGeometry g : {DeconvGeometry{3, 4, 4, 4, 2, 2, 1, 1, 0, 0},
                                 DeconvGeometry{4, 3, 3, 3, 1, 1, 1, 1, 0, 0},
                                 DeconvGeometry{5, 3, 3, 2, 2, 3, 0, 1, 1, 2}}) {
    auto p = LayerParams<double>::make_deconv(g);
    fill_normal(p.weight, rng);
    fill_normal(p.bias, rng);
    auto x = random_tensor<double>({2, g.in_channels, 3, 4}, rng);
    const auto probe = random_tensor<double>(deconv2d(p, x).shape(), rng);
    const auto back = deconv2d_backward(p, x, probe);
    auto loss = [&] { return probe_loss(deconv2d(p, x), probe); };
    const auto r = gradient_check<double>({p.weight, p.bias, x.values()},
                                          {back.grad_params.weight, back.grad_params.bias,
                                           back.grad_input.values()},
                                          loss, 400, 6, 1e-4);
    EXPECT_LT(r.max_relative_error, 1e-4);
    EXPECT_GE(r.coordinates, 200u);
  }
}

TEST(ReluTest, ForwardBackward) {
  const Tensor<double> x({1, 4, 1, 1}, std::vector<double>{-1.0, 0.0, 2.0, 3.0});
  EXPECT_EQ(relu(x).values(), (AlignedVector<double>{0.0, 0.0, 2.0, 3.0}));
  const Tensor<double> g({1, 4, 1, 1}, std::vector<double>{1.0, 1.0, 1.0, 1.0});
  EXPECT_EQ(relu_backward(x, g).values(), (AlignedVector<double>{0.0, 0.0, 1.0, 1.0}));
}

TEST(SigmoidBceTest, KnownValues) {
  const auto half = sigmoid_bce(Tensor<double>({1, 3, 1, 1}, 0.0), Tensor<double>({1, 3, 1, 1}, 0.5));
  EXPECT_NEAR(half.loss, std::log(2.0), 1e-15);
  for (double g : half.grad.values()) EXPECT_DOUBLE_EQ(g, 0.0);

  const Tensor<double> logits({1, 4, 1, 1}, std::vector<double>{40.0, -40.0, 60.0, -60.0});
  const Tensor<double> targets({1, 4, 1, 1}, std::vector<double>{1.0, 0.0, 1.0, 0.0});
  const auto perfect = sigmoid_bce(logits, targets);
  EXPECT_LT(perfect.loss, 1e-15);
  EXPECT_GE(perfect.loss, 0.0);
  for (double g : perfect.grad.values()) EXPECT_LT(std::abs(g), 1e-15);

  // Extreme logits stay finite.
  const auto wrong = sigmoid_bce(logits, Tensor<double>({1, 4, 1, 1}, 0.5));
  EXPECT_TRUE(std::isfinite(wrong.loss));
  EXPECT_THROW(sigmoid_bce(logits, Tensor<double>({1, 4, 1, 1}, 1.5)), DomainError);
  EXPECT_THROW(sigmoid_bce(logits, Tensor<double>({1, 3, 1, 1}, 0.5)), DomainError);
}

TEST(SigmoidBceTest, FiniteDifferences) {
  std::mt19937_64 rng(7);
  auto logits = random_tensor<double>({2, 30, 1, 1}, rng);
  Tensor<double> targets({2, 30, 1, 1});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& t : targets.values()) t = u(rng);
  const auto r0 = sigmoid_bce(logits, targets);
  auto loss = [&] { return sigmoid_bce(logits, targets).loss; };
  const auto r = gradient_check<double>({logits.values()}, {r0.grad.values()}, loss, 60, 8, 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-5);
}

TEST(SigmoidBceTest, NonNegative) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto logits = random_tensor<double>({1, 10, 1, 1}, rng);
    Tensor<double> targets({1, 10, 1, 1});
    for (double& t : targets.values()) t = u(rng) < 0.5 ? 0.0 : 1.0;
    EXPECT_GT(sigmoid_bce(logits, targets).loss, 0.0);
  }
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> w{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, -7.0, 1e-3};
  AdamState<double> state({0.01, 0.9, 0.999, 1e-8}, {3});
  adam_step<double>(state, {w}, {g});
  EXPECT_NEAR(w[0], 1.0 - 0.01, 1e-7);
  EXPECT_NEAR(w[1], -2.0 + 0.01, 1e-7);
  EXPECT_NEAR(w[2], 0.5 - 0.01, 1e-6);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  std::vector<float> w{1.0f, 2.0f};
  const std::vector<float> g{0.0f, 0.0f};
  AdamState<float> state(AdamConfig{}, {2});
  for (int i = 0; i < 50; ++i) adam_step<float>(state, {w}, {g});
  EXPECT_EQ(w, (std::vector<float>{1.0f, 2.0f}));
}

TEST(AdamTest, ScalarQuadratic) {
  std::vector<double> w{0.0};
  AdamState<double> state({0.1, 0.9, 0.999, 1e-8}, {1});
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> g{2.0 * (w[0] - 3.0)};
    adam_step<double>(state, {w}, {g});
  }
  EXPECT_LT(std::abs(w[0] - 3.0), 0.1);
}

TEST(TensorTest, ShapeChecks) {
  EXPECT_THROW(Tensor<float>({1, 2, 3, 4}, std::vector<float>(5)), DomainError);
  const Tensor<float> t({2, 3, 1, 1}, 1.0f);
  EXPECT_EQ(t.reshaped({1, 6, 1, 1}).shape(), (Tensor<float>::Shape{1, 6, 1, 1}));
  EXPECT_THROW(t.reshaped({1, 7, 1, 1}), DomainError);
}

}  // namespace
}  // namespace ebdoa::nn
