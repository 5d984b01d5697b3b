// Copyright 2026 The SwapGraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/ops.hpp"
#include "swapgraph/rng.hpp"
#include "swapgraph/tensor.hpp"

using namespace swapgraph;

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor4(Shape4{0, 1, 1, 1}), Error);
  EXPECT_THROW(Tensor4(Shape4{1, 1, 2, 2}, std::vector<double>(3)), Error);
  Tensor4 t(Shape4{2, 3, 4, 5}, 1.5);
  EXPECT_EQ(t.size(), 120u);
  EXPECT_EQ(t.index(1, 2, 3, 4), 119u);
  EXPECT_EQ(t.index(0, 1, 0, 0), 20u);
}

TEST(Tensor, ConcatAndSample) {
  std::mt19937_64 g(1);
  const Tensor4 a = oracle::random_tensor({1, 2, 3, 3}, g);
  const Tensor4 b = oracle::random_tensor({1, 2, 3, 3}, g);
  const std::vector<Tensor4> parts{a, b};
  const Tensor4 cat = concat_batch(parts);
  EXPECT_EQ(cat.shape(), (Shape4{2, 2, 3, 3}));
  EXPECT_EQ(cat.sample(0), a);
  EXPECT_EQ(cat.sample(1), b);
}

TEST(Conv, IdentityKernelIsIdentity) {
  std::mt19937_64 g(2);
  const Tensor4 x = oracle::random_tensor({2, 5, 6, 7}, g);
  EXPECT_EQ(conv2d_forward(x, ConvParams::identity(5, true)), x);
  const ConvGrads gr = conv2d_backward(x, ConvParams::identity(5, true), x);
  EXPECT_EQ(gr.grad_x, x);
}

TEST(Conv, OnesKernelCentreIsNine) {
  ConvParams p = ConvParams::zeros(1, 1, 3, false);
  std::fill(p.weights.begin(), p.weights.end(), 1.0);
  const Tensor4 x(Shape4{1, 1, 3, 3}, 1.0);
  const Tensor4 y = conv2d_forward(x, p, 1);
  EXPECT_DOUBLE_EQ(y(0, 0, 1, 1), 9.0);
  EXPECT_DOUBLE_EQ(y(0, 0, 0, 0), 4.0);
}

TEST(Conv, MatchesDirectLoop) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = trial % 2 ? 3 : 1;
    const Tensor4 x = oracle::random_tensor({1 + trial % 2, 2 + trial % 3, 4 + trial % 3, 4 + trial % 4}, g);
    const ConvParams p = oracle::random_conv(1 + trial % 4, x.c(), k, trial % 3 != 0, g);
    const Tensor4 got = conv2d_forward(x, p);
    const Tensor4 want = oracle::direct_conv(x, p, (k - 1) / 2);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
  }
}

TEST(Conv, RejectsShapeMismatchAndBadKernels) {
  const Tensor4 x(Shape4{1, 3, 4, 4});
  EXPECT_THROW(conv2d_forward(x, ConvParams::zeros(2, 2, 3)), Error);
  EXPECT_THROW(ConvParams::zeros(2, 3, 5), Error);
}

TEST(Conv, ZeroGradOutGivesZeroGrads) {
  std::mt19937_64 g(4);
  const Tensor4 x = oracle::random_tensor({1, 2, 4, 4}, g);
  const ConvParams p = oracle::random_conv(3, 2, 3, true, g);
  const ConvGrads gr = conv2d_backward(x, p, Tensor4(Shape4{1, 3, 4, 4}));
  for (double v : gr.grad_x.data()) EXPECT_EQ(v, 0.0);
  for (double v : gr.grad_p.weights) EXPECT_EQ(v, 0.0);
  for (double v : gr.grad_p.bias) EXPECT_EQ(v, 0.0);
}

TEST(Conv, GradientsMatchFiniteDifferences) {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = trial % 2 ? 3 : 1;
    Tensor4 x = oracle::random_tensor({1, 2, 4, 4}, g);
    ConvParams p = oracle::random_conv(2, 2, k, true, g);
    const Tensor4 r = oracle::random_tensor({1, 2, 4, 4}, g);
    const ConvGrads gr = conv2d_backward(x, p, r);
    std::vector<double> xv = x.values();
    auto fx = [&] { return oracle::weighted_sum(conv2d_forward(Tensor4(x.shape(), xv), p), r); };
    EXPECT_LT(oracle::max_grad_error(xv, gr.grad_x.values(), fx), 1e-4);
    auto fw = [&] { return oracle::weighted_sum(conv2d_forward(x, p), r); };
    EXPECT_LT(oracle::max_grad_error(p.weights, gr.grad_p.weights, fw), 1e-4);
    EXPECT_LT(oracle::max_grad_error(p.bias, gr.grad_p.bias, fw), 1e-4);
  }
}

TEST(Relu, ForwardAndSubgradient) {
  const Tensor4 x(Shape4{1, 1, 1, 3}, std::vector<double>{-1, 0, 2});
  const Tensor4 y = relu_forward(x);
  EXPECT_EQ(y.values(), (std::vector<double>{0, 0, 2}));
  const Tensor4 g = relu_backward(x, Tensor4(x.shape(), 1.0));
  EXPECT_EQ(g.values(), (std::vector<double>{0, 0, 1}));
  const Tensor4 pos(Shape4{1, 2, 2, 2}, 0.3);
  EXPECT_EQ(relu_forward(pos), pos);
}

TEST(Relu, GradientMatchesFiniteDifferencesAwayFromZero) {
  std::mt19937_64 g(6);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor4 x = oracle::random_tensor({1, 2, 3, 3}, g);
    for (double& v : x.data())
      if (std::abs(v) < 1e-3) v = 0.5;
    const Tensor4 r = oracle::random_tensor(x.shape(), g);
    std::vector<double> xv = x.values();
    auto f = [&] { return oracle::weighted_sum(relu_forward(Tensor4(x.shape(), xv)), r); };
    EXPECT_LT(oracle::max_grad_error(xv, relu_backward(x, r).values(), f), 1e-4);
  }
}

TEST(Sigmoid, ValuesAndSaturation) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_LT(sigmoid(inf), 1.0);
  EXPECT_GT(sigmoid(-inf), 0.0);
  EXPECT_LT(sigmoid(800.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0)));
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
}

TEST(Sigmoid, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor4 x = oracle::random_tensor({1, 2, 3, 3}, g, -4, 4);
    const Tensor4 r = oracle::random_tensor(x.shape(), g);
    std::vector<double> xv = x.values();
    auto f = [&] { return oracle::weighted_sum(sigmoid_forward(Tensor4(x.shape(), xv)), r); };
    EXPECT_LT(oracle::max_grad_error(xv, sigmoid_backward(sigmoid_forward(x), r).values(), f), 1e-6);
  }
}

TEST(Resample, ConstantsArePreserved) {
  const Tensor4 c(Shape4{1, 2, 4, 6}, 0.7);
  const Tensor4 down = downsample2(c), up = upsample2(c);
  for (double v : down.data()) EXPECT_DOUBLE_EQ(v, 0.7);
  for (double v : up.data()) EXPECT_DOUBLE_EQ(v, 0.7);
  EXPECT_EQ(upsample2(c).shape(), (Shape4{1, 2, 8, 12}));
}

TEST(Resample, MaxPoolBlock) {
  const Tensor4 x(Shape4{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(downsample2(x)(0, 0, 0, 0), 4.0);
  EXPECT_THROW(downsample2(Tensor4(Shape4{1, 1, 3, 4})), Error);
}

TEST(Resample, UpsampleSamplesHalfCoordinates) {
  std::mt19937_64 g(8);
  const Tensor4 x = oracle::random_tensor({1, 1, 3, 3}, g);
  const Tensor4 y = upsample2(x);
  std::vector<double> plane = x.values();
  for (int Y = 0; Y < 6; ++Y)
    for (int X = 0; X < 6; ++X) {
      const double sx = std::min(X / 2.0, 2.0);
      const double sy = std::min(Y / 2.0, 2.0);
      EXPECT_NEAR(y(0, 0, Y, X), oracle::bilinear(plane, 3, 3, sx, sy), 1e-15);
    }
}

TEST(Resample, GradientsMatchFiniteDifferences) {
  std::mt19937_64 g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor4 x = oracle::random_tensor({1, 2, 4, 4}, g);
    std::vector<double> xv = x.values();
    const Tensor4 rd = oracle::random_tensor({1, 2, 2, 2}, g);
    auto fd = [&] { return oracle::weighted_sum(downsample2(Tensor4(x.shape(), xv)), rd); };
    EXPECT_LT(oracle::max_grad_error(xv, downsample2_backward(x, rd).values(), fd), 1e-4);
    const Tensor4 ru = oracle::random_tensor({1, 2, 8, 8}, g);
    auto fu = [&] { return oracle::weighted_sum(upsample2(Tensor4(x.shape(), xv)), ru); };
    EXPECT_LT(oracle::max_grad_error(xv, upsample2_backward(ru, x.shape()).values(), fu), 1e-4);
  }
}

TEST(ParamCount, Conv1024Comparator) {
  EXPECT_EQ(param_count(ConvParams::zeros(1024, 1024, 3, false)), 9437184u);
  EXPECT_EQ(param_count(ConvParams::zeros(1024, 1024, 1, false)), 1048576u);
  EXPECT_EQ(param_count(ConvParams::zeros(8, 4, 3, true)), 8u * 4 * 9 + 8);
}

TEST(Ops, InputsAreNotMutated) {
  std::mt19937_64 g(10);
  const Tensor4 x = oracle::random_tensor({1, 2, 4, 4}, g);
  const Tensor4 copy = x;
  const ConvParams p = oracle::random_conv(2, 2, 3, true, g);
  conv2d_forward(x, p);
  relu_forward(x);
  sigmoid_forward(x);
  downsample2(x);
  upsample2(x);
  EXPECT_EQ(x, copy);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto v = a.uniform_int(-3, 7);
    EXPECT_EQ(v, b.uniform_int(-3, 7));
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 7);
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
}
