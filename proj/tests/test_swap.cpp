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

#include <random>

#include "oracles.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/swap.hpp"

using namespace swapgraph;

namespace {

SwapPermutation perm(int c, int k) { return build_swap_permutation(SwapConfig{k, c}); }

}  // namespace

TEST(SwapPermutation, SixteenChannelsKeyFive) {
  const std::vector<int> want{0, 1, 2, 3, 4, 5, 6, 7, 13, 12, 15, 14, 9, 8, 11, 10};
  EXPECT_EQ(perm(16, 5).table(), want);
}

TEST(SwapPermutation, XorPairsForKeyFive) {
  EXPECT_EQ(xor_partner(0, 5), 5);
  EXPECT_EQ(xor_partner(5, 5), 0);
  EXPECT_EQ(xor_partner(1, 5), 4);
  EXPECT_EQ(xor_partner(4, 5), 1);
}

TEST(SwapPermutation, InvolutiveBijectionFixingLowerHalf) {
  for (int c = 2; c <= 64; ++c)
    for (int k = 1; k <= 31; ++k) {
      const SwapPermutation p = perm(c, k);
      ASSERT_EQ(p.size(), c);
      std::vector<int> seen(static_cast<std::size_t>(c), 0);
      for (int i = 0; i < c; ++i) {
        ASSERT_EQ(p[p[i]], i);
        ++seen[static_cast<std::size_t>(p[i])];
        if (i < c / 2) ASSERT_EQ(p[i], i);
        else ASSERT_GE(p[i], c / 2);
      }
      for (int s : seen) ASSERT_EQ(s, 1);
    }
}

TEST(SwapPermutation, DegenerateKeysGiveIdentity) {
  EXPECT_TRUE(perm(16, 0).is_identity());
  EXPECT_TRUE(perm(2, 1).is_identity());
  EXPECT_TRUE(perm(3, 1).is_identity());
  EXPECT_FALSE(perm(4, 1).is_identity());
}

TEST(SwapPermutation, RejectsInvalidInput) {
  EXPECT_THROW(perm(1, 1), Error);
  EXPECT_THROW(perm(8, -1), Error);
  EXPECT_THROW(SwapPermutation(std::vector<int>{1, 2, 0}), Error);
  EXPECT_THROW(SwapPermutation(std::vector<int>{0, 0}), Error);
}

TEST(SwapPermutation, JsonRoundTrip) {
  const SwapPermutation p = perm(16, 5);
  EXPECT_EQ(permutation_from_json(permutation_to_json(p)), p);
  EXPECT_THROW(permutation_from_json("[1, 2, 0]"), Error);
  EXPECT_THROW(permutation_from_json("{\"table\": [0]}"), Error);
}

TEST(SwapForward, TwiceIsIdentityAndSumsInvariant) {
  std::mt19937_64 g(11);
  for (int c : {2, 3, 8, 16, 33}) {
    const Tensor4 x = oracle::random_tensor({2, c, 3, 4}, g);
    const SwapPermutation p = perm(c, 5);
    const Tensor4 once = swap_forward(x, p);
    EXPECT_EQ(swap_forward(once, p), x);
    for (int n = 0; n < 2; ++n)
      for (int y = 0; y < 3; ++y)
        for (int xx = 0; xx < 4; ++xx) {
          double a = 0, b = 0;
          for (int ch = 0; ch < c; ++ch) {
            a += x(n, ch, y, xx);
            b += once(n, ch, y, xx);
          }
          EXPECT_NEAR(a, b, 1e-12);
        }
  }
}

TEST(SwapForward, IdentityAndChannelMismatch) {
  std::mt19937_64 g(12);
  const Tensor4 x = oracle::random_tensor({1, 6, 2, 2}, g);
  EXPECT_EQ(swap_forward(x, SwapPermutation::identity(6)), x);
  EXPECT_THROW(swap_forward(x, perm(8, 5)), Error);
}

TEST(SwapBackward, IsTransposeOfForward) {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 4 + trial;
    const Tensor4 x = oracle::random_tensor({1, c, 2, 3}, g);
    const Tensor4 r = oracle::random_tensor(x.shape(), g);
    const SwapPermutation p = perm(c, 1 + trial % 7);
    EXPECT_NEAR(oracle::weighted_sum(swap_forward(x, p), r), oracle::weighted_sum(x, swap_backward(r, p)), 1e-12);
  }
}

TEST(SwapNN, DefaultGroupSize) {
  EXPECT_EQ(SwapNNParams::default_group_size(2), 1);
  EXPECT_EQ(SwapNNParams::default_group_size(16), 4);
  EXPECT_EQ(SwapNNParams::default_group_size(128), 32);
  const SwapNNParams p = SwapNNParams::make(16, 4);
  EXPECT_EQ(p.group_count(), 4);
  EXPECT_EQ(param_count(p), 4u);
}

TEST(SwapNN, UnitWeightsEqualSwap) {
  std::mt19937_64 g(14);
  const Tensor4 x = oracle::random_tensor({1, 16, 3, 3}, g);
  const SwapPermutation p = perm(16, 5);
  EXPECT_EQ(swapnn_forward(x, p, SwapNNParams::make(16, 4)), swap_forward(x, p));
}

TEST(SwapNN, GradientsMatchFiniteDifferences) {
  std::mt19937_64 g(15);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 4 + 2 * (trial % 5);
    const Tensor4 x = oracle::random_tensor({1, c, 3, 3}, g);
    const SwapPermutation p = perm(c, 1 + trial % 5);
    SwapNNParams w = SwapNNParams::make(c, SwapNNParams::default_group_size(c));
    for (double& v : w.weights) v = d(g);
    const Tensor4 r = oracle::random_tensor(x.shape(), g);
    const SwapNNGrads gr = swapnn_backward(x, p, w, r);
    std::vector<double> xv = x.values();
    auto fx = [&] { return oracle::weighted_sum(swapnn_forward(Tensor4(x.shape(), xv), p, w), r); };
    EXPECT_LT(oracle::max_grad_error(xv, gr.grad_x.values(), fx), 1e-4);
    auto fw = [&] { return oracle::weighted_sum(swapnn_forward(x, p, w), r); };
    EXPECT_LT(oracle::max_grad_error(w.weights, gr.grad_weights, fw), 1e-4);
  }
}

TEST(SwapBlock, ShapesAndParameterCounts) {
  Rng rng(1);
  const SwapBlock s = SwapBlock::make(SwapMode::Swap, 16, 5, false, rng);
  EXPECT_EQ(param_count(s), 16u * 16);
  const SwapBlock nn = SwapBlock::make(SwapMode::SwapNN, 16, 5, false, rng);
  EXPECT_EQ(param_count(nn), 8u * 16 + 4);
  const Tensor4 x(Shape4{1, 16, 4, 4}, 0.5);
  EXPECT_EQ(swap_block_forward(x, s).shape(), (Shape4{1, 16, 4, 4}));
  EXPECT_EQ(swap_block_forward(x, nn).shape(), (Shape4{1, 8, 4, 4}));
}

TEST(SwapBlock, GradientsMatchFiniteDifferences) {
  std::mt19937_64 g(16);
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    const SwapMode mode = trial % 2 ? SwapMode::SwapNN : SwapMode::Swap;
    SwapBlock b = SwapBlock::make(mode, 8, 5, true, rng);
    for (double& v : b.scale.weights) v = 0.5 + 0.1 * v;
    const Tensor4 x = oracle::random_tensor({1, 8, 3, 3}, g);
    const Tensor4 probe = swap_block_forward(x, b);
    const Tensor4 r = oracle::random_tensor(probe.shape(), g);
    const SwapBlockGrads gr = swap_block_backward(x, b, r);
    std::vector<double> xv = x.values();
    auto fx = [&] { return oracle::weighted_sum(swap_block_forward(Tensor4(x.shape(), xv), b), r); };
    EXPECT_LT(oracle::max_grad_error(xv, gr.grad_x.values(), fx), 1e-4);
    auto fp = [&] { return oracle::weighted_sum(swap_block_forward(x, b), r); };
    EXPECT_LT(oracle::max_grad_error(b.mix.weights, gr.grad_mix.weights, fp), 1e-4);
    EXPECT_LT(oracle::max_grad_error(b.mix.bias, gr.grad_mix.bias, fp), 1e-4);
    if (mode == SwapMode::SwapNN) {
      EXPECT_LT(oracle::max_grad_error(b.scale.weights, gr.grad_scale, fp), 1e-4);
    }
  }
}

TEST(SwapMode, StringRoundTrip) {
  for (SwapMode m : {SwapMode::NoSwap, SwapMode::Swap, SwapMode::SwapNN})
    EXPECT_EQ(swap_mode_from_string(to_string(m)), m);
  EXPECT_THROW(swap_mode_from_string("shuffle"), Error);
}
