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
#include <random>

#include "oracles.hpp"
#include "swapgraph/data_io.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/optim.hpp"
#include "swapgraph/pipeline.hpp"
#include "swapgraph/segnet.hpp"

using namespace swapgraph;

namespace {

SegNetConfig toy_config(SwapMode mode, std::uint64_t seed) {
  SegNetConfig cfg;
  cfg.side = 8;
  cfg.channels = {2, 4};
  cfg.mode = mode;
  cfg.swap_key = 1;
  cfg.seed = seed;
  return cfg;
}

double loss_only(const SegNet& net, const Tensor4& x, const Tensor4& mask) {
  return side_bce(net.forward(x), mask).loss;
}

struct Split {
  std::vector<Tensor4> images;
  std::vector<Tensor4> masks;
};

Split synthetic(int count) {
  SyntheticConfig sc;
  Split s;
  for (const Sample& smp : generate_samples(sc, 0, count)) {
    s.images.push_back(smp.image);
    s.masks.push_back(training_mask(smp.annotation, 1));
  }
  return s;
}

double pixel_accuracy(const SegNet& net, const Split& s) {
  double hits = 0, total = 0;
  for (std::size_t i = 0; i < s.images.size(); ++i) {
    const Tensor4 p = net.forward(s.images[i]).prob_map;
    for (std::size_t k = 0; k < p.size(); ++k) {
      hits += (p.data()[k] > 0.5) == (s.masks[i].data()[k] > 0.5);
      total += 1;
    }
  }
  return hits / total;
}

}  // namespace

TEST(SegNet, ShapeContract) {
  SegNet net{SegNetConfig{}};
  std::mt19937_64 g(21);
  const Tensor4 x = oracle::random_tensor({2, 1, 64, 64}, g, 0, 1);
  const SideOutputs out = net.forward(x);
  EXPECT_EQ(out.prob_map.shape(), (Shape4{2, 1, 64, 64}));
  ASSERT_EQ(out.features.size(), 4u);
  ASSERT_EQ(out.side_probs.size(), 4u);
  const int channels[] = {16, 32, 64, 128};
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(out.features[static_cast<std::size_t>(l)].shape(), (Shape4{2, channels[l], 64 >> l, 64 >> l}));
    EXPECT_EQ(out.side_probs[static_cast<std::size_t>(l)].shape(), out.prob_map.shape());
  }
  EXPECT_EQ(out.side_probs[0], out.prob_map);
  for (double v : out.prob_map.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(SegNet, RejectsWrongInput) {
  SegNet net{SegNetConfig{}};
  EXPECT_THROW(net.forward(Tensor4(Shape4{1, 1, 32, 32})), Error);
  EXPECT_THROW(net.forward(Tensor4(Shape4{1, 3, 64, 64})), Error);
  SegNetConfig bad;
  bad.side = 60;
  EXPECT_THROW(SegNet{bad}, Error);
}

TEST(SegNet, SwapAddsNoParameters) {
  SegNetConfig cfg;
  cfg.mode = SwapMode::NoSwap;
  const std::size_t noswap = SegNet(cfg).param_count();
  cfg.mode = SwapMode::Swap;
  EXPECT_EQ(SegNet(cfg).param_count(), noswap);
  cfg.mode = SwapMode::SwapNN;
  EXPECT_EQ(SegNet(cfg).param_count(), noswap + 16);
}

TEST(SegNet, SameSeedSameWeightsAcrossModes) {
  SegNetConfig a;
  a.mode = SwapMode::NoSwap;
  SegNetConfig b = a;
  b.mode = SwapMode::Swap;
  SegNet na(a), nb(b);
  EXPECT_EQ(parameter_arrays(na.params(), a.mode).size(), parameter_arrays(nb.params(), b.mode).size());
  auto pa = parameter_arrays(na.params(), a.mode);
  auto pb = parameter_arrays(nb.params(), b.mode);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
}

TEST(SegNet, SwapChangesTheForwardPass) {
  SegNetConfig a;
  a.mode = SwapMode::NoSwap;
  SegNetConfig b = a;
  b.mode = SwapMode::Swap;
  std::mt19937_64 g(22);
  const Tensor4 x = oracle::random_tensor({1, 1, 64, 64}, g, 0, 1);
  EXPECT_NE(SegNet(a).forward(x).prob_map, SegNet(b).forward(x).prob_map);
}

TEST(SegNet, SeedControlsInitialisation) {
  SegNetConfig a;
  SegNetConfig b = a;
  b.seed = a.seed + 1;
  SegNet na(a), nb(b), nc(a);
  EXPECT_EQ(*parameter_arrays(na.params(), a.mode)[0], *parameter_arrays(nc.params(), a.mode)[0]);
  EXPECT_NE(*parameter_arrays(na.params(), a.mode)[0], *parameter_arrays(nb.params(), a.mode)[0]);
}

TEST(SegLoss, GradientsMatchFiniteDifferences) {
  const SwapMode modes[] = {SwapMode::NoSwap, SwapMode::Swap, SwapMode::SwapNN};
  int accepted = 0;
  for (int attempt = 0; accepted < 21 && attempt < 400; ++attempt) {
    const SwapMode mode = modes[accepted % 3];
    SegNet net(toy_config(mode, static_cast<std::uint64_t>(100 + attempt)));
    std::mt19937_64 g(static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    // Zero biases put dead units exactly on the ReLU kink.
    for (auto* arr : parameter_arrays(net.params(), mode))
      for (double& w : *arr) w += jitter(g);
    const Tensor4 x = oracle::random_tensor({2, 1, 8, 8}, g, 0, 1);
    if (oracle::kink_margin(net, x) < 1e-4) continue;
    ++accepted;
    Tensor4 mask = oracle::random_tensor(x.shape(), g, 0, 1);
    for (double& v : mask.data()) v = v > 0.7 ? 1.0 : 0.0;
    SegLossResult res = seg_loss(net, x, mask);
    EXPECT_NEAR(res.loss, loss_only(net, x, mask), 1e-15);
    auto values = parameter_arrays(net.params(), mode);
    auto grads = parameter_arrays(res.grads, mode);
    ASSERT_EQ(values.size(), grads.size());
    auto f = [&] { return loss_only(net, x, mask); };
    double worst = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
      worst = std::max(worst, oracle::max_grad_error(*values[k], *grads[k], f));
    EXPECT_LT(worst, 1e-4) << "attempt " << attempt << " mode " << to_string(mode);
  }
  EXPECT_EQ(accepted, 21);
}

TEST(SideBce, ValuesAndValidation) {
  SideOutputs out;
  out.prob_map = Tensor4(Shape4{1, 1, 1, 2}, std::vector<double>{0.25, 0.5});
  out.side_probs = {out.prob_map, out.prob_map};
  const Tensor4 mask(Shape4{1, 1, 1, 2}, std::vector<double>{1, 0});
  const SideBce r = side_bce(out, mask);
  EXPECT_NEAR(r.loss, -(std::log(0.25) + std::log(0.5)) / 2, 1e-12);
  ASSERT_EQ(r.grad_side_logits.size(), 2u);
  EXPECT_NEAR(r.grad_side_logits[0].data()[0], (0.25 - 1) / 4, 1e-15);
  EXPECT_THROW(side_bce(out, Tensor4(Shape4{1, 1, 1, 2}, 0.5)), Error);
  EXPECT_THROW(side_bce(out, Tensor4(Shape4{1, 1, 2, 1})), Error);

  out.prob_map = Tensor4(Shape4{1, 1, 1, 2}, std::vector<double>{0.0, 1.0});
  out.side_probs = {out.prob_map};
  const SideBce sat = side_bce(out, mask);
  EXPECT_TRUE(std::isfinite(sat.loss));
  EXPECT_NEAR(sat.loss, -std::log(1e-7), 1e-6);
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  std::vector<double> w{1.0, -2.0, 0.5};
  std::vector<double> g{0.3, -4.0, 0.0};
  ParamRefs refs;
  refs.add(w, g);
  Adam adam;
  adam.step(refs, 0.01);
  EXPECT_NEAR(w[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(w[1], -2.0 + 0.01, 1e-9);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, LayoutChangeIsRejected) {
  std::vector<double> w{1.0}, g{1.0}, w2{1.0, 2.0}, g2{1.0, 1.0};
  ParamRefs a;
  a.add(w, g);
  Adam adam;
  adam.step(a, 0.1);
  ParamRefs b;
  b.add(w2, g2);
  EXPECT_THROW(adam.step(b, 0.1), Error);
}

TEST(Training, ZeroLearningRateLeavesParametersUnchanged) {
  const Split s = synthetic(4);
  SegNetConfig cfg;
  cfg.channels = {4, 8, 16, 32};
  SegNet net(cfg);
  const SegNetParams before = net.params();
  SegTrainConfig tc;
  tc.epochs = 1;
  tc.lr = 0.0;
  train_segnet(net, s.images, s.masks, tc);
  SegNetParams after = net.params();
  SegNetParams ref = before;
  auto a = parameter_arrays(after, cfg.mode);
  auto b = parameter_arrays(ref, cfg.mode);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
}

TEST(Training, LearningRateSchedule) {
  EXPECT_DOUBLE_EQ(epoch_learning_rate(1e-3, 1e-4, DecayMode::LearningRate, 0), 1e-3);
  EXPECT_NEAR(epoch_learning_rate(1e-3, 1e-4, DecayMode::LearningRate, 10), 1e-3 * std::pow(1 - 1e-4, 10), 1e-18);
  EXPECT_DOUBLE_EQ(epoch_learning_rate(1e-3, 1e-4, DecayMode::Weight, 10), 1e-3);
}

TEST(Training, RejectsBadInput) {
  SegNetConfig cfg;
  cfg.channels = {4, 8};
  SegNet net(cfg);
  std::vector<Tensor4> none;
  EXPECT_THROW(train_segnet(net, none, none, SegTrainConfig{}), Error);
  std::vector<Tensor4> one{Tensor4(Shape4{1, 1, 64, 64})};
  std::vector<Tensor4> two(2, Tensor4(Shape4{1, 1, 64, 64}));
  EXPECT_THROW(train_segnet(net, one, two, SegTrainConfig{}), Error);
}

TEST(Training, LossDecreasesOnFiftyImages) {
  const Split s = synthetic(50);
  SegNetConfig cfg;
  cfg.channels = {4, 8, 16, 32};
  SegNet net(cfg);
  SegTrainConfig tc;
  tc.epochs = 30;
  const TrainCurve curve = train_segnet(net, s.images, s.masks, tc);
  ASSERT_EQ(curve.loss.size(), 30u);
  EXPECT_LT(curve.loss.back(), curve.loss.front());
  EXPECT_LT(curve.loss.back(), 0.5 * curve.loss.front());
}

TEST(Training, OverfitsEightImages) {
  const Split s = synthetic(8);
  SegNetConfig cfg;
  cfg.channels = {8, 16, 32, 64};
  SegNet net(cfg);
  SegTrainConfig tc;
  tc.epochs = 200;
  train_segnet(net, s.images, s.masks, tc);
  EXPECT_GT(pixel_accuracy(net, s), 0.97);
}

TEST(Training, IsDeterministic) {
  const Split s = synthetic(6);
  SegNetConfig cfg;
  cfg.channels = {4, 8, 16, 32};
  SegTrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 4;
  SegNet a(cfg), b(cfg);
  const TrainCurve ca = train_segnet(a, s.images, s.masks, tc);
  const TrainCurve cb = train_segnet(b, s.images, s.masks, tc);
  EXPECT_EQ(ca.loss, cb.loss);
  EXPECT_EQ(a.forward(s.images[0]).prob_map, b.forward(s.images[0]).prob_map);
}
