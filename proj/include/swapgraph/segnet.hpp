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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "swapgraph/ops.hpp"
#include "swapgraph/optim.hpp"
#include "swapgraph/swap.hpp"
#include "swapgraph/tensor.hpp"

namespace swapgraph {

// Plain U-shaped backbone. Encoder level l runs [conv3x3 -> relu] x
// encoder_convs followed by the swap variant; the decoder upsamples, projects
// with a 1x1 conv, adds the skip and applies conv3x3 -> relu. Every decoder
// level has a 1x1 head producing side logits; level 0's head is the main map.
struct SegNetConfig {
  int side = 64;
  int input_channels = 1;
  std::vector<int> channels = {16, 32, 64, 128};
  SwapMode mode = SwapMode::Swap;
  int swap_key = 5;
  int group_size = 0;  // SwapNN group size; 0 selects max(1, c/4) per level
  int encoder_convs = 1;
  std::uint64_t seed = 7;

  int levels() const { return static_cast<int>(channels.size()); }
  int level_side(int level) const { return side >> level; }
  void validate() const;
  bool operator==(const SegNetConfig&) const = default;
};

struct EncoderLevel {
  std::vector<ConvParams> convs;
  SwapPermutation perm;
  SwapNNParams scale;  // populated in SwapNN mode only
};

struct DecoderLevel {
  ConvParams proj;  // 1x1 from level + 1; empty at the bottom level
  ConvParams conv;
  ConvParams head;
};

struct SegNetParams {
  std::vector<EncoderLevel> enc;
  std::vector<DecoderLevel> dec;
};

// Every trainable array in a fixed traversal order.
std::vector<std::vector<double>*> parameter_arrays(SegNetParams& p, SwapMode mode);

struct SideOutputs {
  Tensor4 prob_map;                 // (n, 1, side, side), sigmoid of level-0 logits
  std::vector<Tensor4> features;    // decoder maps, level l at side >> l
  std::vector<Tensor4> side_probs;  // full-resolution sigmoid per level; [0] == prob_map
};

// Intermediate values kept for the backward pass.
struct SegNetTrace {
  struct Enc {
    std::vector<Tensor4> conv_in;
    std::vector<Tensor4> pre_relu;
    Tensor4 pre_swap;
  };
  struct Dec {
    Tensor4 up;      // upsampled d[l + 1] (absent at the bottom)
    Tensor4 summed;  // conv input
    Tensor4 pre_relu;
    Tensor4 out;
  };
  std::vector<Enc> enc;
  std::vector<Tensor4> enc_out;
  std::vector<Dec> dec;
};

class SegNet {
 public:
  explicit SegNet(SegNetConfig cfg);
  SegNet(SegNetConfig cfg, SegNetParams params);

  const SegNetConfig& config() const { return cfg_; }
  const SegNetParams& params() const { return params_; }
  SegNetParams& params() { return params_; }

  SideOutputs forward(const Tensor4& x, SegNetTrace* trace = nullptr) const;

  // Gradients of a loss whose derivative w.r.t. the full-resolution side
  // logits is `grad_side_logits` (one tensor per level).
  SegNetParams backward(const SegNetTrace& trace,
                        std::span<const Tensor4> grad_side_logits) const;

  SegNetParams zero_grads() const;
  std::size_t param_count() const;

 private:
  SegNetConfig cfg_;
  SegNetParams params_;
};

inline constexpr double kProbClamp = 1e-7;

struct SideBce {
  double loss = 0.0;
  std::vector<Tensor4> grad_side_logits;
};

// Mean over levels of the per-pixel binary cross-entropy of each side output
// against `mask` (deep supervision, equal weights). Probabilities are clamped
// to [1e-7, 1 - 1e-7] inside the log.
SideBce side_bce(const SideOutputs& out, const Tensor4& mask);

struct SegLossResult {
  double loss = 0.0;
  SegNetParams grads;
  SideOutputs outputs;
};

SegLossResult seg_loss(const SegNet& net, const Tensor4& x, const Tensor4& mask);

enum class DecayMode { LearningRate, Weight };

struct SegTrainConfig {
  int epochs = 40;
  int batch_size = 8;
  double lr = 1e-3;
  double decay = 1e-4;
  DecayMode decay_mode = DecayMode::LearningRate;
  std::uint64_t seed = 42;
  std::function<void(int epoch, double loss, double lr)> on_epoch;
};

struct TrainCurve {
  std::vector<double> loss;
  std::vector<double> lr;
};

// Learning rate for `epoch` under multiplicative decay.
double epoch_learning_rate(double lr, double decay, DecayMode mode, int epoch);

TrainCurve train_segnet(SegNet& net, std::span<const Tensor4> images,
                        std::span<const Tensor4> masks, const SegTrainConfig& cfg);

}  // namespace swapgraph
