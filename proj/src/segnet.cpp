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

#include "swapgraph/segnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "swapgraph/error.hpp"
#include "swapgraph/rng.hpp"

namespace swapgraph {

void SegNetConfig::validate() const {
  require(levels() >= 1, ErrorCode::InvalidArgument, "segnet needs at least one level");
  require(input_channels >= 1, ErrorCode::InvalidArgument, "input_channels must be >= 1");
  require(encoder_convs >= 1, ErrorCode::InvalidArgument, "encoder_convs must be >= 1");
  require(swap_key >= 0, ErrorCode::InvalidArgument, "swap_key must be >= 0");
  require(group_size >= 0, ErrorCode::InvalidArgument, "group_size must be >= 0");
  for (int c : channels)
    require(c >= 2, ErrorCode::InvalidArgument, "every level needs >= 2 channels");
  require(side >= 1 && side % (1 << (levels() - 1)) == 0, ErrorCode::InvalidArgument,
          "side " + std::to_string(side) + " is not divisible by 2^(levels-1)");
}

std::vector<std::vector<double>*> parameter_arrays(SegNetParams& p, SwapMode mode) {
  std::vector<std::vector<double>*> out;
  auto conv = [&out](ConvParams& c) {
    out.push_back(&c.weights);
    if (c.has_bias) out.push_back(&c.bias);
  };
  for (auto& e : p.enc) {
    for (auto& c : e.convs) conv(c);
    if (mode == SwapMode::SwapNN) out.push_back(&e.scale.weights);
  }
  const int levels = static_cast<int>(p.dec.size());
  for (int l = 0; l < levels; ++l) {
    auto& d = p.dec[static_cast<std::size_t>(l)];
    if (l + 1 < levels) conv(d.proj);
    conv(d.conv);
    conv(d.head);
  }
  return out;
}

namespace {

SegNetParams init_params(const SegNetConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int L = cfg.levels();
  SegNetParams p;
  p.enc.resize(static_cast<std::size_t>(L));
  p.dec.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    auto& e = p.enc[static_cast<std::size_t>(l)];
    const int c = cfg.channels[static_cast<std::size_t>(l)];
    int c_in = l == 0 ? cfg.input_channels : cfg.channels[static_cast<std::size_t>(l - 1)];
    for (int k = 0; k < cfg.encoder_convs; ++k) {
      e.convs.push_back(ConvParams::random(c, c_in, 3, true, rng));
      c_in = c;
    }
    e.perm = cfg.mode == SwapMode::NoSwap ? SwapPermutation::identity(c)
                                          : build_swap_permutation({cfg.swap_key, c});
    if (cfg.mode == SwapMode::SwapNN) {
      const int g = cfg.group_size > 0 ? cfg.group_size : SwapNNParams::default_group_size(c);
      e.scale = SwapNNParams::make(c, g, 1.0);
    }
  }
  for (int l = 0; l < L; ++l) {
    auto& d = p.dec[static_cast<std::size_t>(l)];
    const int c = cfg.channels[static_cast<std::size_t>(l)];
    if (l + 1 < L) d.proj = ConvParams::random(c, cfg.channels[static_cast<std::size_t>(l + 1)], 1, true, rng);
    d.conv = ConvParams::random(c, c, 3, true, rng);
    d.head = ConvParams::random(1, c, 1, true, rng);
  }
  return p;
}

void accumulate(ConvParams& dst, const ConvParams& src) {
  for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights[i] += src.weights[i];
  for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += src.bias[i];
}

Tensor4 apply_variant(const EncoderLevel& e, SwapMode mode, const Tensor4& x) {
  switch (mode) {
    case SwapMode::NoSwap: return x;
    case SwapMode::Swap: return swap_forward(x, e.perm);
    case SwapMode::SwapNN: return swapnn_forward(x, e.perm, e.scale);
  }
  return x;
}

Tensor4 upsample_times(Tensor4 t, int times) {
  for (int i = 0; i < times; ++i) t = upsample2(t);
  return t;
}

}  // namespace

SegNet::SegNet(SegNetConfig cfg) : cfg_(std::move(cfg)), params_(init_params(cfg_)) {}

SegNet::SegNet(SegNetConfig cfg, SegNetParams params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  const SegNetParams ref = init_params(cfg_);
  require(params_.enc.size() == ref.enc.size() && params_.dec.size() == ref.dec.size(),
          ErrorCode::Shape, "segnet parameters do not match the configuration");
  SegNetParams copy = params_;
  SegNetParams ref_copy = ref;
  auto a = parameter_arrays(copy, cfg_.mode);
  auto b = parameter_arrays(ref_copy, cfg_.mode);
  require(a.size() == b.size(), ErrorCode::Shape, "segnet parameter layout mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    require(a[i]->size() == b[i]->size(), ErrorCode::Shape,
            "segnet parameter array " + std::to_string(i) + " has the wrong length");
  for (std::size_t l = 0; l < ref.enc.size(); ++l)
    require(params_.enc[l].perm == ref.enc[l].perm, ErrorCode::Shape,
            "segnet permutation table does not match the configured key");
}

SideOutputs SegNet::forward(const Tensor4& x, SegNetTrace* trace) const {
  require(x.c() == cfg_.input_channels && x.h() == cfg_.side && x.w() == cfg_.side,
          ErrorCode::Shape,
          "segnet expects input (n, " + std::to_string(cfg_.input_channels) + ", " +
              std::to_string(cfg_.side) + ", " + std::to_string(cfg_.side) + "), got " +
              x.shape().str());
  const int L = cfg_.levels();
  SegNetTrace local;
  SegNetTrace& t = trace ? *trace : local;
  t.enc.assign(static_cast<std::size_t>(L), {});
  t.enc_out.assign(static_cast<std::size_t>(L), Tensor4{});
  t.dec.assign(static_cast<std::size_t>(L), {});

  Tensor4 a = x;
  for (int l = 0; l < L; ++l) {
    const auto& e = params_.enc[static_cast<std::size_t>(l)];
    auto& te = t.enc[static_cast<std::size_t>(l)];
    if (l > 0) a = downsample2(t.enc_out[static_cast<std::size_t>(l - 1)]);
    for (const auto& conv : e.convs) {
      te.conv_in.push_back(a);
      te.pre_relu.push_back(conv2d_forward(a, conv));
      a = relu_forward(te.pre_relu.back());
    }
    te.pre_swap = a;
    t.enc_out[static_cast<std::size_t>(l)] = apply_variant(e, cfg_.mode, a);
  }

  for (int l = L - 1; l >= 0; --l) {
    const auto& d = params_.dec[static_cast<std::size_t>(l)];
    auto& td = t.dec[static_cast<std::size_t>(l)];
    if (l == L - 1) {
      td.summed = t.enc_out[static_cast<std::size_t>(l)];
    } else {
      td.up = upsample2(t.dec[static_cast<std::size_t>(l + 1)].out);
      td.summed = conv2d_forward(td.up, d.proj);
      add_inplace(td.summed, t.enc_out[static_cast<std::size_t>(l)]);
    }
    td.pre_relu = conv2d_forward(td.summed, d.conv);
    td.out = relu_forward(td.pre_relu);
  }

  SideOutputs out;
  for (int l = 0; l < L; ++l) {
    const auto& td = t.dec[static_cast<std::size_t>(l)];
    out.features.push_back(td.out);
    Tensor4 logits = conv2d_forward(td.out, params_.dec[static_cast<std::size_t>(l)].head);
    out.side_probs.push_back(sigmoid_forward(upsample_times(std::move(logits), l)));
  }
  out.prob_map = out.side_probs.front();
  return out;
}

SegNetParams SegNet::zero_grads() const {
  SegNetParams g = params_;
  for (auto* arr : parameter_arrays(g, SwapMode::SwapNN))
    std::fill(arr->begin(), arr->end(), 0.0);
  return g;
}

SegNetParams SegNet::backward(const SegNetTrace& t,
                              std::span<const Tensor4> grad_side_logits) const {
  const int L = cfg_.levels();
  require(static_cast<int>(grad_side_logits.size()) == L && static_cast<int>(t.dec.size()) == L,
          ErrorCode::InvalidArgument, "segnet backward: one gradient per level required");
  SegNetParams grads = zero_grads();
  const int n = t.dec.front().out.n();

  std::vector<Tensor4> gd;
  for (int l = 0; l < L; ++l) gd.push_back(Tensor4::zeros_like(t.dec[static_cast<std::size_t>(l)].out));
  for (int l = 0; l < L; ++l) {
    Tensor4 g = grad_side_logits[static_cast<std::size_t>(l)];
    require(g.shape() == Shape4{n, 1, cfg_.side, cfg_.side}, ErrorCode::Shape,
            "segnet backward: side gradient has shape " + g.shape().str());
    for (int j = 1; j <= l; ++j)
      g = upsample2_backward(g, Shape4{n, 1, cfg_.side >> j, cfg_.side >> j});
    const auto& td = t.dec[static_cast<std::size_t>(l)];
    ConvGrads cg = conv2d_backward(td.out, params_.dec[static_cast<std::size_t>(l)].head, g);
    accumulate(grads.dec[static_cast<std::size_t>(l)].head, cg.grad_p);
    add_inplace(gd[static_cast<std::size_t>(l)], cg.grad_x);
  }

  std::vector<Tensor4> ge;
  for (int l = 0; l < L; ++l) ge.push_back(Tensor4::zeros_like(t.enc_out[static_cast<std::size_t>(l)]));
  for (int l = 0; l < L; ++l) {
    const auto& td = t.dec[static_cast<std::size_t>(l)];
    const auto& d = params_.dec[static_cast<std::size_t>(l)];
    auto& gdl = grads.dec[static_cast<std::size_t>(l)];
    Tensor4 g = relu_backward(td.pre_relu, gd[static_cast<std::size_t>(l)]);
    ConvGrads cg = conv2d_backward(td.summed, d.conv, g);
    accumulate(gdl.conv, cg.grad_p);
    add_inplace(ge[static_cast<std::size_t>(l)], cg.grad_x);
    if (l + 1 < L) {
      ConvGrads pg = conv2d_backward(td.up, d.proj, cg.grad_x);
      accumulate(gdl.proj, pg.grad_p);
      add_inplace(gd[static_cast<std::size_t>(l + 1)],
                  upsample2_backward(pg.grad_x, t.dec[static_cast<std::size_t>(l + 1)].out.shape()));
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    const auto& e = params_.enc[static_cast<std::size_t>(l)];
    const auto& te = t.enc[static_cast<std::size_t>(l)];
    auto& gel = grads.enc[static_cast<std::size_t>(l)];
    Tensor4 g = std::move(ge[static_cast<std::size_t>(l)]);
    switch (cfg_.mode) {
      case SwapMode::NoSwap: break;
      case SwapMode::Swap: g = swap_backward(g, e.perm); break;
      case SwapMode::SwapNN: {
        SwapNNGrads sg = swapnn_backward(te.pre_swap, e.perm, e.scale, g);
        for (std::size_t i = 0; i < sg.grad_weights.size(); ++i)
          gel.scale.weights[i] += sg.grad_weights[i];
        g = std::move(sg.grad_x);
        break;
      }
    }
    for (int k = static_cast<int>(e.convs.size()) - 1; k >= 0; --k) {
      g = relu_backward(te.pre_relu[static_cast<std::size_t>(k)], g);
      ConvGrads cg = conv2d_backward(te.conv_in[static_cast<std::size_t>(k)],
                                     e.convs[static_cast<std::size_t>(k)], g);
      accumulate(gel.convs[static_cast<std::size_t>(k)], cg.grad_p);
      g = std::move(cg.grad_x);
    }
    if (l > 0)
      add_inplace(ge[static_cast<std::size_t>(l - 1)],
                  downsample2_backward(t.enc_out[static_cast<std::size_t>(l - 1)], g));
  }
  return grads;
}

std::size_t SegNet::param_count() const {
  SegNetParams copy = params_;
  std::size_t n = 0;
  for (auto* arr : parameter_arrays(copy, cfg_.mode)) n += arr->size();
  return n;
}

SideBce side_bce(const SideOutputs& out, const Tensor4& mask) {
  require(!out.side_probs.empty(), ErrorCode::InvalidArgument, "no side outputs");
  require(mask.shape() == out.prob_map.shape(), ErrorCode::Shape,
          "mask shape " + mask.shape().str() + " does not match prob map " +
              out.prob_map.shape().str());
  for (double v : mask.data())
    require(v == 0.0 || v == 1.0, ErrorCode::InvalidArgument, "target mask must be binary");
  const double terms = static_cast<double>(out.side_probs.size());
  const double pixels = static_cast<double>(mask.size());
  SideBce res;
  auto y = mask.data();
  for (const auto& probs : out.side_probs) {
    Tensor4 g(probs.shape());
    auto p = probs.data();
    auto gs = g.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double pc = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
      sum -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
      // d/dlogit of the unclamped BCE
      gs[i] = (p[i] - y[i]) / (pixels * terms);
    }
    res.loss += sum / pixels / terms;
    res.grad_side_logits.push_back(std::move(g));
  }
  return res;
}

SegLossResult seg_loss(const SegNet& net, const Tensor4& x, const Tensor4& mask) {
  SegNetTrace trace;
  SegLossResult res;
  res.outputs = net.forward(x, &trace);
  SideBce bce = side_bce(res.outputs, mask);
  res.loss = bce.loss;
  res.grads = net.backward(trace, bce.grad_side_logits);
  return res;
}

double epoch_learning_rate(double lr, double decay, DecayMode mode, int epoch) {
  if (mode == DecayMode::Weight) return lr;
  return lr * std::pow(1.0 - decay, static_cast<double>(epoch));
}

TrainCurve train_segnet(SegNet& net, std::span<const Tensor4> images,
                        std::span<const Tensor4> masks, const SegTrainConfig& cfg) {
  require(!images.empty(), ErrorCode::InvalidArgument, "training set is empty");
  require(images.size() == masks.size(), ErrorCode::InvalidArgument,
          "image and mask counts differ");
  require(cfg.batch_size >= 1 && cfg.epochs >= 0, ErrorCode::InvalidArgument,
          "batch_size must be >= 1 and epochs >= 0");
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.decay_mode == DecayMode::Weight ? cfg.decay : 0.0;
  Adam adam(acfg);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainCurve curve;
  const SwapMode mode = net.config().mode;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch_learning_rate(cfg.lr, cfg.decay, cfg.decay_mode, epoch);
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Tensor4> xs;
      std::vector<Tensor4> ms;
      for (std::size_t i = start; i < end; ++i) {
        xs.push_back(images[order[i]]);
        ms.push_back(masks[order[i]]);
      }
      SegLossResult res = seg_loss(net, concat_batch(xs), concat_batch(ms));
      if (!std::isfinite(res.loss)) {
        std::ostringstream os;
        os << "non-finite segmentation loss at epoch " << epoch << ", batch starting at "
           << start << " (lr " << lr << ")";
        fail(ErrorCode::Numeric, os.str());
      }
      ParamRefs refs;
      auto values = parameter_arrays(net.params(), mode);
      auto grads = parameter_arrays(res.grads, mode);
      for (std::size_t k = 0; k < values.size(); ++k) refs.add(*values[k], *grads[k]);
      adam.step(refs, lr);
      total += res.loss * static_cast<double>(end - start);
    }
    curve.loss.push_back(total / static_cast<double>(images.size()));
    curve.lr.push_back(lr);
    if (cfg.on_epoch) cfg.on_epoch(epoch, curve.loss.back(), lr);
  }
  return curve;
}

}  // namespace swapgraph
