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

#include "swapgraph/swap.hpp"

#include <algorithm>
#include "json.hpp"

#include "swapgraph/error.hpp"

namespace swapgraph {

const char* to_string(SwapMode mode) {
  switch (mode) {
    case SwapMode::NoSwap: return "noswap";
    case SwapMode::Swap: return "swap";
    case SwapMode::SwapNN: return "swapnn";
  }
  return "?";
}

SwapMode swap_mode_from_string(const std::string& name) {
  if (name == "noswap") return SwapMode::NoSwap;
  if (name == "swap") return SwapMode::Swap;
  if (name == "swapnn") return SwapMode::SwapNN;
  fail(ErrorCode::InvalidArgument,
       "unknown swap mode '" + name + "' (expected noswap, swap or swapnn)");
}

SwapPermutation::SwapPermutation(std::vector<int> table) : table_(std::move(table)) {
  const int c = size();
  std::vector<bool> seen(table_.size(), false);
  for (int i = 0; i < c; ++i) {
    const int j = table_[static_cast<std::size_t>(i)];
    require(j >= 0 && j < c, ErrorCode::InvalidArgument,
            "permutation entry " + std::to_string(i) + " out of range");
    require(!seen[static_cast<std::size_t>(j)], ErrorCode::InvalidArgument,
            "permutation is not a bijection (duplicate " + std::to_string(j) + ")");
    seen[static_cast<std::size_t>(j)] = true;
    require(table_[static_cast<std::size_t>(j)] == i, ErrorCode::InvalidArgument,
            "permutation is not an involution at " + std::to_string(i));
  }
}

SwapPermutation SwapPermutation::identity(int channels) {
  std::vector<int> t(static_cast<std::size_t>(channels));
  for (int i = 0; i < channels; ++i) t[static_cast<std::size_t>(i)] = i;
  return SwapPermutation(std::move(t));
}

bool SwapPermutation::is_identity() const {
  for (int i = 0; i < size(); ++i)
    if (table_[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

SwapPermutation build_swap_permutation(const SwapConfig& cfg) {
  require(cfg.channels >= 2, ErrorCode::InvalidArgument,
          "swap needs at least 2 channels, got " + std::to_string(cfg.channels));
  require(cfg.key >= 0, ErrorCode::InvalidArgument, "swap key must be non-negative");
  const int c = cfg.channels;
  const int half = c / 2;
  std::vector<int> perm(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = half; i < c; ++i) {
    if (i % 2 != 0) continue;
    const int j = xor_partner(i, cfg.key);
    if (j < half || j >= c || j == i) continue;
    auto& pi = perm[static_cast<std::size_t>(i)];
    auto& pj = perm[static_cast<std::size_t>(j)];
    if (pi != i || pj != j) continue;  // even key: partner already paired
    pi = j;
    pj = i;
  }
  return SwapPermutation(std::move(perm));
}

std::string permutation_to_json(const SwapPermutation& perm) {
  return nlohmann::json(perm.table()).dump();
}

SwapPermutation permutation_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("permutation JSON: ") + e.what());
  }
  require(j.is_array(), ErrorCode::Parse, "permutation JSON must be an array");
  std::vector<int> table;
  for (const auto& v : j) {
    require(v.is_number_integer(), ErrorCode::Parse, "permutation entries must be integers");
    table.push_back(v.get<int>());
  }
  return SwapPermutation(std::move(table));
}

namespace {
void check_channels(const Tensor4& x, const SwapPermutation& perm, const char* op) {
  require(x.c() == perm.size(), ErrorCode::Shape,
          std::string(op) + ": tensor has " + std::to_string(x.c()) +
              " channels but permutation covers " + std::to_string(perm.size()));
}
}  // namespace

Tensor4 swap_forward(const Tensor4& x, const SwapPermutation& perm) {
  check_channels(x, perm, "swap_forward");
  Tensor4 out(x.shape());
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      auto src = x.plane(n, perm[c]);
      std::copy(src.begin(), src.end(), out.plane(n, c).begin());
    }
  return out;
}

Tensor4 swap_backward(const Tensor4& grad_out, const SwapPermutation& perm) {
  // perm is an involution, so the inverse permutation is perm itself.
  check_channels(grad_out, perm, "swap_backward");
  return swap_forward(grad_out, perm);
}

int SwapNNParams::default_group_size(int channels) { return std::max(1, channels / 4); }

SwapNNParams SwapNNParams::make(int channels, int group_size, double init) {
  require(channels >= 1 && group_size >= 1, ErrorCode::InvalidArgument,
          "SwapNN needs channels >= 1 and group_size >= 1");
  SwapNNParams p;
  p.channels = channels;
  p.group_size = group_size;
  p.weights.assign(static_cast<std::size_t>((channels + group_size - 1) / group_size), init);
  return p;
}

namespace {
void check_groups(const Tensor4& x, const SwapPermutation& perm, const SwapNNParams& p,
                  const char* op) {
  check_channels(x, perm, op);
  require(p.channels == x.c() && p.group_size >= 1 &&
              p.group_count() == (p.channels + p.group_size - 1) / p.group_size,
          ErrorCode::Shape, std::string(op) + ": group table does not cover the channels");
}
}  // namespace

Tensor4 swapnn_forward(const Tensor4& x, const SwapPermutation& perm, const SwapNNParams& p) {
  check_groups(x, perm, p, "swapnn_forward");
  Tensor4 out(x.shape());
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const double wgt = p.weights[static_cast<std::size_t>(p.group_of(c))];
      auto src = x.plane(n, perm[c]);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * wgt;
    }
  return out;
}

SwapNNGrads swapnn_backward(const Tensor4& x, const SwapPermutation& perm,
                            const SwapNNParams& p, const Tensor4& grad_out) {
  check_groups(x, perm, p, "swapnn_backward");
  require(grad_out.shape() == x.shape(), ErrorCode::Shape,
          "swapnn_backward: grad_out shape mismatch");
  SwapNNGrads g{Tensor4::zeros_like(x), std::vector<double>(p.weights.size(), 0.0)};
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const auto grp = static_cast<std::size_t>(p.group_of(c));
      const double wgt = p.weights[grp];
      auto go = grad_out.plane(n, c);
      auto src = x.plane(n, perm[c]);
      auto dx = g.grad_x.plane(n, perm[c]);
      double acc = 0.0;
      for (std::size_t i = 0; i < go.size(); ++i) {
        dx[i] += wgt * go[i];
        acc += src[i] * go[i];
      }
      g.grad_weights[grp] += acc;
    }
  return g;
}

SwapBlock SwapBlock::make(SwapMode mode, int channels, int key, bool mix_bias, Rng& rng) {
  SwapBlock b;
  b.mode = mode;
  b.perm = mode == SwapMode::NoSwap ? SwapPermutation::identity(channels)
                                    : build_swap_permutation({key, channels});
  if (mode == SwapMode::SwapNN) {
    require(channels % 2 == 0, ErrorCode::InvalidArgument,
            "SwapNN block halves channels and needs an even channel count");
    b.scale = SwapNNParams::make(channels, SwapNNParams::default_group_size(channels));
    b.mix = ConvParams::random(channels / 2, channels, 1, mix_bias, rng);
  } else {
    b.mix = ConvParams::random(channels, channels, 1, mix_bias, rng);
  }
  return b;
}

namespace {
Tensor4 swap_variant(const Tensor4& x, const SwapBlock& block) {
  switch (block.mode) {
    case SwapMode::NoSwap: return x;
    case SwapMode::Swap: return swap_forward(x, block.perm);
    case SwapMode::SwapNN: return swapnn_forward(x, block.perm, block.scale);
  }
  return x;
}
}  // namespace

Tensor4 swap_block_forward(const Tensor4& x, const SwapBlock& block) {
  require(block.mix.kh == 1 && block.mix.kw == 1, ErrorCode::InvalidArgument,
          "swap block mixing must be 1x1");
  return conv2d_forward(swap_variant(x, block), block.mix, 0);
}

SwapBlockGrads swap_block_backward(const Tensor4& x, const SwapBlock& block,
                                   const Tensor4& grad_out) {
  const Tensor4 mid = swap_variant(x, block);
  ConvGrads cg = conv2d_backward(mid, block.mix, grad_out, 0);
  SwapBlockGrads g{Tensor4(x.shape()), {}, std::move(cg.grad_p)};
  switch (block.mode) {
    case SwapMode::NoSwap: g.grad_x = std::move(cg.grad_x); break;
    case SwapMode::Swap: g.grad_x = swap_backward(cg.grad_x, block.perm); break;
    case SwapMode::SwapNN: {
      SwapNNGrads sg = swapnn_backward(x, block.perm, block.scale, cg.grad_x);
      g.grad_x = std::move(sg.grad_x);
      g.grad_scale = std::move(sg.grad_weights);
      break;
    }
  }
  return g;
}

std::size_t param_count(const SwapBlock& block) {
  std::size_t n = param_count(block.mix);
  if (block.mode == SwapMode::SwapNN) n += param_count(block.scale);
  return n;
}

}  // namespace swapgraph
