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

#include <cstddef>
#include <string>
#include <vector>

#include "swapgraph/ops.hpp"
#include "swapgraph/tensor.hpp"

namespace swapgraph {

enum class SwapMode { NoSwap, Swap, SwapNN };

const char* to_string(SwapMode mode);
SwapMode swap_mode_from_string(const std::string& name);

struct SwapConfig {
  int key = 5;  // XOR key selecting each channel's exchange partner
  int channels = 2;
};

inline int xor_partner(int channel, int key) { return channel ^ key; }

// Channel permutation produced by the XOR exchange rule. Always an
// involution; the lower floor(c/2) channels are fixed points.
class SwapPermutation {
 public:
  SwapPermutation() = default;
  // Validates bijection + involution.
  explicit SwapPermutation(std::vector<int> table);

  static SwapPermutation identity(int channels);

  int operator[](int i) const { return table_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(table_.size()); }
  const std::vector<int>& table() const { return table_; }
  bool is_identity() const;

  bool operator==(const SwapPermutation&) const = default;

 private:
  std::vector<int> table_;
};

// Channels i >= floor(c/2) with i even are paired with i ^ key when the
// partner is also in the upper half and in range. Everything else maps to
// itself, so degenerate keys (e.g. 0) give the identity.
SwapPermutation build_swap_permutation(const SwapConfig& cfg);

std::string permutation_to_json(const SwapPermutation& perm);
SwapPermutation permutation_from_json(const std::string& text);

// out[:, i] = x[:, perm[i]]
Tensor4 swap_forward(const Tensor4& x, const SwapPermutation& perm);
Tensor4 swap_backward(const Tensor4& grad_out, const SwapPermutation& perm);

// One trainable scalar shared by each group of `group_size` consecutive
// channels.
struct SwapNNParams {
  int channels = 0;
  int group_size = 1;
  std::vector<double> weights;

  static SwapNNParams make(int channels, int group_size, double init = 1.0);
  // group_size = max(1, c / 4)
  static int default_group_size(int channels);

  int group_of(int channel) const { return channel / group_size; }
  int group_count() const { return static_cast<int>(weights.size()); }

  bool operator==(const SwapNNParams&) const = default;
};

struct SwapNNGrads {
  Tensor4 grad_x;
  std::vector<double> grad_weights;
};

// out[:, i] = x[:, perm[i]] * weights[group(i)]; unswapped lower-half
// channels are scaled too.
Tensor4 swapnn_forward(const Tensor4& x, const SwapPermutation& perm, const SwapNNParams& p);
SwapNNGrads swapnn_backward(const Tensor4& x, const SwapPermutation& perm,
                            const SwapNNParams& p, const Tensor4& grad_out);

// Swap variant followed by 1x1 channel mixing. Swap keeps the channel
// count; SwapNN halves it.
struct SwapBlock {
  SwapMode mode = SwapMode::Swap;
  SwapPermutation perm;
  SwapNNParams scale;  // used only in SwapNN mode
  ConvParams mix;

  static SwapBlock make(SwapMode mode, int channels, int key, bool mix_bias, Rng& rng);
};

struct SwapBlockGrads {
  Tensor4 grad_x;
  std::vector<double> grad_scale;
  ConvParams grad_mix;
};

Tensor4 swap_block_forward(const Tensor4& x, const SwapBlock& block);
SwapBlockGrads swap_block_backward(const Tensor4& x, const SwapBlock& block,
                                   const Tensor4& grad_out);

inline std::size_t param_count(const SwapPermutation&) { return 0; }
inline std::size_t param_count(const SwapNNParams& p) { return p.weights.size(); }
std::size_t param_count(const SwapBlock& block);

}  // namespace swapgraph
