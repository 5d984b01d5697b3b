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
#include <vector>

#include "swapgraph/rng.hpp"
#include "swapgraph/tensor.hpp"

namespace swapgraph {

// Convolution weights laid out (c_out, c_in, kh, kw). Only 1x1 and 3x3
// kernels are supported.
struct ConvParams {
  int c_out = 0;
  int c_in = 0;
  int kh = 1;
  int kw = 1;
  bool has_bias = true;
  std::vector<double> weights;
  std::vector<double> bias;

  static ConvParams zeros(int c_out, int c_in, int kernel, bool has_bias = true);
  // He-uniform initialisation, bias zero.
  static ConvParams random(int c_out, int c_in, int kernel, bool has_bias, Rng& rng);
  // 1x1 identity mixing (c_out == c_in).
  static ConvParams identity(int channels, bool has_bias = true);

  double& w(int o, int i, int ky, int kx) {
    return weights[((static_cast<std::size_t>(o) * c_in + i) * kh + ky) * kw + kx];
  }
  double w(int o, int i, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(o) * c_in + i) * kh + ky) * kw + kx];
  }
  int same_padding() const { return (kh - 1) / 2; }

  bool operator==(const ConvParams&) const = default;
};

struct ConvGrads {
  Tensor4 grad_x;
  ConvParams grad_p;
};

// Cross-correlation with stride 1 and symmetric zero padding; pass
// padding = -1 for "same" output size.
Tensor4 conv2d_forward(const Tensor4& x, const ConvParams& p, int padding = -1);
ConvGrads conv2d_backward(const Tensor4& x, const ConvParams& p,
                          const Tensor4& grad_out, int padding = -1);

Tensor4 relu_forward(const Tensor4& x);
// Subgradient at exactly 0 is 0.
Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out);

Tensor4 sigmoid_forward(const Tensor4& x);
Tensor4 sigmoid_backward(const Tensor4& y, const Tensor4& grad_out);
double sigmoid(double z);

// 2x2 max pool, stride 2. Ties resolve to the first element in row-major
// order within the window.
Tensor4 downsample2(const Tensor4& x);
Tensor4 downsample2_backward(const Tensor4& x, const Tensor4& grad_out);

// Bilinear 2x upsampling: output (Y, X) samples the input at (Y/2, X/2),
// clamped at the far border.
Tensor4 upsample2(const Tensor4& x);
Tensor4 upsample2_backward(const Tensor4& grad_out, const Shape4& input_shape);

std::size_t param_count(const ConvParams& p);

}  // namespace swapgraph
