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

#include "swapgraph/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "swapgraph/error.hpp"

namespace swapgraph {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void check_kernel(int k) {
  require(k == 1 || k == 3, ErrorCode::InvalidArgument,
          "only 1x1 and 3x3 kernels are supported, got " + std::to_string(k));
}

struct ConvGeometry {
  int padding;
  int ho;
  int wo;
};

ConvGeometry geometry(const Tensor4& x, const ConvParams& p, int padding) {
  check_kernel(p.kh);
  check_kernel(p.kw);
  require(x.c() == p.c_in, ErrorCode::Shape,
          "conv2d: input has " + std::to_string(x.c()) + " channels, kernel expects " +
              std::to_string(p.c_in));
  require(p.weights.size() == static_cast<std::size_t>(p.c_out) * p.c_in * p.kh * p.kw,
          ErrorCode::Shape, "conv2d: weight array has wrong length");
  require(!p.has_bias || p.bias.size() == static_cast<std::size_t>(p.c_out),
          ErrorCode::Shape, "conv2d: bias array has wrong length");
  if (padding < 0) padding = p.same_padding();
  const int ho = x.h() + 2 * padding - p.kh + 1;
  const int wo = x.w() + 2 * padding - p.kw + 1;
  require(ho >= 1 && wo >= 1, ErrorCode::Shape, "conv2d: output would be empty");
  return {padding, ho, wo};
}

// Unfolds sample n into a (c_in*kh*kw, ho*wo) column matrix.
void im2col(const Tensor4& x, int n, const ConvParams& p, const ConvGeometry& g,
            std::vector<double>& col) {
  const int H = x.h();
  const int W = x.w();
  const std::size_t P = static_cast<std::size_t>(g.ho) * g.wo;
  col.assign(static_cast<std::size_t>(p.c_in) * p.kh * p.kw * P, 0.0);
  std::size_t row = 0;
  for (int c = 0; c < p.c_in; ++c) {
    const auto plane = x.plane(n, c);
    for (int ky = 0; ky < p.kh; ++ky) {
      for (int kx = 0; kx < p.kw; ++kx, ++row) {
        double* dst = col.data() + row * P;
        for (int y = 0; y < g.ho; ++y) {
          const int sy = y + ky - g.padding;
          if (sy < 0 || sy >= H) continue;
          for (int xo = 0; xo < g.wo; ++xo) {
            const int sx = xo + kx - g.padding;
            if (sx < 0 || sx >= W) continue;
            dst[static_cast<std::size_t>(y) * g.wo + xo] =
                plane[static_cast<std::size_t>(sy) * W + sx];
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& col, const ConvParams& p,
                const ConvGeometry& g, Tensor4& dx, int n) {
  const int H = dx.h();
  const int W = dx.w();
  const std::size_t P = static_cast<std::size_t>(g.ho) * g.wo;
  std::size_t row = 0;
  for (int c = 0; c < p.c_in; ++c) {
    auto plane = dx.plane(n, c);
    for (int ky = 0; ky < p.kh; ++ky) {
      for (int kx = 0; kx < p.kw; ++kx, ++row) {
        const double* src = col.data() + row * P;
        for (int y = 0; y < g.ho; ++y) {
          const int sy = y + ky - g.padding;
          if (sy < 0 || sy >= H) continue;
          for (int xo = 0; xo < g.wo; ++xo) {
            const int sx = xo + kx - g.padding;
            if (sx < 0 || sx >= W) continue;
            plane[static_cast<std::size_t>(sy) * W + sx] +=
                src[static_cast<std::size_t>(y) * g.wo + xo];
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvParams& p, const ConvGeometry& g) {
  return p.kh == 1 && p.kw == 1 && g.padding == 0;
}

}  // namespace

ConvParams ConvParams::zeros(int c_out, int c_in, int kernel, bool has_bias) {
  check_kernel(kernel);
  require(c_out >= 1 && c_in >= 1, ErrorCode::InvalidArgument,
          "conv channel counts must be >= 1");
  ConvParams p;
  p.c_out = c_out;
  p.c_in = c_in;
  p.kh = kernel;
  p.kw = kernel;
  p.has_bias = has_bias;
  p.weights.assign(static_cast<std::size_t>(c_out) * c_in * kernel * kernel, 0.0);
  if (has_bias) p.bias.assign(static_cast<std::size_t>(c_out), 0.0);
  return p;
}

ConvParams ConvParams::random(int c_out, int c_in, int kernel, bool has_bias, Rng& rng) {
  ConvParams p = zeros(c_out, c_in, kernel, has_bias);
  const double fan_in = static_cast<double>(c_in) * kernel * kernel;
  const double bound = std::sqrt(6.0 / fan_in);
  for (auto& v : p.weights) v = rng.uniform(-bound, bound);
  return p;
}

ConvParams ConvParams::identity(int channels, bool has_bias) {
  ConvParams p = zeros(channels, channels, 1, has_bias);
  for (int i = 0; i < channels; ++i) p.w(i, i, 0, 0) = 1.0;
  return p;
}

Tensor4 conv2d_forward(const Tensor4& x, const ConvParams& p, int padding) {
  const ConvGeometry g = geometry(x, p, padding);
  Tensor4 out(Shape4{x.n(), p.c_out, g.ho, g.wo});
  const Eigen::Index K = static_cast<Eigen::Index>(p.c_in) * p.kh * p.kw;
  const Eigen::Index P = static_cast<Eigen::Index>(g.ho) * g.wo;
  ConstMatrixMap wmat(p.weights.data(), p.c_out, K);
  std::vector<double> col;
  for (int n = 0; n < x.n(); ++n) {
    MatrixMap omat(out.plane(n, 0).data(), p.c_out, P);
    if (is_pointwise(p, g)) {
      ConstMatrixMap xmat(x.plane(n, 0).data(), K, P);
      omat.noalias() = wmat * xmat;
    } else {
      im2col(x, n, p, g, col);
      ConstMatrixMap cmat(col.data(), K, P);
      omat.noalias() = wmat * cmat;
    }
    if (p.has_bias) {
      for (int o = 0; o < p.c_out; ++o) omat.row(o).array() += p.bias[o];
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor4& x, const ConvParams& p, const Tensor4& grad_out,
                          int padding) {
  const ConvGeometry g = geometry(x, p, padding);
  require(grad_out.shape() == Shape4{x.n(), p.c_out, g.ho, g.wo}, ErrorCode::Shape,
          "conv2d_backward: grad_out shape " + grad_out.shape().str() +
              " inconsistent with forward output");
  ConvGrads grads{Tensor4::zeros_like(x), p};
  std::fill(grads.grad_p.weights.begin(), grads.grad_p.weights.end(), 0.0);
  std::fill(grads.grad_p.bias.begin(), grads.grad_p.bias.end(), 0.0);
  const Eigen::Index K = static_cast<Eigen::Index>(p.c_in) * p.kh * p.kw;
  const Eigen::Index P = static_cast<Eigen::Index>(g.ho) * g.wo;
  ConstMatrixMap wmat(p.weights.data(), p.c_out, K);
  MatrixMap gw(grads.grad_p.weights.data(), p.c_out, K);
  std::vector<double> col;
  std::vector<double> dcol;
  for (int n = 0; n < x.n(); ++n) {
    ConstMatrixMap gomat(grad_out.plane(n, 0).data(), p.c_out, P);
    if (p.has_bias) {
      for (int o = 0; o < p.c_out; ++o) grads.grad_p.bias[o] += gomat.row(o).sum();
    }
    if (is_pointwise(p, g)) {
      ConstMatrixMap xmat(x.plane(n, 0).data(), K, P);
      gw.noalias() += gomat * xmat.transpose();
      MatrixMap dxmat(grads.grad_x.plane(n, 0).data(), K, P);
      dxmat.noalias() = wmat.transpose() * gomat;
    } else {
      im2col(x, n, p, g, col);
      ConstMatrixMap cmat(col.data(), K, P);
      gw.noalias() += gomat * cmat.transpose();
      dcol.assign(static_cast<std::size_t>(K * P), 0.0);
      MatrixMap dcmat(dcol.data(), K, P);
      dcmat.noalias() = wmat.transpose() * gomat;
      col2im_add(dcol, p, g, grads.grad_x, n);
    }
  }
  return grads;
}

Tensor4 relu_forward(const Tensor4& x) {
  Tensor4 out = x;
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out) {
  require(x.shape() == grad_out.shape(), ErrorCode::Shape, "relu_backward: shape mismatch");
  Tensor4 out = grad_out;
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i)
    if (!(xs[i] > 0.0)) os[i] = 0.0;
  return out;
}

double sigmoid(double z) {
  // Saturates strictly inside (0, 1).
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  double y;
  if (z >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    y = e / (1.0 + e);
  }
  return std::clamp(y, lo, hi);
}

Tensor4 sigmoid_forward(const Tensor4& x) {
  Tensor4 out = x;
  for (auto& v : out.data()) v = sigmoid(v);
  return out;
}

Tensor4 sigmoid_backward(const Tensor4& y, const Tensor4& grad_out) {
  require(y.shape() == grad_out.shape(), ErrorCode::Shape, "sigmoid_backward: shape mismatch");
  Tensor4 out = grad_out;
  auto ys = y.data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] *= ys[i] * (1.0 - ys[i]);
  return out;
}

Tensor4 downsample2(const Tensor4& x) {
  require(x.h() % 2 == 0 && x.w() % 2 == 0, ErrorCode::Shape,
          "downsample2 requires even spatial dims, got " + x.shape().str());
  Tensor4 out(Shape4{x.n(), x.c(), x.h() / 2, x.w() / 2});
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < out.h(); ++y)
        for (int xo = 0; xo < out.w(); ++xo) {
          const int sy = 2 * y;
          const int sx = 2 * xo;
          out(n, c, y, xo) = std::max({x(n, c, sy, sx), x(n, c, sy, sx + 1),
                                       x(n, c, sy + 1, sx), x(n, c, sy + 1, sx + 1)});
        }
  return out;
}

Tensor4 downsample2_backward(const Tensor4& x, const Tensor4& grad_out) {
  require(x.h() % 2 == 0 && x.w() % 2 == 0, ErrorCode::Shape,
          "downsample2_backward requires even spatial dims");
  require(grad_out.shape() == Shape4{x.n(), x.c(), x.h() / 2, x.w() / 2}, ErrorCode::Shape,
          "downsample2_backward: grad_out shape mismatch");
  Tensor4 dx = Tensor4::zeros_like(x);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < grad_out.h(); ++y)
        for (int xo = 0; xo < grad_out.w(); ++xo) {
          int by = 2 * y;
          int bx = 2 * xo;
          double best = x(n, c, by, bx);
          for (int dy = 0; dy < 2; ++dy)
            for (int dxo = 0; dxo < 2; ++dxo) {
              const double v = x(n, c, 2 * y + dy, 2 * xo + dxo);
              if (v > best) {
                best = v;
                by = 2 * y + dy;
                bx = 2 * xo + dxo;
              }
            }
          dx(n, c, by, bx) += grad_out(n, c, y, xo);
        }
  return dx;
}

namespace {

// Source rows/columns and the weight of the second one for output index i.
struct Tap {
  int lo;
  int hi;
  double frac;
};

Tap upsample_tap(int i, int extent) {
  const int lo = i / 2;
  const int hi = std::min(lo + 1, extent - 1);
  return {lo, hi, (i % 2) ? 0.5 : 0.0};
}

}  // namespace

Tensor4 upsample2(const Tensor4& x) {
  Tensor4 out(Shape4{x.n(), x.c(), 2 * x.h(), 2 * x.w()});
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const auto in = x.view(n, c);
      auto dst = out.plane(n, c);
      for (int y = 0; y < out.h(); ++y) {
        const Tap ty = upsample_tap(y, x.h());
        for (int xo = 0; xo < out.w(); ++xo) {
          const Tap tx = upsample_tap(xo, x.w());
          dst[static_cast<std::size_t>(y) * out.w() + xo] =
              (1 - ty.frac) * (1 - tx.frac) * in.at(ty.lo, tx.lo) +
              (1 - ty.frac) * tx.frac * in.at(ty.lo, tx.hi) +
              ty.frac * (1 - tx.frac) * in.at(ty.hi, tx.lo) +
              ty.frac * tx.frac * in.at(ty.hi, tx.hi);
        }
      }
    }
  return out;
}

Tensor4 upsample2_backward(const Tensor4& grad_out, const Shape4& input_shape) {
  require(grad_out.shape() ==
              Shape4{input_shape.n, input_shape.c, 2 * input_shape.h, 2 * input_shape.w},
          ErrorCode::Shape, "upsample2_backward: grad_out shape mismatch");
  Tensor4 dx(input_shape);
  for (int n = 0; n < input_shape.n; ++n)
    for (int c = 0; c < input_shape.c; ++c) {
      auto g = grad_out.plane(n, c);
      auto d = dx.plane(n, c);
      const int W = input_shape.w;
      for (int y = 0; y < grad_out.h(); ++y) {
        const Tap ty = upsample_tap(y, input_shape.h);
        for (int xo = 0; xo < grad_out.w(); ++xo) {
          const Tap tx = upsample_tap(xo, W);
          const double v = g[static_cast<std::size_t>(y) * grad_out.w() + xo];
          d[static_cast<std::size_t>(ty.lo) * W + tx.lo] += (1 - ty.frac) * (1 - tx.frac) * v;
          d[static_cast<std::size_t>(ty.lo) * W + tx.hi] += (1 - ty.frac) * tx.frac * v;
          d[static_cast<std::size_t>(ty.hi) * W + tx.lo] += ty.frac * (1 - tx.frac) * v;
          d[static_cast<std::size_t>(ty.hi) * W + tx.hi] += ty.frac * tx.frac * v;
        }
      }
    }
  return dx;
}

std::size_t param_count(const ConvParams& p) {
  return p.weights.size() + (p.has_bias ? p.bias.size() : 0);
}

}  // namespace swapgraph
