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

// Reference implementations used as test oracles. They are written directly
// from the operation definitions and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "swapgraph/ops.hpp"
#include "swapgraph/sampler.hpp"
#include "swapgraph/segnet.hpp"
#include "swapgraph/tensor.hpp"

namespace oracle {

using swapgraph::ConvParams;
using swapgraph::Point;
using swapgraph::Shape4;
using swapgraph::Tensor4;

inline Tensor4 random_tensor(Shape4 s, std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor4 t(s);
  for (double& v : t.data()) v = d(g);
  return t;
}

inline ConvParams random_conv(int c_out, int c_in, int k, bool bias, std::mt19937_64& g) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ConvParams p;
  p.c_out = c_out;
  p.c_in = c_in;
  p.kh = k;
  p.kw = k;
  p.has_bias = bias;
  p.weights.resize(static_cast<std::size_t>(c_out) * c_in * k * k);
  for (double& v : p.weights) v = d(g);
  if (bias) {
    p.bias.resize(static_cast<std::size_t>(c_out));
    for (double& v : p.bias) v = d(g);
  }
  return p;
}

// Quadruple-loop cross-correlation with zero padding.
inline Tensor4 direct_conv(const Tensor4& x, const ConvParams& p, int pad) {
  const int ho = x.h() + 2 * pad - p.kh + 1;
  const int wo = x.w() + 2 * pad - p.kw + 1;
  Tensor4 y(Shape4{x.n(), p.c_out, ho, wo});
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < p.c_out; ++o)
      for (int yy = 0; yy < ho; ++yy)
        for (int xx = 0; xx < wo; ++xx) {
          double acc = p.has_bias ? p.bias[static_cast<std::size_t>(o)] : 0.0;
          for (int i = 0; i < p.c_in; ++i)
            for (int ky = 0; ky < p.kh; ++ky)
              for (int kx = 0; kx < p.kw; ++kx) {
                const int sy = yy + ky - pad;
                const int sx = xx + kx - pad;
                if (sy < 0 || sx < 0 || sy >= x.h() || sx >= x.w()) continue;
                acc += p.w(o, i, ky, kx) * x(n, i, sy, sx);
              }
          y(n, o, yy, xx) = acc;
        }
  return y;
}

// Relative error with an absolute floor so that tiny gradients are compared
// absolutely.
inline double rel_err(double a, double b, double floor = 1e-4) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central difference of f at values[i].
inline double central_diff(std::vector<double>& values, std::size_t i, const std::function<double()>& f,
                           double h = 1e-5) {
  const double saved = values[i];
  values[i] = saved + h;
  const double fp = f();
  values[i] = saved - h;
  const double fm = f();
  values[i] = saved;
  return (fp - fm) / (2 * h);
}

// Largest relative error between analytic and numeric gradients over all
// entries of `values`.
inline double max_grad_error(std::vector<double>& values, const std::vector<double>& analytic,
                             const std::function<double()>& f, double h = 1e-5, double floor = 1e-4) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    worst = std::max(worst, rel_err(analytic[i], central_diff(values, i, f, h), floor));
  return worst;
}

inline double weighted_sum(const Tensor4& y, const Tensor4& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * r.data()[i];
  return s;
}

// Bilinear formula on the unit cell [x1, x1 + 1] x [y1, y1 + 1] written as
// the textbook four-term weighted sum.
inline double bilinear(const std::vector<double>& map, int h, int w, double x, double y) {
  int x1 = static_cast<int>(std::floor(x));
  int y1 = static_cast<int>(std::floor(y));
  if (x1 >= w - 1) x1 = w - 2;
  if (y1 >= h - 1) y1 = h - 2;
  const int x2 = x1 + 1;
  const int y2 = y1 + 1;
  auto f = [&](int yy, int xx) { return map[static_cast<std::size_t>(yy) * w + xx]; };
  return f(y1, x1) * (x2 - x) * (y2 - y) + f(y1, x2) * (x - x1) * (y2 - y) + f(y2, x1) * (x2 - x) * (y - y1) +
         f(y2, x2) * (x - x1) * (y - y1);
}

// Mean of the five (or more) along-edge averages with offsets clamped.
inline double score_edge(const std::vector<double>& map, int h, int w, Point a, Point b,
                         const std::vector<std::pair<double, double>>& offsets, int points = 64) {
  auto line = [&](double ox, double oy) {
    double s = 0.0;
    for (int t = 0; t < points; ++t) {
      const double f = static_cast<double>(t) / (points - 1);
      double x = a.x + f * (b.x - a.x) + ox;
      double y = a.y + f * (b.y - a.y) + oy;
      x = std::min(std::max(x, 0.0), w - 1.0);
      y = std::min(std::max(y, 0.0), h - 1.0);
      s += bilinear(map, h, w, x, y);
    }
    return s / points;
  };
  double total = line(0, 0);
  for (auto [ox, oy] : offsets) total += line(ox, oy);
  return total / static_cast<double>(offsets.size() + 1);
}

inline std::vector<std::pair<double, double>> four_offsets() { return {{0, -1}, {0, 1}, {-1, 0}, {1, 0}}; }

// Per-scale sampler: s points per edge at scale side s, point-major then
// channel.
inline std::vector<std::vector<double>> edge_features(const std::vector<Tensor4>& maps, Point a, Point b,
                                                      int frame) {
  std::vector<std::vector<double>> out;
  for (const Tensor4& m : maps) {
    const int s = m.h();
    const double k = static_cast<double>(s) / frame;
    const double ax = std::min(a.x * k, s - 1.0), ay = std::min(a.y * k, s - 1.0);
    const double bx = std::min(b.x * k, s - 1.0), by = std::min(b.y * k, s - 1.0);
    std::vector<double> v;
    for (int t = 0; t < s; ++t) {
      const double f = static_cast<double>(t) / (s - 1);
      const double x = ax + f * (bx - ax);
      const double y = ay + f * (by - ay);
      for (int c = 0; c < m.c(); ++c) {
        std::vector<double> plane(m.plane(0, c).begin(), m.plane(0, c).end());
        v.push_back(bilinear(plane, s, s, x, y));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

// Digital line by explicit rounding: one pixel per step of the major axis,
// the minor coordinate rounded to nearest with ties away from the start.
inline std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1) {
  std::vector<std::pair<int, int>> out;
  const int dx = x1 - x0, dy = y1 - y0;
  const int major = std::max(std::abs(dx), std::abs(dy));
  if (major == 0) return {{x0, y0}};
  auto round_half_away = [major](int i, int d) {
    const int mag = (2 * i * std::abs(d) + major) / (2 * major);
    return d >= 0 ? mag : -mag;
  };
  for (int i = 0; i <= major; ++i) out.emplace_back(x0 + round_half_away(i, dx), y0 + round_half_away(i, dy));
  return out;
}

// Closed segments pq and rs intersect anywhere other than at a shared
// endpoint. Solved parametrically with a collinear fallback.
inline bool segments_intersect_improperly(Point p, Point q, Point r, Point s) {
  const double dx1 = q.x - p.x, dy1 = q.y - p.y, dx2 = s.x - r.x, dy2 = s.y - r.y;
  const double den = dx1 * dy2 - dy1 * dx2;
  auto shared = [&](Point z) { return (z == p || z == q) && (z == r || z == s); };
  if (den != 0.0) {
    const double t = ((r.x - p.x) * dy2 - (r.y - p.y) * dx2) / den;
    const double u = ((r.x - p.x) * dy1 - (r.y - p.y) * dx1) / den;
    if (t < 0 || t > 1 || u < 0 || u > 1) return false;
    const Point z{p.x + t * dx1, p.y + t * dy1};
    return !shared(z);
  }
  if ((r.x - p.x) * dy1 - (r.y - p.y) * dx1 != 0.0) return false;  // parallel, not collinear
  // Collinear: project onto the dominant axis and measure the overlap.
  const bool use_x = std::abs(dx1) + std::abs(dx2) >= std::abs(dy1) + std::abs(dy2);
  auto key = [&](Point z) { return use_x ? z.x : z.y; };
  const double lo = std::max(std::min(key(p), key(q)), std::min(key(r), key(s)));
  const double hi = std::min(std::max(key(p), key(q)), std::max(key(r), key(s)));
  if (lo > hi) return false;
  if (lo < hi) return true;
  // Single touching point.
  for (Point z : {p, q, r, s})
    if (key(z) == lo) return !shared(z);
  return true;
}

// Distance of a forward pass to the nearest ReLU or max-pool kink. Finite
// differences are only meaningful when this exceeds the step size.
inline double kink_margin(const swapgraph::SegNet& net, const Tensor4& x) {
  swapgraph::SegNetTrace t;
  net.forward(x, &t);
  double m = 1e300;
  auto relu = [&](const Tensor4& p) {
    for (double v : p.data()) m = std::min(m, std::abs(v));
  };
  for (const auto& e : t.enc)
    for (const auto& p : e.pre_relu) relu(p);
  for (const auto& d : t.dec) relu(d.pre_relu);
  for (std::size_t l = 0; l + 1 < t.enc_out.size(); ++l) {
    const Tensor4& a = t.enc_out[l];
    for (int n = 0; n < a.n(); ++n)
      for (int c = 0; c < a.c(); ++c)
        for (int y = 0; y < a.h(); y += 2)
          for (int xx = 0; xx < a.w(); xx += 2) {
            double v[4] = {a(n, c, y, xx), a(n, c, y, xx + 1), a(n, c, y + 1, xx), a(n, c, y + 1, xx + 1)};
            std::sort(v, v + 4, std::greater<>());
            // All-zero blocks stay zero under small perturbations.
            if (v[0] > 0) m = std::min(m, v[0] - v[1]);
          }
  }
  return m;
}

}  // namespace oracle
