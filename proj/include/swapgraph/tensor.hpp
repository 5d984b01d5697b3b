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
#include <span>
#include <string>
#include <vector>

namespace swapgraph {

struct Shape4 {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape4&) const = default;
  std::string str() const;
};

// Read-only view over one (h, w) plane of a tensor.
struct PlaneView {
  std::span<const double> data;
  int h = 0;
  int w = 0;

  double at(int y, int x) const {
    return data[static_cast<std::size_t>(y) * w + x];
  }
};

// Dense rank-4 array in (batch, channel, height, width) order, row-major
// within each plane.
class Tensor4 {
 public:
  Tensor4() : Tensor4(Shape4{}) {}
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> data);

  static Tensor4 zeros_like(const Tensor4& other) {
    return Tensor4(other.shape());
  }

  const Shape4& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
               shape_.w +
           x;
  }
  double& operator()(int n, int c, int y, int x) {
    return data_[index(n, c, y, x)];
  }
  double operator()(int n, int c, int y, int x) const {
    return data_[index(n, c, y, x)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::span<double> plane(int n, int c) {
    return std::span<double>(data_).subspan(index(n, c, 0, 0),
                                            shape_.plane_size());
  }
  std::span<const double> plane(int n, int c) const {
    return std::span<const double>(data_).subspan(index(n, c, 0, 0),
                                                  shape_.plane_size());
  }
  PlaneView view(int n, int c) const { return {plane(n, c), shape_.h, shape_.w}; }

  // Copy of sample `n` as a batch-1 tensor.
  Tensor4 sample(int n) const;

  bool operator==(const Tensor4&) const = default;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

// Stacks batch-1 (or batch-k) tensors of identical (c, h, w) along n.
Tensor4 concat_batch(std::span<const Tensor4> parts);

void add_inplace(Tensor4& dst, const Tensor4& src);

}  // namespace swapgraph
