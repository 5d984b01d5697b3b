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

#include "swapgraph/tensor.hpp"

#include <algorithm>

#include "swapgraph/error.hpp"

namespace swapgraph {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
         std::to_string(h) + ", " + std::to_string(w) + ")";
}

namespace {
void check_dims(const Shape4& s) {
  require(s.n >= 1 && s.c >= 1 && s.h >= 1 && s.w >= 1, ErrorCode::Shape,
          "tensor dimensions must all be >= 1, got " + s.str());
}
}  // namespace

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape) {
  check_dims(shape_);
  data_.assign(shape_.size(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  check_dims(shape_);
  require(data_.size() == shape_.size(), ErrorCode::Shape,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + shape_.str());
}

Tensor4 Tensor4::sample(int n) const {
  require(n >= 0 && n < shape_.n, ErrorCode::InvalidArgument,
          "sample index out of range");
  Shape4 s = shape_;
  s.n = 1;
  const std::size_t len = s.size();
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(n * len),
                          data_.begin() + static_cast<std::ptrdiff_t>((n + 1) * len));
  return Tensor4(s, std::move(out));
}

Tensor4 concat_batch(std::span<const Tensor4> parts) {
  require(!parts.empty(), ErrorCode::InvalidArgument,
          "concat_batch needs at least one tensor");
  Shape4 s = parts.front().shape();
  s.n = 0;
  for (const auto& p : parts) {
    require(p.c() == s.c && p.h() == s.h && p.w() == s.w, ErrorCode::Shape,
            "concat_batch: mismatched sample shape " + p.shape().str());
    s.n += p.n();
  }
  std::vector<double> data;
  data.reserve(s.size());
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Tensor4(s, std::move(data));
}

void add_inplace(Tensor4& dst, const Tensor4& src) {
  require(dst.shape() == src.shape(), ErrorCode::Shape,
          "add: shape mismatch " + dst.shape().str() + " vs " + src.shape().str());
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace swapgraph
