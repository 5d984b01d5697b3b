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

#include "swapgraph/optim.hpp"

#include <cmath>

#include "swapgraph/error.hpp"

namespace swapgraph {

void Adam::step(const ParamRefs& refs, double lr) {
  require(refs.values.size() == refs.grads.size(), ErrorCode::InvalidArgument,
          "Adam: value/grad list length mismatch");
  if (m_.empty()) {
    for (const auto& v : refs.values) {
      m_.emplace_back(v.size(), 0.0);
      v_.emplace_back(v.size(), 0.0);
    }
  }
  require(m_.size() == refs.values.size(), ErrorCode::State,
          "Adam: parameter layout changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < refs.values.size(); ++k) {
    auto value = refs.values[k];
    auto grad = refs.grads[k];
    auto& m = m_[k];
    auto& v = v_[k];
    require(value.size() == m.size() && grad.size() == m.size(), ErrorCode::State,
            "Adam: parameter size changed between steps");
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i] + cfg_.weight_decay * value[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace swapgraph
