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

#include "swapgraph/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swapgraph/error.hpp"
#include "swapgraph/ops.hpp"
#include "swapgraph/optim.hpp"
#include "swapgraph/rng.hpp"

namespace swapgraph {

namespace {
constexpr double kClamp = 1e-7;
}

ClassifierParams ClassifierParams::zeros(int length) {
  require(length >= 1, ErrorCode::InvalidArgument, "classifier length must be >= 1");
  ClassifierParams p;
  p.weights.assign(static_cast<std::size_t>(length), 0.0);
  return p;
}

void DecisionThresholds::validate() const {
  require(seg >= 0.0 && seg <= 1.0 && cls >= 0.0 && cls <= 1.0, ErrorCode::InvalidArgument,
          "thresholds must lie in [0, 1]");
}

double classify(std::span<const double> feature, const ClassifierParams& p) {
  require(feature.size() == p.weights.size(), ErrorCode::Shape,
          "classify: feature length " + std::to_string(feature.size()) + ", expected " +
              std::to_string(p.weights.size()));
  double z = p.bias;
  for (std::size_t i = 0; i < feature.size(); ++i) {
    require(std::isfinite(feature[i]), ErrorCode::InvalidArgument, "classify: non-finite feature");
    z += p.weights[i] * feature[i];
  }
  return sigmoid(z);
}

BceResult bce_loss(std::span<const double> pred, std::span<const int> labels) {
  require(!pred.empty(), ErrorCode::InvalidArgument, "bce_loss: empty input");
  require(pred.size() == labels.size(), ErrorCode::InvalidArgument,
          "bce_loss: prediction and label counts differ");
  const double n = static_cast<double>(pred.size());
  BceResult r;
  r.grad_pred.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = labels[i];
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::InvalidArgument,
            "bce_loss: labels must be 0 or 1");
    const double p = pred[i];
    const double pc = std::clamp(p, kClamp, 1.0 - kClamp);
    r.loss -= (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)) / n;
    const bool clamped = p < kClamp || p > 1.0 - kClamp;
    r.grad_pred[i] = clamped ? 0.0 : (-y / pc + (1.0 - y) / (1.0 - pc)) / n;
  }
  return r;
}

int decide(double seg_score, double cls_score, const DecisionThresholds& th) {
  return (seg_score > th.seg && cls_score > th.cls) ? 1 : 0;
}

EdgeClassifier EdgeClassifier::initial(int scales, int length) {
  require(scales >= 1, ErrorCode::InvalidArgument, "need at least one feature scale");
  return {std::vector<double>(static_cast<std::size_t>(scales), 1.0 / scales),
          ClassifierParams::zeros(length)};
}

double EdgeClassifier::score(const EdgeFeature& ef) const {
  return classify(fuse_features(ef, fusion), head);
}

ClassifierGrads classifier_batch_grads(const EdgeClassifier& model, std::span<const LabeledEdge> data,
                                       std::span<const std::size_t> indices) {
  require(!indices.empty(), ErrorCode::InvalidArgument, "classifier batch is empty");
  const double bn = static_cast<double>(indices.size());
  ClassifierGrads g;
  g.weights.assign(model.head.weights.size(), 0.0);
  g.fusion.assign(model.fusion.size(), 0.0);
  std::vector<double> dfused;
  for (std::size_t k : indices) {
    require(k < data.size(), ErrorCode::InvalidArgument, "classifier batch index out of range");
    const LabeledEdge& s = data[k];
    const std::vector<double> fused = fuse_features(s.feature, model.fusion);
    const double p = classify(fused, model.head);
    const double y = s.label;
    const double pc = std::clamp(p, kClamp, 1.0 - kClamp);
    g.loss -= (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)) / bn;
    const double dz = (p - y) / bn;
    g.bias += dz;
    dfused.resize(fused.size());
    for (std::size_t i = 0; i < fused.size(); ++i) {
      g.weights[i] += dz * fused[i];
      dfused[i] = dz * model.head.weights[i];
    }
    const FuseGrads fg = fuse_features_backward(s.feature, model.fusion, dfused);
    for (std::size_t l = 0; l < g.fusion.size(); ++l) g.fusion[l] += fg.grad_weights[l];
  }
  return g;
}

std::vector<double> train_classifier(EdgeClassifier& model, std::span<const LabeledEdge> data,
                                     const ClassifierTrainConfig& cfg) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data[i].label ? pos : neg).push_back(i);
  require(!pos.empty() && !neg.empty(), ErrorCode::InvalidArgument,
          "classifier training needs both positive and negative edges");
  require(cfg.batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");

  Rng rng(cfg.seed);
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  Adam adam(acfg);
  std::vector<double> bias_value(1);
  std::vector<double> grad_b(1);
  std::vector<double> losses;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(neg));
    std::size_t keep = neg.size();
    if (cfg.negative_ratio > 0)
      keep = std::min(keep, static_cast<std::size_t>(std::ceil(cfg.negative_ratio * pos.size())));
    std::vector<std::size_t> order(pos);
    order.insert(order.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(keep));
    rng.shuffle(std::span<std::size_t>(order));

    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      ClassifierGrads g = classifier_batch_grads(model, data, batch);
      if (!std::isfinite(g.loss)) {
        std::ostringstream os;
        os << "non-finite classifier loss at epoch " << epoch;
        fail(ErrorCode::Numeric, os.str());
      }
      if (!cfg.train_fusion) std::fill(g.fusion.begin(), g.fusion.end(), 0.0);
      bias_value[0] = model.head.bias;
      grad_b[0] = g.bias;
      ParamRefs refs;
      refs.add(model.head.weights, g.weights);
      refs.add(bias_value, grad_b);
      refs.add(model.fusion, g.fusion);
      adam.step(refs, cfg.lr);
      model.head.bias = bias_value[0];
      total += g.loss * static_cast<double>(end - start);
    }
    losses.push_back(total / static_cast<double>(order.size()));
    if (cfg.on_epoch) cfg.on_epoch(epoch, losses.back());
  }
  return losses;
}

double classifier_accuracy(const EdgeClassifier& model, std::span<const LabeledEdge> data,
                           double threshold) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : data) {
    const int pred = model.score(s.feature) > threshold ? 1 : 0;
    if (pred == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace swapgraph
