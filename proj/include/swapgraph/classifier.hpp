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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "swapgraph/sampler.hpp"

namespace swapgraph {

inline constexpr int kFeatureLength = 1024;

struct ClassifierParams {
  std::vector<double> weights;
  double bias = 0.0;

  static ClassifierParams zeros(int length = kFeatureLength);
  std::size_t param_count() const { return weights.size() + 1; }
  bool operator==(const ClassifierParams&) const = default;
};

struct DecisionThresholds {
  double seg = 0.8;
  double cls = 0.4;

  void validate() const;
};

// sigmoid(w . f + b)
double classify(std::span<const double> feature, const ClassifierParams& p);

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad_pred;  // d loss / d prediction
};

// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
BceResult bce_loss(std::span<const double> pred, std::span<const int> labels);

// 1 iff both scores strictly exceed their thresholds.
int decide(double seg_score, double cls_score, const DecisionThresholds& th);

// Fusion weights over the feature scales plus the linear head; trained
// together on a frozen backbone.
struct EdgeClassifier {
  std::vector<double> fusion;
  ClassifierParams head;

  static EdgeClassifier initial(int scales, int length = kFeatureLength);
  double score(const EdgeFeature& ef) const;
  bool operator==(const EdgeClassifier&) const = default;
};

struct LabeledEdge {
  EdgeFeature feature;
  int label = 0;
};

// Mean BCE over data[indices] and its gradient w.r.t. the head and fusion
// weights (logit gradient of the unclamped loss).
struct ClassifierGrads {
  double loss = 0.0;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> fusion;
};
ClassifierGrads classifier_batch_grads(const EdgeClassifier& model, std::span<const LabeledEdge> data,
                                       std::span<const std::size_t> indices);

struct ClassifierTrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3;
  double negative_ratio = 3.0;  // negatives kept per positive each epoch; <= 0 keeps all
  bool train_fusion = true;
  std::uint64_t seed = 42;
  std::function<void(int epoch, double loss)> on_epoch;
};

std::vector<double> train_classifier(EdgeClassifier& model, std::span<const LabeledEdge> data,
                                     const ClassifierTrainConfig& cfg);

double classifier_accuracy(const EdgeClassifier& model, std::span<const LabeledEdge> data,
                           double threshold = 0.5);

}  // namespace swapgraph
