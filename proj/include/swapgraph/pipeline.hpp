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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "swapgraph/classifier.hpp"
#include "swapgraph/data_io.hpp"
#include "swapgraph/sampler.hpp"
#include "swapgraph/segnet.hpp"

namespace swapgraph {

inline constexpr int kCheckpointVersion = 1;

struct PipelineConfig {
  int expand_target = 256;
  int top_k = 64;
  Neighborhood neighborhood = Neighborhood::Four;
  DecisionThresholds thresholds;

  void validate() const;
};

struct Model {
  SegNet backbone;
  EdgeClassifier classifier;
  bool trained = false;

  explicit Model(const SegNetConfig& cfg);
};

std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

// One of the top-k entries of the expanded list.
struct SelectedEdge {
  EdgePair edge;
  double seg = 0.0;  // expanded segmentation score (copies sit below every original)
  double cls = 0.0;
  int origin = 0;
};

// Everything the decision step needs, so thresholds can be re-applied
// without another forward pass.
struct ImageScores {
  Tensor4 prob_map;
  ScoredEdgeSet expanded;
  std::vector<int> selected_index;  // top-k indices into `expanded`
  std::vector<SelectedEdge> selected;
};

ImageScores score_image(const Model& model, const Tensor4& image, std::span<const Point> corners,
                        const PipelineConfig& cfg);

// Applies the dual threshold (or the segmentation threshold alone) to the
// selected entries and returns the unique corner pairs that pass, sorted.
std::vector<EdgePair> decide_edges(const ImageScores& scores, const DecisionThresholds& th,
                                   bool use_classifier = true);

PlanarGraph run_pipeline(const Tensor4& image, std::span<const Point> corners, const Model& model,
                         const PipelineConfig& cfg);

struct TrainConfig {
  SegNetConfig net;
  SegTrainConfig seg;
  ClassifierTrainConfig cls;
  PipelineConfig pipe;
  int mask_dilation = 1;
  std::function<void(const std::string&)> log;
};

Tensor4 training_mask(const AnnotationRecord& rec, int dilation);

// Unique top-k selections of every sample, labelled against the annotation.
std::vector<LabeledEdge> classifier_dataset(const SegNet& backbone, std::span<const Sample> samples,
                                            const PipelineConfig& cfg);

struct TrainingHistory {
  TrainCurve seg;
  std::vector<double> classifier;

  std::string to_csv() const;
};

// Backbone first, then the fusion weights and head on the frozen backbone.
Model train_model(std::span<const Sample> samples, const TrainConfig& cfg,
                  TrainingHistory* history = nullptr);

}  // namespace swapgraph
