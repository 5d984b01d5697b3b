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
#include <span>
#include <string>
#include <vector>

#include "swapgraph/pipeline.hpp"

namespace swapgraph {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mae = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  static Metrics from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, double mae = 0.0);
};

// Exact unordered-pair matching; both graphs must carry the same corners.
Metrics eval_edges(const PlanarGraph& predicted, const PlanarGraph& truth);
double eval_mae(const Tensor4& prob_map, const Tensor4& truth_mask);
// Fraction of mask pixels whose probability exceeds `threshold`.
double mask_recall(const Tensor4& prob_map, const Tensor4& truth_mask, double threshold = 0.5);

struct ImagePrediction {
  std::string image_id;
  std::vector<EdgePair> predicted;
  std::vector<EdgePair> truth;
  double mae = 0.0;
};

// Cached per-image scores for a whole split.
struct ScoredSplit {
  std::vector<ImageScores> images;
  std::vector<const Sample*> samples;
};

ScoredSplit score_split(const Model& model, std::span<const Sample> samples, const PipelineConfig& cfg);

struct EvalReport {
  Metrics metrics;
  double mask_recall = 0.0;
  std::vector<ImagePrediction> predictions;
};

// Micro-averaged edge metrics plus mean per-image MAE over the split.
EvalReport evaluate_scored(const ScoredSplit& split, const DecisionThresholds& th,
                           bool use_classifier = true, int mask_dilation = 1);
EvalReport evaluate(const Model& model, std::span<const Sample> samples, const PipelineConfig& cfg,
                    bool use_classifier = true, int mask_dilation = 1);

// Metrics recomputed from dumped predictions alone.
Metrics metrics_from_predictions(std::span<const ImagePrediction> preds);

struct SweepGrid {
  std::vector<double> seg_thresholds;
  std::vector<double> cls_thresholds;
  std::vector<Metrics> cells;  // row-major, seg outer

  const Metrics& at(std::size_t seg, std::size_t cls) const {
    return cells[seg * cls_thresholds.size() + cls];
  }
  std::string to_csv() const;
};

inline const std::vector<double> kDefaultSegGrid = {0.5, 0.6, 0.7, 0.8};
inline const std::vector<double> kDefaultClsGrid = {0.4, 0.5, 0.6, 0.7};

SweepGrid sweep(const Model& model, std::span<const Sample> samples, std::span<const double> seg,
                std::span<const double> cls, const PipelineConfig& cfg);

struct AblationRow {
  std::string name;
  SwapMode mode = SwapMode::NoSwap;
  bool classifier = false;
  std::size_t backbone_params = 0;
  Metrics metrics;
  double mask_recall = 0.0;
  std::vector<ImagePrediction> predictions;
};

struct AblationReport {
  std::vector<AblationRow> rows;

  std::string to_csv() const;
  std::string predictions_json() const;
};

struct PredictionDump {
  std::string method;
  std::vector<ImagePrediction> images;
};
std::vector<PredictionDump> predictions_from_json(const std::string& text);

// Trains a NoSwap and a Swap backbone (identical seed and initial weights)
// and reports four rows: each backbone with and without the classifier.
AblationReport run_ablation(std::span<const Sample> train, std::span<const Sample> test,
                            const TrainConfig& cfg);

struct BenchRow {
  int width = 0;
  std::size_t conv3x3 = 0;
  std::size_t conv1x1 = 0;
  std::size_t swap_added = 0;
  std::size_t swap_block = 0;    // Swap followed by a c -> c 1x1 conv
  std::size_t swapnn_added = 0;
  std::size_t swapnn_block = 0;  // SwapNN followed by a c -> c/2 1x1 conv
};

inline const std::vector<int> kBenchWidths = {16, 64, 256, 1024};

// Bias-free layer parameter counts at each width.
std::vector<BenchRow> bench_params(std::span<const int> widths = kBenchWidths);
std::string bench_to_csv(std::span<const BenchRow> rows);

}  // namespace swapgraph
