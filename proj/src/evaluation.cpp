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

#include "swapgraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/ops.hpp"
#include "swapgraph/rng.hpp"

namespace swapgraph {

Metrics Metrics::from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, double mae) {
  require(tp >= 0 && fp >= 0 && fn >= 0, ErrorCode::InvalidArgument, "negative edge counts");
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.mae = mae;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

namespace {

struct Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

std::vector<EdgePair> normalized(std::span<const EdgePair> edges) {
  std::vector<EdgePair> v;
  for (const auto& e : edges) v.push_back(EdgePair::make(e.a, e.b));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Counts count_pairs(std::span<const EdgePair> predicted, std::span<const EdgePair> truth) {
  const auto p = normalized(predicted);
  const auto t = normalized(truth);
  std::vector<EdgePair> common;
  std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(common));
  const auto tp = static_cast<std::int64_t>(common.size());
  return {tp, static_cast<std::int64_t>(p.size()) - tp, static_cast<std::int64_t>(t.size()) - tp};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

Metrics eval_edges(const PlanarGraph& predicted, const PlanarGraph& truth) {
  require(predicted.corners == truth.corners, ErrorCode::InvalidArgument,
          "eval_edges: predicted and truth graphs have different corner lists");
  const Counts c = count_pairs(predicted.edges, truth.edges);
  return Metrics::from_counts(c.tp, c.fp, c.fn);
}

double eval_mae(const Tensor4& prob_map, const Tensor4& truth_mask) {
  require(prob_map.shape() == truth_mask.shape(), ErrorCode::Shape,
          "eval_mae: shapes " + prob_map.shape().str() + " and " + truth_mask.shape().str());
  const auto a = prob_map.data();
  const auto b = truth_mask.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double mask_recall(const Tensor4& prob_map, const Tensor4& truth_mask, double threshold) {
  require(prob_map.shape() == truth_mask.shape(), ErrorCode::Shape, "mask_recall: shape mismatch");
  const auto a = prob_map.data();
  const auto b = truth_mask.data();
  std::size_t positives = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] > 0.5) {
      ++positives;
      if (a[i] > threshold) ++hits;
    }
  return positives ? static_cast<double>(hits) / static_cast<double>(positives) : 0.0;
}

ScoredSplit score_split(const Model& model, std::span<const Sample> samples, const PipelineConfig& cfg) {
  require(model.trained, ErrorCode::State, "model has not been trained");
  require(!samples.empty(), ErrorCode::InvalidArgument, "no samples to score");
  ScoredSplit split;
  for (const Sample& s : samples) {
    split.images.push_back(score_image(model, s.image, s.annotation.graph.corners, cfg));
    split.samples.push_back(&s);
  }
  return split;
}

EvalReport evaluate_scored(const ScoredSplit& split, const DecisionThresholds& th, bool use_classifier,
                           int mask_dilation) {
  EvalReport r;
  Counts total;
  double mae_sum = 0.0;
  std::size_t mask_pos = 0;
  double mask_hits = 0.0;
  for (std::size_t i = 0; i < split.images.size(); ++i) {
    const Sample& s = *split.samples[i];
    ImagePrediction p;
    p.image_id = s.annotation.image_id;
    p.predicted = decide_edges(split.images[i], th, use_classifier);
    p.truth = normalized(s.annotation.graph.edges);
    const Tensor4 mask = training_mask(s.annotation, mask_dilation);
    p.mae = eval_mae(split.images[i].prob_map, mask);
    const Counts c = count_pairs(p.predicted, p.truth);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    mae_sum += p.mae;
    std::size_t pos = 0;
    for (double v : mask.data()) pos += v > 0.5 ? 1 : 0;
    mask_hits += mask_recall(split.images[i].prob_map, mask) * static_cast<double>(pos);
    mask_pos += pos;
    r.predictions.push_back(std::move(p));
  }
  r.metrics = Metrics::from_counts(total.tp, total.fp, total.fn,
                                   mae_sum / static_cast<double>(split.images.size()));
  r.mask_recall = mask_pos ? mask_hits / static_cast<double>(mask_pos) : 0.0;
  return r;
}

EvalReport evaluate(const Model& model, std::span<const Sample> samples, const PipelineConfig& cfg,
                    bool use_classifier, int mask_dilation) {
  return evaluate_scored(score_split(model, samples, cfg), cfg.thresholds, use_classifier, mask_dilation);
}

Metrics metrics_from_predictions(std::span<const ImagePrediction> preds) {
  require(!preds.empty(), ErrorCode::InvalidArgument, "no predictions");
  Counts total;
  double mae = 0.0;
  for (const auto& p : preds) {
    const Counts c = count_pairs(p.predicted, p.truth);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    mae += p.mae;
  }
  return Metrics::from_counts(total.tp, total.fp, total.fn, mae / static_cast<double>(preds.size()));
}

std::string SweepGrid::to_csv() const {
  std::ostringstream os;
  os << "seg_threshold,cls_threshold,precision,recall,f1,mae,tp,fp,fn\n";
  for (std::size_t i = 0; i < seg_thresholds.size(); ++i)
    for (std::size_t j = 0; j < cls_thresholds.size(); ++j) {
      const Metrics& m = at(i, j);
      os << fmt(seg_thresholds[i]) << ',' << fmt(cls_thresholds[j]) << ',' << fmt(m.precision) << ','
         << fmt(m.recall) << ',' << fmt(m.f1) << ',' << fmt(m.mae) << ',' << m.tp << ',' << m.fp << ','
         << m.fn << '\n';
    }
  return os.str();
}

SweepGrid sweep(const Model& model, std::span<const Sample> samples, std::span<const double> seg,
                std::span<const double> cls, const PipelineConfig& cfg) {
  require(!seg.empty() && !cls.empty(), ErrorCode::InvalidArgument, "sweep axes must be non-empty");
  SweepGrid grid;
  grid.seg_thresholds.assign(seg.begin(), seg.end());
  grid.cls_thresholds.assign(cls.begin(), cls.end());
  const ScoredSplit split = score_split(model, samples, cfg);
  for (double s : seg)
    for (double c : cls) grid.cells.push_back(evaluate_scored(split, {s, c}).metrics);
  return grid;
}

std::string AblationReport::to_csv() const {
  std::ostringstream os;
  os << "method,mode,classifier,backbone_params,precision,recall,f1,mae,mask_recall,tp,fp,fn\n";
  for (const auto& r : rows)
    os << r.name << ',' << to_string(r.mode) << ',' << (r.classifier ? 1 : 0) << ',' << r.backbone_params
       << ',' << fmt(r.metrics.precision) << ',' << fmt(r.metrics.recall) << ',' << fmt(r.metrics.f1) << ','
       << fmt(r.metrics.mae) << ',' << fmt(r.mask_recall) << ',' << r.metrics.tp << ',' << r.metrics.fp
       << ',' << r.metrics.fn << '\n';
  return os.str();
}

std::string AblationReport::predictions_json() const {
  nlohmann::json j;
  j["format"] = "swapgraph-predictions";
  j["version"] = 1;
  j["rows"] = nlohmann::json::array();
  auto pairs = [](const std::vector<EdgePair>& edges) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : edges) a.push_back({e.a, e.b});
    return a;
  };
  for (const auto& r : rows) {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& p : r.predictions)
      images.push_back({{"image_id", p.image_id},
                        {"predicted", pairs(p.predicted)},
                        {"truth", pairs(p.truth)},
                        {"mae", p.mae}});
    j["rows"].push_back({{"method", r.name}, {"images", images}});
  }
  return j.dump(1) + "\n";
}

std::vector<PredictionDump> predictions_from_json(const std::string& text) {
  std::vector<PredictionDump> out;
  try {
    const auto j = nlohmann::json::parse(text);
    require(j.value("format", "") == "swapgraph-predictions", ErrorCode::Parse, "not a prediction dump");
    auto pairs = [](const nlohmann::json& a) {
      std::vector<EdgePair> v;
      for (const auto& e : a) v.push_back(EdgePair::make(e.at(0).get<int>(), e.at(1).get<int>()));
      return v;
    };
    for (const auto& r : j.at("rows")) {
      PredictionDump d;
      d.method = r.at("method").get<std::string>();
      for (const auto& im : r.at("images"))
        d.images.push_back({im.at("image_id").get<std::string>(), pairs(im.at("predicted")),
                            pairs(im.at("truth")), im.at("mae").get<double>()});
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed prediction dump: ") + e.what());
  }
  return out;
}

AblationReport run_ablation(std::span<const Sample> train, std::span<const Sample> test,
                            const TrainConfig& cfg) {
  require(!train.empty() && !test.empty(), ErrorCode::InvalidArgument,
          "ablation needs non-empty train and held-out splits");
  AblationReport report;
  std::vector<AblationRow> seg_rows;
  std::vector<AblationRow> cls_rows;
  for (SwapMode mode : {SwapMode::NoSwap, SwapMode::Swap}) {
    TrainConfig tc = cfg;
    tc.net.mode = mode;
    if (cfg.log) {
      const std::string tag = to_string(mode);
      tc.log = [&cfg, tag](const std::string& msg) { cfg.log("[" + tag + "] " + msg); };
    }
    const Model model = train_model(train, tc);
    const ScoredSplit split = score_split(model, test, cfg.pipe);
    for (bool with_cls : {false, true}) {
      const EvalReport ev = evaluate_scored(split, cfg.pipe.thresholds, with_cls, cfg.mask_dilation);
      AblationRow row;
      row.name = std::string(mode == SwapMode::Swap ? "swap" : "noswap") + (with_cls ? "+classifier" : "");
      row.mode = mode;
      row.classifier = with_cls;
      row.backbone_params = model.backbone.param_count();
      row.metrics = ev.metrics;
      row.mask_recall = ev.mask_recall;
      row.predictions = ev.predictions;
      (with_cls ? cls_rows : seg_rows).push_back(std::move(row));
    }
  }
  for (auto& r : seg_rows) report.rows.push_back(std::move(r));
  for (auto& r : cls_rows) report.rows.push_back(std::move(r));
  return report;
}

std::vector<BenchRow> bench_params(std::span<const int> widths) {
  std::vector<BenchRow> rows;
  Rng rng(0);
  for (int c : widths) {
    require(c >= 2, ErrorCode::InvalidArgument, "bench width must be >= 2");
    BenchRow r;
    r.width = c;
    r.conv3x3 = param_count(ConvParams::zeros(c, c, 3, false));
    r.conv1x1 = param_count(ConvParams::zeros(c, c, 1, false));
    const SwapBlock swap = SwapBlock::make(SwapMode::Swap, c, 5, false, rng);
    const SwapBlock swapnn = SwapBlock::make(SwapMode::SwapNN, c, 5, false, rng);
    r.swap_added = param_count(swap.perm);
    r.swap_block = param_count(swap);
    r.swapnn_added = param_count(swapnn.scale);
    r.swapnn_block = param_count(swapnn);
    rows.push_back(r);
  }
  return rows;
}

std::string bench_to_csv(std::span<const BenchRow> rows) {
  std::ostringstream os;
  os << "width,conv3x3,conv1x1,swap_added,swap_plus_1x1,swapnn_added,swapnn_plus_1x1_halving,"
        "reduction_3x3_vs_swap\n";
  for (const auto& r : rows)
    os << r.width << ',' << r.conv3x3 << ',' << r.conv1x1 << ',' << r.swap_added << ',' << r.swap_block
       << ',' << r.swapnn_added << ',' << r.swapnn_block << ','
       << fmt(static_cast<double>(r.conv3x3) / static_cast<double>(r.swap_block)) << '\n';
  return os.str();
}

}  // namespace swapgraph
