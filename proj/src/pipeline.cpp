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

#include "swapgraph/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "swapgraph/error.hpp"

namespace swapgraph {

using nlohmann::json;

void PipelineConfig::validate() const {
  require(expand_target >= 1, ErrorCode::InvalidArgument, "expand target must be >= 1");
  require(top_k >= 1 && top_k <= expand_target, ErrorCode::InvalidArgument,
          "top-k must lie in [1, expand target]");
  thresholds.validate();
}

namespace {

// Edge features are fused across scales, so every scale must yield the same
// vector length (level side times channels).
int feature_length(const SegNetConfig& cfg) {
  cfg.validate();
  const int len = cfg.side * cfg.channels.front();
  for (int l = 1; l < cfg.levels(); ++l)
    require(cfg.level_side(l) * cfg.channels[static_cast<std::size_t>(l)] == len,
            ErrorCode::InvalidArgument,
            "channels must double per level so edge features share one length");
  return len;
}

json config_to_json(const SegNetConfig& c) {
  return {{"side", c.side},
          {"input_channels", c.input_channels},
          {"channels", c.channels},
          {"mode", to_string(c.mode)},
          {"swap_key", c.swap_key},
          {"group_size", c.group_size},
          {"encoder_convs", c.encoder_convs},
          {"seed", c.seed}};
}

SegNetConfig config_from_json(const json& j) {
  SegNetConfig c;
  c.side = j.at("side").get<int>();
  c.input_channels = j.at("input_channels").get<int>();
  c.channels = j.at("channels").get<std::vector<int>>();
  c.mode = swap_mode_from_string(j.at("mode").get<std::string>());
  c.swap_key = j.at("swap_key").get<int>();
  c.group_size = j.at("group_size").get<int>();
  c.encoder_convs = j.at("encoder_convs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

}  // namespace

Model::Model(const SegNetConfig& cfg)
    : backbone(cfg), classifier(EdgeClassifier::initial(cfg.levels(), feature_length(cfg))) {}

namespace {

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double>* values;
};

// Same traversal as parameter_arrays(), with names and shapes for the
// checkpoint.
std::vector<NamedArray> named_arrays(SegNetParams& p, SwapMode mode) {
  std::vector<NamedArray> out;
  auto conv = [&out](const std::string& name, ConvParams& c) {
    out.push_back({name + ".weight", {c.c_out, c.c_in, c.kh, c.kw}, &c.weights});
    if (c.has_bias) out.push_back({name + ".bias", {c.c_out}, &c.bias});
  };
  for (std::size_t l = 0; l < p.enc.size(); ++l) {
    auto& e = p.enc[l];
    const std::string level = "enc" + std::to_string(l);
    for (std::size_t k = 0; k < e.convs.size(); ++k) conv(level + ".conv" + std::to_string(k), e.convs[k]);
    if (mode == SwapMode::SwapNN)
      out.push_back({level + ".swapnn", {static_cast<int>(e.scale.weights.size())}, &e.scale.weights});
  }
  for (std::size_t l = 0; l < p.dec.size(); ++l) {
    auto& d = p.dec[l];
    const std::string level = "dec" + std::to_string(l);
    if (l + 1 < p.dec.size()) conv(level + ".proj", d.proj);
    conv(level + ".conv", d.conv);
    conv(level + ".head", d.head);
  }
  return out;
}

}  // namespace

std::string model_to_json(const Model& m) {
  SegNetParams params = m.backbone.params();
  json arrays = json::array();
  for (const auto& a : named_arrays(params, m.backbone.config().mode))
    arrays.push_back({{"name", a.name}, {"shape", a.shape}, {"data", *a.values}});
  json j{{"format", "swapgraph-model"},
         {"version", kCheckpointVersion},
         {"trained", m.trained},
         {"config", config_to_json(m.backbone.config())},
         {"backbone", arrays},
         {"fusion", m.classifier.fusion},
         {"classifier", {{"weights", m.classifier.head.weights}, {"bias", m.classifier.head.bias}}}};
  return j.dump();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, "checkpoint parse error at byte " + std::to_string(e.byte));
  }
  try {
    require(j.value("format", "") == "swapgraph-model", ErrorCode::Parse, "not a swapgraph checkpoint");
    require(j.value("version", -1) == kCheckpointVersion, ErrorCode::Parse,
            "unsupported checkpoint version");
    Model m(config_from_json(j.at("config")));
    auto arrays = named_arrays(m.backbone.params(), m.backbone.config().mode);
    const json& stored = j.at("backbone");
    require(stored.size() == arrays.size(), ErrorCode::Shape,
            "checkpoint has " + std::to_string(stored.size()) + " parameter arrays, expected " +
                std::to_string(arrays.size()));
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      const json& a = stored[i];
      require(a.at("name").get<std::string>() == arrays[i].name, ErrorCode::Shape,
              "checkpoint array " + std::to_string(i) + " is '" + a.at("name").get<std::string>() +
                  "', expected '" + arrays[i].name + "'");
      require(a.at("shape").get<std::vector<int>>() == arrays[i].shape, ErrorCode::Shape,
              "checkpoint array '" + arrays[i].name + "' has the wrong shape");
      auto v = a.at("data").get<std::vector<double>>();
      require(v.size() == arrays[i].values->size(), ErrorCode::Shape,
              "checkpoint array '" + arrays[i].name + "' has the wrong length");
      *arrays[i].values = std::move(v);
    }
    auto fusion = j.at("fusion").get<std::vector<double>>();
    require(fusion.size() == m.classifier.fusion.size(), ErrorCode::Shape, "fusion weight count mismatch");
    m.classifier.fusion = std::move(fusion);
    auto w = j.at("classifier").at("weights").get<std::vector<double>>();
    require(w.size() == m.classifier.head.weights.size(), ErrorCode::Shape,
            "classifier weight count mismatch");
    m.classifier.head.weights = std::move(w);
    m.classifier.head.bias = j.at("classifier").at("bias").get<double>();
    m.trained = j.at("trained").get<bool>();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const Model& m, const std::string& path) { write_file(path, model_to_json(m)); }

Model load_model(const std::string& path) {
  try {
    return model_from_json(read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse && e.code() != ErrorCode::Shape) throw;
    fail(e.code(), path + ": " + e.what());
  }
}

ImageScores score_image(const Model& model, const Tensor4& image, std::span<const Point> corners,
                        const PipelineConfig& cfg) {
  cfg.validate();
  require(corners.size() >= 2, ErrorCode::InvalidArgument, "pipeline needs at least 2 corners");
  const int side = model.backbone.config().side;
  require(image.shape() == Shape4{1, model.backbone.config().input_channels, side, side},
          ErrorCode::Shape, "pipeline image has shape " + image.shape().str());
  for (const Point& p : corners)
    require(p.x >= 0 && p.y >= 0 && p.x < side && p.y < side, ErrorCode::InvalidArgument,
            "corner outside the frame");

  SideOutputs out = model.backbone.forward(image);
  ImageScores s;
  const auto candidates = enumerate_candidates(corners);
  const ScoredEdgeSet scored = score_candidates(out.prob_map.view(0, 0), corners, candidates, cfg.neighborhood);
  s.expanded = expand_scores(scored, cfg.expand_target);
  s.selected_index = top_k(s.expanded.scores, std::min<int>(cfg.top_k, static_cast<int>(s.expanded.size())));

  std::map<EdgePair, double> cls_cache;
  for (int i : s.selected_index) {
    const auto idx = static_cast<std::size_t>(i);
    const EdgePair e = s.expanded.edges[idx];
    auto it = cls_cache.find(e);
    if (it == cls_cache.end()) {
      const EdgeFeature ef = extract_edge_features(out.features, 0, corners[static_cast<std::size_t>(e.a)],
                                                   corners[static_cast<std::size_t>(e.b)], side);
      it = cls_cache.emplace(e, model.classifier.score(ef)).first;
    }
    s.selected.push_back({e, s.expanded.scores[idx], it->second, s.expanded.origin[idx]});
  }
  s.prob_map = std::move(out.prob_map);
  return s;
}

std::vector<EdgePair> decide_edges(const ImageScores& scores, const DecisionThresholds& th,
                                   bool use_classifier) {
  th.validate();
  std::vector<EdgePair> out;
  for (const auto& e : scores.selected) {
    const bool pass = use_classifier ? decide(e.seg, e.cls, th) == 1 : e.seg > th.seg;
    if (pass) out.push_back(e.edge);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PlanarGraph run_pipeline(const Tensor4& image, std::span<const Point> corners, const Model& model,
                         const PipelineConfig& cfg) {
  require(model.trained, ErrorCode::State, "model has not been trained");
  const ImageScores s = score_image(model, image, corners, cfg);
  return {std::vector<Point>(corners.begin(), corners.end()), decide_edges(s, cfg.thresholds)};
}

Tensor4 training_mask(const AnnotationRecord& rec, int dilation) {
  return rasterize_edges(rec.graph, rec.side, dilation);
}

std::vector<LabeledEdge> classifier_dataset(const SegNet& backbone, std::span<const Sample> samples,
                                            const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<LabeledEdge> out;
  const int side = backbone.config().side;
  for (const Sample& s : samples) {
    const auto& corners = s.annotation.graph.corners;
    SideOutputs fwd = backbone.forward(s.image);
    const auto candidates = enumerate_candidates(corners);
    const ScoredEdgeSet scored = score_candidates(fwd.prob_map.view(0, 0), corners, candidates, cfg.neighborhood);
    const ScoredEdgeSet expanded = expand_scores(scored, cfg.expand_target);
    const auto sel = top_k(expanded.scores, std::min<int>(cfg.top_k, static_cast<int>(expanded.size())));
    std::vector<EdgePair> unique;
    for (int i : sel) unique.push_back(expanded.edges[static_cast<std::size_t>(i)]);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const EdgePair& e : unique) {
      LabeledEdge le;
      le.feature = extract_edge_features(fwd.features, 0, corners[static_cast<std::size_t>(e.a)],
                                         corners[static_cast<std::size_t>(e.b)], side);
      le.label = s.annotation.graph.has_edge(e.a, e.b) ? 1 : 0;
      out.push_back(std::move(le));
    }
  }
  return out;
}

std::string TrainingHistory::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "stage,epoch,loss,lr\n";
  for (std::size_t i = 0; i < seg.loss.size(); ++i)
    os << "backbone," << i + 1 << ',' << seg.loss[i] << ',' << seg.lr[i] << '\n';
  for (std::size_t i = 0; i < classifier.size(); ++i) os << "classifier," << i + 1 << ',' << classifier[i] << ",\n";
  return os.str();
}

Model train_model(std::span<const Sample> samples, const TrainConfig& cfg, TrainingHistory* history) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "no training samples");
  cfg.pipe.validate();
  Model model(cfg.net);
  std::vector<Tensor4> images;
  std::vector<Tensor4> masks;
  for (const Sample& s : samples) {
    images.push_back(s.image);
    masks.push_back(training_mask(s.annotation, cfg.mask_dilation));
  }
  SegTrainConfig seg = cfg.seg;
  if (cfg.log && !seg.on_epoch)
    seg.on_epoch = [&cfg](int epoch, double loss, double lr) {
      cfg.log("backbone epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss) +
              " lr " + std::to_string(lr));
    };
  TrainCurve curve = train_segnet(model.backbone, images, masks, seg);

  const auto data = classifier_dataset(model.backbone, samples, cfg.pipe);
  ClassifierTrainConfig cls = cfg.cls;
  if (cfg.log && !cls.on_epoch)
    cls.on_epoch = [&cfg](int epoch, double loss) {
      cfg.log("classifier epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss));
    };
  std::vector<double> cls_loss = train_classifier(model.classifier, data, cls);
  model.trained = true;
  if (history) *history = {std::move(curve), std::move(cls_loss)};
  return model;
}

}  // namespace swapgraph
