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

#include "swapgraph/swapgraph.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "swapgraph/data_io.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/evaluation.hpp"
#include "swapgraph/pipeline.hpp"
#include "swapgraph/rng.hpp"
#include "swapgraph/swap.hpp"

struct sg_model {
  swapgraph::Model model;
};

namespace {

using namespace swapgraph;

thread_local std::string g_last_error;

sg_status set_error(sg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
sg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return SG_OK;
  } catch (const Error& e) {
    return set_error(static_cast<sg_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SG_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SG_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

SwapMode to_mode(sg_swap_mode m) {
  switch (m) {
    case SG_NOSWAP: return SwapMode::NoSwap;
    case SG_SWAP: return SwapMode::Swap;
    case SG_SWAPNN: return SwapMode::SwapNN;
  }
  fail(ErrorCode::InvalidArgument, "unknown swap mode " + std::to_string(static_cast<int>(m)));
}

SegNetConfig net_config(const sg_train_options& o) {
  SegNetConfig c;
  c.mode = to_mode(o.mode);
  c.swap_key = o.swap_key;
  c.encoder_convs = o.encoder_convs;
  c.seed = mix_seed(o.seed, 0);
  c.validate();
  return c;
}

TrainConfig train_config(const sg_train_options& o, const PipelineConfig& pipe) {
  TrainConfig t;
  t.net = net_config(o);
  t.seg.epochs = o.seg_epochs;
  t.seg.batch_size = o.batch_size;
  t.seg.lr = o.lr;
  t.seg.decay = o.decay;
  t.seg.decay_mode = o.decay_mode == SG_DECAY_WEIGHT ? DecayMode::Weight : DecayMode::LearningRate;
  t.seg.seed = mix_seed(o.seed, 1);
  t.cls.epochs = o.cls_epochs;
  t.cls.batch_size = o.batch_size;
  t.cls.lr = o.cls_lr;
  t.cls.negative_ratio = o.negative_ratio;
  t.cls.seed = mix_seed(o.seed, 2);
  t.pipe = pipe;
  t.mask_dilation = o.mask_dilation;
  require(o.seg_epochs >= 0 && o.cls_epochs >= 0, ErrorCode::InvalidArgument, "epochs must be >= 0");
  require(o.batch_size >= 1, ErrorCode::InvalidArgument, "batch size must be >= 1");
  require(o.lr > 0 && o.cls_lr > 0, ErrorCode::InvalidArgument, "learning rates must be > 0");
  require(o.mask_dilation >= 0, ErrorCode::InvalidArgument, "mask dilation must be >= 0");
  if (o.log) {
    sg_log_fn fn = o.log;
    void* user = o.log_user;
    t.log = [fn, user](const std::string& msg) { fn(msg.c_str(), user); };
  }
  return t;
}

PipelineConfig pipeline_config(const sg_pipeline_options* p) {
  sg_pipeline_options d;
  sg_pipeline_options_init(&d);
  const sg_pipeline_options& o = p ? *p : d;
  PipelineConfig c;
  c.expand_target = o.expand_target;
  c.top_k = o.top_k;
  c.neighborhood = neighborhood_from_int(o.neighbors);
  c.thresholds = {o.seg_threshold, o.cls_threshold};
  c.validate();
  return c;
}

std::vector<Sample> load_range(const char* dir, int begin, int end) {
  need(dir, "dataset directory");
  const int size = dataset_size(dir);
  require(size > 0, ErrorCode::Io, std::string("no dataset found in '") + dir + "'");
  if (end < 0) end = size;
  require(begin >= 0 && begin < end && end <= size, ErrorCode::InvalidArgument,
          "range [" + std::to_string(begin) + ", " + std::to_string(end) + ") is outside the dataset of " +
              std::to_string(size) + " images");
  return load_dataset(dir, begin, end);
}

void fill(sg_metrics* out, const Metrics& m, double mask_rec) {
  out->precision = m.precision;
  out->recall = m.recall;
  out->f1 = m.f1;
  out->mae = m.mae;
  out->mask_recall = mask_rec;
  out->tp = m.tp;
  out->fp = m.fp;
  out->fn = m.fn;
}

std::string graph_json(const AnnotationRecord& truth, const std::vector<EdgePair>& edges) {
  AnnotationRecord rec = truth;
  rec.graph.edges = edges;
  return annotation_to_json(rec);
}

std::string scores_json(const ImageScores& s) {
  nlohmann::json j;
  j["format"] = "swapgraph-scores";
  j["version"] = 1;
  j["expanded"] = nlohmann::json::parse(scored_edges_to_json(s.expanded, s.selected_index));
  j["selected"] = nlohmann::json::array();
  for (const auto& e : s.selected)
    j["selected"].push_back({{"a", e.edge.a}, {"b", e.edge.b}, {"seg", e.seg}, {"cls", e.cls}, {"copy", e.origin}});
  return j.dump(1) + "\n";
}

}  // namespace

extern "C" {

const char* sg_version(void) { return "0.1.0"; }

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_status_name(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SG_ERR_SHAPE: return "shape mismatch";
    case SG_ERR_IO: return "i/o error";
    case SG_ERR_PARSE: return "parse error";
    case SG_ERR_STATE: return "invalid state";
    case SG_ERR_NUMERIC: return "numeric error";
    case SG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

sg_status sg_swap_permutation(int channels, int key, int* out_table) {
  return guarded([&] {
    need(out_table, "out_table");
    const SwapPermutation perm = build_swap_permutation({key, channels});
    std::memcpy(out_table, perm.table().data(), perm.table().size() * sizeof(int));
  });
}

sg_status sg_bench_params(const int* widths, size_t count, sg_bench_row* out_rows) {
  return guarded([&] {
    need(out_rows, "out_rows");
    const auto rows = widths ? bench_params(std::span<const int>(widths, count)) : bench_params();
    for (std::size_t i = 0; i < rows.size(); ++i)
      out_rows[i] = {rows[i].width,        rows[i].conv3x3,      rows[i].conv1x1,     rows[i].swap_added,
                     rows[i].swap_block,   rows[i].swapnn_added, rows[i].swapnn_block};
  });
}

sg_status sg_write_bench_csv(const int* widths, size_t count, const char* csv_path) {
  return guarded([&] {
    need(csv_path, "csv_path");
    const auto rows = widths ? bench_params(std::span<const int>(widths, count)) : bench_params();
    write_file(csv_path, bench_to_csv(rows));
  });
}

void sg_dataset_options_init(sg_dataset_options* opts) {
  if (!opts) return;
  const SyntheticConfig d;
  *opts = {d.seed, d.count, d.min_corners, d.max_corners, d.noise};
}

sg_status sg_generate_dataset(const sg_dataset_options* opts, const char* dir) {
  return guarded([&] {
    need(opts, "opts");
    need(dir, "dir");
    SyntheticConfig c;
    c.seed = opts->seed;
    c.count = opts->count;
    c.min_corners = opts->min_corners;
    c.max_corners = opts->max_corners;
    c.noise = opts->noise;
    write_dataset(c, dir);
  });
}

void sg_train_options_init(sg_train_options* opts) {
  if (!opts) return;
  const SegNetConfig net;
  const SegTrainConfig seg;
  const ClassifierTrainConfig cls;
  *opts = {};
  opts->mode = SG_SWAP;
  opts->swap_key = net.swap_key;
  opts->encoder_convs = net.encoder_convs;
  opts->seg_epochs = seg.epochs;
  opts->batch_size = seg.batch_size;
  opts->lr = seg.lr;
  opts->decay = seg.decay;
  opts->decay_mode = SG_DECAY_LR;
  opts->cls_epochs = cls.epochs;
  opts->cls_lr = cls.lr;
  opts->negative_ratio = cls.negative_ratio;
  opts->mask_dilation = 1;
  opts->seed = 42;
}

void sg_pipeline_options_init(sg_pipeline_options* opts) {
  if (!opts) return;
  const PipelineConfig d;
  *opts = {d.expand_target, d.top_k, static_cast<int>(d.neighborhood), d.thresholds.seg, d.thresholds.cls};
}

sg_status sg_model_create(const sg_train_options* opts, sg_model** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    sg_train_options d;
    sg_train_options_init(&d);
    *out = new sg_model{Model(net_config(opts ? *opts : d))};
  });
}

sg_status sg_model_load(const char* path, sg_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new sg_model{load_model(path)};
  });
}

sg_status sg_model_save(const sg_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    save_model(model->model, path);
  });
}

void sg_model_destroy(sg_model* model) { delete model; }

sg_status sg_model_param_count(const sg_model* model, uint64_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.backbone.param_count() + model->model.classifier.head.param_count() +
           model->model.classifier.fusion.size();
  });
}

sg_status sg_model_is_trained(const sg_model* model, int* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.trained ? 1 : 0;
  });
}

sg_status sg_train(const char* dataset_dir, int begin, int end, const sg_train_options* train,
                   const sg_pipeline_options* pipe, sg_model** out) {
  return guarded([&] {
    need(train, "train options");
    need(out, "out");
    *out = nullptr;
    const auto samples = load_range(dataset_dir, begin, end);
    const TrainConfig cfg = train_config(*train, pipeline_config(pipe));
    TrainingHistory history;
    auto m = std::make_unique<sg_model>(sg_model{train_model(samples, cfg, &history)});
    if (train->loss_csv_path) write_file(train->loss_csv_path, history.to_csv());
    *out = m.release();
  });
}

sg_status sg_infer_raw(const sg_model* model, const double* pixels, int side, const double* corners_xy,
                       int corner_count, const sg_pipeline_options* pipe, int* out_pairs, size_t capacity,
                       size_t* out_count, double* prob_map) {
  return guarded([&] {
    need(model, "model");
    need(pixels, "pixels");
    need(corners_xy, "corners_xy");
    need(out_count, "out_count");
    require(side >= 1, ErrorCode::InvalidArgument, "side must be >= 1");
    require(corner_count >= 2, ErrorCode::InvalidArgument, "pipeline needs at least 2 corners");
    require(model->model.trained, ErrorCode::State, "model has not been trained");
    const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    Tensor4 image(Shape4{1, 1, side, side}, std::vector<double>(pixels, pixels + n));
    std::vector<Point> corners;
    for (int i = 0; i < corner_count; ++i) corners.push_back({corners_xy[2 * i], corners_xy[2 * i + 1]});
    const PipelineConfig cfg = pipeline_config(pipe);
    const ImageScores s = score_image(model->model, image, corners, cfg);
    const auto edges = decide_edges(s, cfg.thresholds);
    *out_count = edges.size();
    if (edges.size() > capacity || (!edges.empty() && !out_pairs))
      fail(ErrorCode::InvalidArgument,
           "output buffer holds " + std::to_string(capacity) + " pairs, " + std::to_string(edges.size()) +
               " needed");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      out_pairs[2 * i] = edges[i].a;
      out_pairs[2 * i + 1] = edges[i].b;
    }
    if (prob_map) std::memcpy(prob_map, s.prob_map.data().data(), n * sizeof(double));
  });
}

sg_status sg_infer(const sg_model* model, const char* image_path, const char* annotation_path,
                   const sg_pipeline_options* pipe, const char* graph_json_path, const char* svg_path,
                   const char* scores_json_path, sg_metrics* out_metrics) {
  return guarded([&] {
    need(model, "model");
    need(image_path, "image_path");
    need(annotation_path, "annotation_path");
    require(model->model.trained, ErrorCode::State, "model has not been trained");
    const Tensor4 image = load_image(image_path);
    const AnnotationRecord truth = load_annotation(annotation_path);
    const PipelineConfig cfg = pipeline_config(pipe);
    const ImageScores s = score_image(model->model, image, truth.graph.corners, cfg);
    const auto edges = decide_edges(s, cfg.thresholds);
    const PlanarGraph predicted{truth.graph.corners, edges};
    if (graph_json_path) write_file(graph_json_path, graph_json(truth, edges));
    if (svg_path) render_svg(image, predicted, truth.graph, svg_path);
    if (scores_json_path) write_file(scores_json_path, scores_json(s));
    if (out_metrics) {
      Metrics m = eval_edges(predicted, truth.graph);
      const Tensor4 mask = training_mask(truth, 1);
      m.mae = eval_mae(s.prob_map, mask);
      fill(out_metrics, m, mask_recall(s.prob_map, mask));
    }
  });
}

sg_status sg_evaluate(const sg_model* model, const char* dataset_dir, int begin, int end,
                      const sg_pipeline_options* pipe, int use_classifier, const char* predictions_json_path,
                      const char* svg_dir, sg_metrics* out) {
  return guarded([&] {
    need(model, "model");
    const auto samples = load_range(dataset_dir, begin, end);
    const PipelineConfig cfg = pipeline_config(pipe);
    const EvalReport r = evaluate(model->model, samples, cfg, use_classifier != 0);
    if (predictions_json_path) {
      AblationReport dump;
      AblationRow row;
      row.name = use_classifier ? "eval" : "eval-seg-only";
      row.mode = model->model.backbone.config().mode;
      row.classifier = use_classifier != 0;
      row.predictions = r.predictions;
      dump.rows.push_back(std::move(row));
      write_file(predictions_json_path, dump.predictions_json());
    }
    if (svg_dir) {
      std::error_code ec;
      std::filesystem::create_directories(svg_dir, ec);
      require(!ec, ErrorCode::Io, std::string("cannot create '") + svg_dir + "': " + ec.message());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const PlanarGraph predicted{s.annotation.graph.corners, r.predictions[i].predicted};
        render_svg(s.image, predicted, s.annotation.graph,
                   (std::filesystem::path(svg_dir) / (s.annotation.image_id + ".svg")).string());
      }
    }
    if (out) fill(out, r.metrics, r.mask_recall);
  });
}

sg_status sg_sweep(const sg_model* model, const char* dataset_dir, int begin, int end,
                   const double* seg_thresholds, size_t seg_count, const double* cls_thresholds,
                   size_t cls_count, const sg_pipeline_options* pipe, const char* csv_path,
                   sg_metrics* out_cells) {
  return guarded([&] {
    need(model, "model");
    const std::span<const double> seg =
        seg_thresholds ? std::span<const double>(seg_thresholds, seg_count) : std::span<const double>(kDefaultSegGrid);
    const std::span<const double> cls =
        cls_thresholds ? std::span<const double>(cls_thresholds, cls_count) : std::span<const double>(kDefaultClsGrid);
    for (double t : seg) DecisionThresholds{t, 0.0}.validate();
    for (double t : cls) DecisionThresholds{0.0, t}.validate();
    const auto samples = load_range(dataset_dir, begin, end);
    const SweepGrid grid = sweep(model->model, samples, seg, cls, pipeline_config(pipe));
    if (csv_path) write_file(csv_path, grid.to_csv());
    if (out_cells)
      for (std::size_t i = 0; i < grid.cells.size(); ++i) fill(&out_cells[i], grid.cells[i], 0.0);
  });
}

sg_status sg_ablation(const char* dataset_dir, int train_begin, int train_end, int test_begin, int test_end,
                      const sg_train_options* train, const sg_pipeline_options* pipe, const char* csv_path,
                      const char* predictions_json_path, sg_metrics* out_rows, uint64_t* out_params) {
  return guarded([&] {
    need(train, "train options");
    const auto train_set = load_range(dataset_dir, train_begin, train_end);
    const auto test_set = load_range(dataset_dir, test_begin, test_end);
    const AblationReport r = run_ablation(train_set, test_set, train_config(*train, pipeline_config(pipe)));
    if (csv_path) write_file(csv_path, r.to_csv());
    if (predictions_json_path) write_file(predictions_json_path, r.predictions_json());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      if (out_rows) fill(&out_rows[i], r.rows[i].metrics, r.rows[i].mask_recall);
      if (out_params) out_params[i] = r.rows[i].backbone_params;
    }
  });
}

}  // extern "C"
