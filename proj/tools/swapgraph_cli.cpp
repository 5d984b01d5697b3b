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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swapgraph/swapgraph.h"

namespace {

struct Common {
  std::uint64_t seed = 42;
  bool quiet = false;
};

struct PipelineFlags {
  sg_pipeline_options opts{};
  PipelineFlags() { sg_pipeline_options_init(&opts); }

  void attach(CLI::App* app) {
    app->add_option("--seg-threshold", opts.seg_threshold, "segmentation score threshold")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--cls-threshold", opts.cls_threshold, "classifier score threshold")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--topk", opts.top_k, "edges kept after expansion")->check(CLI::PositiveNumber);
    app->add_option("--expand-target", opts.expand_target, "length of the expanded score list")
        ->check(CLI::PositiveNumber);
    app->add_option("--neighbors", opts.neighbors, "neighbourhood used by the edge scorer")
        ->check(CLI::IsMember({4, 8, 16}));
  }
};

struct TrainFlags {
  sg_train_options opts{};
  std::string mode = "swap";
  std::string decay_mode = "lr";
  TrainFlags() { sg_train_options_init(&opts); }

  void attach(CLI::App* app) {
    app->add_option("--mode", mode, "swap variant in the encoder")
        ->check(CLI::IsMember({"noswap", "swap", "swapnn"}));
    app->add_option("--key", opts.swap_key, "XOR key of the swap permutation")->check(CLI::NonNegativeNumber);
    app->add_option("--encoder-convs", opts.encoder_convs, "3x3 convolutions per encoder level")
        ->check(CLI::PositiveNumber);
    app->add_option("--epochs", opts.seg_epochs, "backbone epochs")->check(CLI::NonNegativeNumber);
    app->add_option("--cls-epochs", opts.cls_epochs, "classifier epochs")->check(CLI::NonNegativeNumber);
    app->add_option("--batch", opts.batch_size, "batch size")->check(CLI::PositiveNumber);
    app->add_option("--lr", opts.lr, "backbone learning rate")->check(CLI::PositiveNumber);
    app->add_option("--cls-lr", opts.cls_lr, "classifier learning rate")->check(CLI::PositiveNumber);
    app->add_option("--decay", opts.decay, "per-epoch multiplicative decay")->check(CLI::Range(0.0, 1.0));
    app->add_option("--decay-mode", decay_mode, "decay target")->check(CLI::IsMember({"lr", "weight"}));
    app->add_option("--negative-ratio", opts.negative_ratio, "negatives kept per positive each epoch");
    app->add_option("--mask-dilation", opts.mask_dilation, "dilation of the training mask")
        ->check(CLI::NonNegativeNumber);
  }

  sg_train_options finish(const Common& c) {
    opts.seed = c.seed;
    opts.mode = mode == "noswap" ? SG_NOSWAP : mode == "swapnn" ? SG_SWAPNN : SG_SWAP;
    opts.decay_mode = decay_mode == "weight" ? SG_DECAY_WEIGHT : SG_DECAY_LR;
    if (!c.quiet) {
      opts.log = [](const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); };
    }
    return opts;
  }
};

int report(sg_status s, const char* what) {
  if (s == SG_OK) return 0;
  std::fprintf(stderr, "error: %s failed (%s): %s\n", what, sg_status_name(s), sg_last_error());
  return 1;
}

void print_metrics(const char* label, const sg_metrics& m) {
  std::printf("%s precision=%.6f recall=%.6f f1=%.6f mae=%.6f mask_recall@0.5=%.6f tp=%lld fp=%lld fn=%lld\n",
              label, m.precision, m.recall, m.f1, m.mae, m.mask_recall, static_cast<long long>(m.tp),
              static_cast<long long>(m.fp), static_cast<long long>(m.fn));
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct ModelHandle {
  sg_model* m = nullptr;
  ~ModelHandle() { sg_model_destroy(m); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building outline reconstruction from rasters and corner annotations"};
  app.set_config("--config", "", "TOML configuration file; command-line values take precedence");
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_flag("-q,--quiet", common.quiet, "suppress progress output");
  app.set_version_flag("--version", std::string(sg_version()));

  int rc = 0;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  sg_dataset_options ds{};
  sg_dataset_options_init(&ds);
  std::string gen_out;
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  gen->add_option("--count", ds.count, "number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--min-corners", ds.min_corners, "fewest corners per building")->check(CLI::Range(4, 12));
  gen->add_option("--max-corners", ds.max_corners, "most corners per building")->check(CLI::Range(4, 12));
  gen->add_option("--noise", ds.noise, "half-width of the uniform pixel noise")->check(CLI::Range(0.0, 0.5));
  gen->callback([&] {
    ds.seed = common.seed;
    rc = report(sg_generate_dataset(&ds, gen_out.c_str()), "gen-data");
    if (rc == 0 && !common.quiet) std::printf("wrote %d scenes to %s\n", ds.count, gen_out.c_str());
  });

  // train
  auto* train = app.add_subcommand("train", "train the backbone and the edge classifier");
  TrainFlags train_flags;
  PipelineFlags train_pipe;
  std::string train_data, train_out;
  int train_begin = 0, train_end = 160;
  train->add_option("-d,--data", train_data, "dataset directory")->required();
  train->add_option("--begin", train_begin, "first training image")->check(CLI::NonNegativeNumber);
  train->add_option("--end", train_end, "one past the last training image (-1: all)");
  train->add_option("-o,--out", train_out, "checkpoint path")->required();
  std::string train_loss_csv;
  train->add_option("--loss-csv", train_loss_csv, "per-epoch loss curve as CSV");
  train_flags.attach(train);
  train_pipe.attach(train);
  train->callback([&] {
    sg_train_options t = train_flags.finish(common);
    t.loss_csv_path = opt(train_loss_csv);
    ModelHandle h;
    rc = report(sg_train(train_data.c_str(), train_begin, train_end, &t, &train_pipe.opts, &h.m), "train");
    if (rc == 0) rc = report(sg_model_save(h.m, train_out.c_str()), "saving the checkpoint");
    if (rc == 0 && !common.quiet) std::printf("saved %s\n", train_out.c_str());
  });

  // infer
  auto* infer = app.add_subcommand("infer", "reconstruct the outline of one image");
  PipelineFlags infer_pipe;
  std::string infer_model, infer_image, infer_ann, infer_graph, infer_svg, infer_scores;
  infer->add_option("-m,--model", infer_model, "checkpoint")->required();
  infer->add_option("-i,--image", infer_image, "PGM image")->required();
  infer->add_option("-a,--annotation", infer_ann, "annotation JSON supplying the corners")->required();
  infer->add_option("-g,--graph-out", infer_graph, "predicted graph JSON");
  infer->add_option("--svg", infer_svg, "SVG overlay");
  infer->add_option("--dump-scores", infer_scores, "expanded and selected edge scores as JSON");
  infer_pipe.attach(infer);
  infer->callback([&] {
    ModelHandle h;
    rc = report(sg_model_load(infer_model.c_str(), &h.m), "loading the checkpoint");
    if (rc) return;
    sg_metrics m{};
    rc = report(sg_infer(h.m, infer_image.c_str(), infer_ann.c_str(), &infer_pipe.opts, opt(infer_graph),
                         opt(infer_svg), opt(infer_scores), &m),
                "infer");
    if (rc == 0 && !common.quiet) print_metrics("image", m);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset range");
  PipelineFlags eval_pipe;
  std::string eval_model, eval_data, eval_preds, eval_svg;
  int eval_begin = 160, eval_end = -1;
  bool eval_seg_only = false;
  eval->add_option("-m,--model", eval_model, "checkpoint")->required();
  eval->add_option("-d,--data", eval_data, "dataset directory")->required();
  eval->add_option("--begin", eval_begin, "first image")->check(CLI::NonNegativeNumber);
  eval->add_option("--end", eval_end, "one past the last image (-1: all)");
  eval->add_option("--predictions", eval_preds, "dump per-image predictions as JSON");
  eval->add_option("--svg-dir", eval_svg, "write one SVG overlay per image");
  eval->add_flag("--seg-only", eval_seg_only, "decide on the segmentation score alone");
  eval_pipe.attach(eval);
  eval->callback([&] {
    ModelHandle h;
    rc = report(sg_model_load(eval_model.c_str(), &h.m), "loading the checkpoint");
    if (rc) return;
    sg_metrics m{};
    rc = report(sg_evaluate(h.m, eval_data.c_str(), eval_begin, eval_end, &eval_pipe.opts, eval_seg_only ? 0 : 1,
                            opt(eval_preds), opt(eval_svg), &m),
                "eval");
    if (rc == 0) print_metrics("eval", m);
  });

  // sweep
  auto* sw = app.add_subcommand("sweep", "threshold grid over a dataset range");
  PipelineFlags sweep_pipe;
  std::string sweep_model, sweep_data, sweep_out;
  int sweep_begin = 160, sweep_end = -1;
  std::vector<double> seg_grid = {0.5, 0.6, 0.7, 0.8}, cls_grid = {0.4, 0.5, 0.6, 0.7};
  sw->add_option("-m,--model", sweep_model, "checkpoint")->required();
  sw->add_option("-d,--data", sweep_data, "dataset directory")->required();
  sw->add_option("--begin", sweep_begin, "first image")->check(CLI::NonNegativeNumber);
  sw->add_option("--end", sweep_end, "one past the last image (-1: all)");
  sw->add_option("-o,--out", sweep_out, "CSV report")->required();
  sw->add_option("--seg-grid", seg_grid, "segmentation thresholds")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sw->add_option("--cls-grid", cls_grid, "classifier thresholds")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sweep_pipe.attach(sw);
  sw->callback([&] {
    ModelHandle h;
    rc = report(sg_model_load(sweep_model.c_str(), &h.m), "loading the checkpoint");
    if (rc) return;
    std::vector<sg_metrics> cells(seg_grid.size() * cls_grid.size());
    rc = report(sg_sweep(h.m, sweep_data.c_str(), sweep_begin, sweep_end, seg_grid.data(), seg_grid.size(),
                         cls_grid.data(), cls_grid.size(), &sweep_pipe.opts, sweep_out.c_str(), cells.data()),
                "sweep");
    if (rc == 0 && !common.quiet) {
      std::printf("%-8s", "seg\\cls");
      for (double c : cls_grid) std::printf("  %8.2f", c);
      std::printf("   (F1)\n");
      for (std::size_t i = 0; i < seg_grid.size(); ++i) {
        std::printf("%-8.2f", seg_grid[i]);
        for (std::size_t j = 0; j < cls_grid.size(); ++j) std::printf("  %8.4f", cells[i * cls_grid.size() + j].f1);
        std::printf("\n");
      }
    }
  });

  // ablation
  auto* abl = app.add_subcommand("ablation", "train NoSwap and Swap backbones, report four rows");
  TrainFlags abl_flags;
  PipelineFlags abl_pipe;
  std::string abl_data, abl_out, abl_preds;
  int abl_train_end = 160, abl_test_end = -1;
  abl->add_option("-d,--data", abl_data, "dataset directory")->required();
  abl->add_option("--train-end", abl_train_end, "images [0, train-end) train, the rest are held out")
      ->check(CLI::PositiveNumber);
  abl->add_option("--test-end", abl_test_end, "one past the last held-out image (-1: all)");
  abl->add_option("-o,--out", abl_out, "CSV report")->required();
  abl->add_option("--predictions", abl_preds, "dump per-row predictions as JSON");
  abl_flags.attach(abl);
  abl_pipe.attach(abl);
  abl->callback([&] {
    const sg_train_options t = abl_flags.finish(common);
    sg_metrics rows[4]{};
    std::uint64_t params[4]{};
    rc = report(sg_ablation(abl_data.c_str(), 0, abl_train_end, abl_train_end, abl_test_end, &t, &abl_pipe.opts,
                            abl_out.c_str(), opt(abl_preds), rows, params),
                "ablation");
    if (rc == 0) {
      const char* names[4] = {"noswap", "swap", "noswap+classifier", "swap+classifier"};
      for (int i = 0; i < 4; ++i) print_metrics(names[i], rows[i]);
    }
  });

  // bench-params
  auto* bench = app.add_subcommand("bench-params", "parameter counts of 3x3 conv vs swap blocks");
  std::string bench_out, perm_out;
  std::vector<int> widths = {16, 64, 256, 1024};
  int perm_channels = 16, perm_key = 5;
  bench->add_option("-o,--out", bench_out, "CSV report");
  bench->add_option("--widths", widths, "channel widths")->delimiter(',')->check(CLI::Range(2, 4096));
  bench->add_option("--perm-out", perm_out, "also write a swap permutation as JSON");
  bench->add_option("--perm-channels", perm_channels, "channels of the exported permutation")
      ->check(CLI::Range(2, 1 << 16));
  bench->add_option("--perm-key", perm_key, "key of the exported permutation")->check(CLI::NonNegativeNumber);
  bench->callback([&] {
    std::vector<sg_bench_row> rows(widths.size());
    rc = report(sg_bench_params(widths.data(), widths.size(), rows.data()), "bench-params");
    if (rc) return;
    if (!bench_out.empty()) {
      rc = report(sg_write_bench_csv(widths.data(), widths.size(), bench_out.c_str()), "writing the report");
      if (rc) return;
    }
    std::printf("%8s %12s %12s %10s %12s %12s %14s\n", "width", "conv3x3", "conv1x1", "swap+", "swap+1x1",
                "swapnn+", "swapnn+1x1/2");
    for (const auto& r : rows)
      std::printf("%8d %12llu %12llu %10llu %12llu %12llu %14llu\n", r.width,
                  static_cast<unsigned long long>(r.conv3x3), static_cast<unsigned long long>(r.conv1x1),
                  static_cast<unsigned long long>(r.swap_added), static_cast<unsigned long long>(r.swap_block),
                  static_cast<unsigned long long>(r.swapnn_added),
                  static_cast<unsigned long long>(r.swapnn_block));
    if (!perm_out.empty()) {
      std::vector<int> table(static_cast<std::size_t>(perm_channels));
      rc = report(sg_swap_permutation(perm_channels, perm_key, table.data()), "building the permutation");
      if (rc) return;
      nlohmann::json j{{"channels", perm_channels}, {"key", perm_key}, {"table", table}};
      std::ofstream f(perm_out, std::ios::trunc);
      f << j.dump() << "\n";
      f.flush();
      if (!f) {
        std::fprintf(stderr, "error: cannot write %s\n", perm_out.c_str());
        rc = 1;
      }
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return rc;
}
