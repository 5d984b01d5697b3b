/*
 * Copyright 2026 The SwapGraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the swapgraph library. All functions return an sg_status;
 * on failure sg_last_error() describes the problem (per thread). Paths are
 * UTF-8. Dataset ranges are half-open [begin, end); end < 0 means "to the
 * last image of the dataset". */
#ifndef SWAPGRAPH_SWAPGRAPH_H
#define SWAPGRAPH_SWAPGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(SWAPGRAPH_BUILDING_LIBRARY)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_SHAPE = 2,
  SG_ERR_IO = 3,
  SG_ERR_PARSE = 4,
  SG_ERR_STATE = 5,
  SG_ERR_NUMERIC = 6,
  SG_ERR_INTERNAL = 99
} sg_status;

typedef enum sg_swap_mode { SG_NOSWAP = 0, SG_SWAP = 1, SG_SWAPNN = 2 } sg_swap_mode;
typedef enum sg_decay_mode { SG_DECAY_LR = 0, SG_DECAY_WEIGHT = 1 } sg_decay_mode;

typedef struct sg_model sg_model;

typedef void (*sg_log_fn)(const char* message, void* user);

SG_API const char* sg_version(void);
SG_API const char* sg_last_error(void);
SG_API const char* sg_status_name(sg_status status);

/* ---- swap permutation and parameter report ---- */

/* Writes `channels` entries: out_table[i] is the channel that output channel
 * i reads from. */
SG_API sg_status sg_swap_permutation(int channels, int key, int* out_table);

typedef struct sg_bench_row {
  int width;
  uint64_t conv3x3;
  uint64_t conv1x1;
  uint64_t swap_added;
  uint64_t swap_block;
  uint64_t swapnn_added;
  uint64_t swapnn_block;
} sg_bench_row;

/* widths may be NULL (count ignored) for the default {16, 64, 256, 1024};
 * out_rows needs room for 4 rows in that case. */
SG_API sg_status sg_bench_params(const int* widths, size_t count, sg_bench_row* out_rows);
SG_API sg_status sg_write_bench_csv(const int* widths, size_t count, const char* csv_path);

/* ---- synthetic data ---- */

typedef struct sg_dataset_options {
  uint64_t seed;
  int count;
  int min_corners;
  int max_corners;
  double noise;
} sg_dataset_options;

SG_API void sg_dataset_options_init(sg_dataset_options* opts);
SG_API sg_status sg_generate_dataset(const sg_dataset_options* opts, const char* dir);

/* ---- model ---- */

typedef struct sg_train_options {
  sg_swap_mode mode;
  int swap_key;
  int encoder_convs;
  int seg_epochs;
  int batch_size;
  double lr;
  double decay;
  sg_decay_mode decay_mode;
  int cls_epochs;
  double cls_lr;
  double negative_ratio;
  int mask_dilation;
  uint64_t seed; /* network initialisation and shuffling derive from it */
  sg_log_fn log; /* optional progress callback */
  void* log_user;
  const char* loss_csv_path; /* optional per-epoch loss curve (sg_train only) */
} sg_train_options;

typedef struct sg_pipeline_options {
  int expand_target;
  int top_k;
  int neighbors; /* 4, 8 or 16 */
  double seg_threshold;
  double cls_threshold;
} sg_pipeline_options;

SG_API void sg_train_options_init(sg_train_options* opts);
SG_API void sg_pipeline_options_init(sg_pipeline_options* opts);

/* Untrained model with freshly initialised weights. */
SG_API sg_status sg_model_create(const sg_train_options* opts, sg_model** out);
SG_API sg_status sg_model_load(const char* path, sg_model** out);
SG_API sg_status sg_model_save(const sg_model* model, const char* path);
SG_API void sg_model_destroy(sg_model* model);
SG_API sg_status sg_model_param_count(const sg_model* model, uint64_t* out);
SG_API sg_status sg_model_is_trained(const sg_model* model, int* out);

SG_API sg_status sg_train(const char* dataset_dir, int begin, int end, const sg_train_options* train,
                          const sg_pipeline_options* pipe, sg_model** out);

/* ---- inference and evaluation ---- */

typedef struct sg_metrics {
  double precision;
  double recall;
  double f1;
  double mae;
  double mask_recall; /* mask pixels with probability > 0.5 */
  int64_t tp;
  int64_t fp;
  int64_t fn;
} sg_metrics;

/* In-memory inference on a side x side row-major image in [0, 1] with
 * corners given as x0, y0, x1, y1, ... Writes predicted pairs as a0, b0,
 * a1, b1, ... into out_pairs (capacity in pairs) and their number into
 * out_count. prob_map, when non-NULL, receives side * side values. */
SG_API sg_status sg_infer_raw(const sg_model* model, const double* pixels, int side,
                              const double* corners_xy, int corner_count, const sg_pipeline_options* pipe,
                              int* out_pairs, size_t capacity, size_t* out_count, double* prob_map);

/* File-based inference on one image and its annotation (corners are read
 * from it; its edges serve as ground truth). Any output path may be NULL. */
SG_API sg_status sg_infer(const sg_model* model, const char* image_path, const char* annotation_path,
                          const sg_pipeline_options* pipe, const char* graph_json_path, const char* svg_path,
                          const char* scores_json_path, sg_metrics* out_metrics);

SG_API sg_status sg_evaluate(const sg_model* model, const char* dataset_dir, int begin, int end,
                             const sg_pipeline_options* pipe, int use_classifier,
                             const char* predictions_json_path, const char* svg_dir, sg_metrics* out);

/* out_cells (optional) receives seg_count * cls_count cells, seg-major;
 * their mask_recall field is left at 0. NULL axes select the default grid. */
SG_API sg_status sg_sweep(const sg_model* model, const char* dataset_dir, int begin, int end,
                          const double* seg_thresholds, size_t seg_count, const double* cls_thresholds,
                          size_t cls_count, const sg_pipeline_options* pipe, const char* csv_path,
                          sg_metrics* out_cells);

/* Rows: noswap, swap, noswap+classifier, swap+classifier. out_rows (optional)
 * needs room for 4 entries, out_params (optional) for 4 backbone sizes. */
SG_API sg_status sg_ablation(const char* dataset_dir, int train_begin, int train_end, int test_begin,
                             int test_end, const sg_train_options* train, const sg_pipeline_options* pipe,
                             const char* csv_path, const char* predictions_json_path, sg_metrics* out_rows,
                             uint64_t* out_params);

#ifdef __cplusplus
}
#endif

#endif
