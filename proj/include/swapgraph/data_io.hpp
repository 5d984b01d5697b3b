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
#include <string>
#include <utility>
#include <vector>

#include "swapgraph/sampler.hpp"
#include "swapgraph/tensor.hpp"

namespace swapgraph {

inline constexpr int kAnnotationVersion = 1;

struct AnnotationRecord {
  std::string image_id;
  int side = 64;
  PlanarGraph graph;

  bool operator==(const AnnotationRecord& o) const {
    return image_id == o.image_id && side == o.side && graph.corners == o.graph.corners &&
           graph.edges == o.graph.edges;
  }
};

struct SyntheticConfig {
  std::uint64_t seed = 42;
  int count = 200;
  int min_corners = 4;
  int max_corners = 12;
  int side = 64;
  double noise = 0.1;  // half-width of the additive uniform noise

  void validate() const;
};

struct Scene {
  Tensor4 image;  // (1, 1, side, side), values quantised to k/255
  AnnotationRecord annotation;
};

// Axis-aligned "skyline" footprint (rectangle, L, T, U, staircase...) with a
// corner count drawn from the configured range, rendered with contrast and
// noise. A pure function of (seed, index).
Scene generate_synthetic_scene(const SyntheticConfig& cfg, int index);

// Pixels visited by Bresenham's line algorithm, endpoints included.
std::vector<std::pair<int, int>> bresenham_line(int x0, int y0, int x1, int y1);

// Binary (1, 1, side, side) mask: Bresenham edges followed by `dilation`
// rounds of 3x3 max filtering.
Tensor4 rasterize_edges(const PlanarGraph& graph, int side, int dilation);

// True when segments ab and cd share a point that is not a common endpoint.
bool segments_cross(Point a, Point b, Point c, Point d);
// No two edges cross (edges sharing a corner may only meet at that corner).
bool is_planar_embedding(const PlanarGraph& g);

std::string annotation_to_json(const AnnotationRecord& rec);
AnnotationRecord annotation_from_json(const std::string& text);
void save_annotation(const AnnotationRecord& rec, const std::string& path);
AnnotationRecord load_annotation(const std::string& path);

// 8-bit binary PGM (P5). Values are clamped to [0, 1] and rounded to k/255.
std::string encode_pgm(const Tensor4& image);
Tensor4 decode_pgm(const std::string& bytes);
void save_image(const Tensor4& image, const std::string& path);
Tensor4 load_image(const std::string& path);

std::string render_svg_string(const Tensor4& image, const PlanarGraph& predicted,
                              const PlanarGraph& truth);
void render_svg(const Tensor4& image, const PlanarGraph& predicted, const PlanarGraph& truth,
                const std::string& path);

// dataset/{images,annotations}/NNNN.{pgm,json}
std::string image_path(const std::string& dir, int index);
std::string annotation_path(const std::string& dir, int index);
void write_dataset(const SyntheticConfig& cfg, const std::string& dir);
int dataset_size(const std::string& dir);

struct Sample {
  Tensor4 image;
  AnnotationRecord annotation;
};
std::vector<Sample> load_dataset(const std::string& dir, int begin, int end);
std::vector<Sample> generate_samples(const SyntheticConfig& cfg, int begin, int end);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace swapgraph
