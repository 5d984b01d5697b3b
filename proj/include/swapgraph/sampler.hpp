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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swapgraph/tensor.hpp"

namespace swapgraph {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Unordered corner pair stored with a < b.
struct EdgePair {
  int a = 0;
  int b = 0;

  static EdgePair make(int i, int j) { return i < j ? EdgePair{i, j} : EdgePair{j, i}; }
  auto operator<=>(const EdgePair&) const = default;
};

struct PlanarGraph {
  std::vector<Point> corners;
  std::vector<EdgePair> edges;

  // Corners inside [0, side), edge indices in range, no self-loops or
  // duplicates.
  void validate(double side) const;
  bool has_edge(int i, int j) const;
};

enum class Neighborhood { Four = 4, Eight = 8, Sixteen = 16 };

Neighborhood neighborhood_from_int(int n);
// Offsets applied jointly to both endpoints (four, eight or sixteen of them).
std::vector<Point> neighborhood_offsets(Neighborhood nb);

inline constexpr int kEdgeScorePoints = 64;

std::vector<EdgePair> enumerate_candidates(std::span<const Point> corners);

// Uniform parametric samples including both endpoints.
std::vector<Point> edge_points(Point c1, Point c2, int count);

// Bilinear interpolation on the unit cell containing (x, y); coordinates must
// lie in [0, w-1] x [0, h-1].
double bilinear_sample(const PlaneView& map, double x, double y);

// Mean of the along-edge average on the edge itself and on each neighbour
// translate, with translated points clamped into the map.
double score_edge(const PlaneView& prob, Point c1, Point c2,
                  Neighborhood nb = Neighborhood::Four, int points = kEdgeScorePoints);

struct ScoredEdgeSet {
  std::vector<EdgePair> edges;
  std::vector<double> scores;
  std::vector<int> origin;  // 0 for original entries, r for the r-th expansion copy

  std::size_t size() const { return edges.size(); }
};

ScoredEdgeSet score_candidates(const PlaneView& prob, std::span<const Point> corners,
                               std::span<const EdgePair> candidates,
                               Neighborhood nb = Neighborhood::Four);

inline constexpr double kExpansionEps = 1e-6;

// Pads to exactly `target` entries with whole copies of the list, copy r
// shifted down by r * (max + eps); longer lists are cut to their `target`
// best entries.
ScoredEdgeSet expand_scores(const ScoredEdgeSet& set, int target,
                            double eps = kExpansionEps);

struct ExpansionPlan {
  int blocks = 0;     // complete blocks, the originals included
  int remainder = 0;  // entries taken from the final partial block
};
ExpansionPlan expansion_plan(int count, int target);

// Indices of the k largest scores, sorted by descending score; ties go to
// the lower index.
std::vector<int> top_k(std::span<const double> scores, int k);

// Per-scale edge descriptors: scale l samples (side >> l) points and flattens
// them point-major, so each vector has points * channels entries.
struct EdgeFeature {
  std::vector<std::vector<double>> per_scale;
};

EdgeFeature extract_edge_features(std::span<const Tensor4> features, int sample, Point c1,
                                  Point c2, int frame_side);

std::vector<double> fuse_features(const EdgeFeature& ef, std::span<const double> weights);

struct FuseGrads {
  std::vector<double> grad_weights;
  std::vector<std::vector<double>> grad_vectors;
};
FuseGrads fuse_features_backward(const EdgeFeature& ef, std::span<const double> weights,
                                 std::span<const double> grad_fused);

std::string scored_edges_to_json(const ScoredEdgeSet& set, std::span<const int> selected);

}  // namespace swapgraph
