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

#include "swapgraph/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"
#include "swapgraph/error.hpp"

namespace swapgraph {

void PlanarGraph::validate(double side) const {
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const auto& c = corners[i];
    require(std::isfinite(c.x) && std::isfinite(c.y) && c.x >= 0 && c.y >= 0 && c.x < side &&
                c.y < side,
            ErrorCode::InvalidArgument,
            "corner " + std::to_string(i) + " lies outside the frame");
  }
  std::set<EdgePair> seen;
  const int n = static_cast<int>(corners.size());
  for (const auto& e : edges) {
    require(e.a >= 0 && e.b >= 0 && e.a < n && e.b < n, ErrorCode::InvalidArgument,
            "edge index out of range");
    require(e.a != e.b, ErrorCode::InvalidArgument, "self-loop edge");
    require(seen.insert(EdgePair::make(e.a, e.b)).second, ErrorCode::InvalidArgument,
            "duplicate edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
  }
}

bool PlanarGraph::has_edge(int i, int j) const {
  const EdgePair key = EdgePair::make(i, j);
  return std::any_of(edges.begin(), edges.end(),
                     [&](const EdgePair& e) { return EdgePair::make(e.a, e.b) == key; });
}

Neighborhood neighborhood_from_int(int n) {
  switch (n) {
    case 4: return Neighborhood::Four;
    case 8: return Neighborhood::Eight;
    case 16: return Neighborhood::Sixteen;
    default: fail(ErrorCode::InvalidArgument, "neighbourhood must be 4, 8 or 16");
  }
}

std::vector<Point> neighborhood_offsets(Neighborhood nb) {
  std::vector<Point> off = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
  if (nb == Neighborhood::Four) return off;
  off.insert(off.end(), {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}});
  if (nb == Neighborhood::Eight) return off;
  // knight-move ring completing the 16-neighbourhood
  off.insert(off.end(), {{-1, -2}, {1, -2}, {-2, -1}, {2, -1},
                         {-2, 1}, {2, 1}, {-1, 2}, {1, 2}});
  return off;
}

std::vector<EdgePair> enumerate_candidates(std::span<const Point> corners) {
  const int n = static_cast<int>(corners.size());
  require(n >= 2, ErrorCode::InvalidArgument,
          "need at least 2 corners to form candidate edges, got " + std::to_string(n));
  std::vector<EdgePair> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

std::vector<Point> edge_points(Point c1, Point c2, int count) {
  require(count >= 2, ErrorCode::InvalidArgument, "edge_points needs count >= 2");
  std::vector<Point> pts(static_cast<std::size_t>(count));
  const double denom = static_cast<double>(count - 1);
  for (int t = 0; t < count; ++t) {
    const double f = t / denom;
    pts[static_cast<std::size_t>(t)] = {c1.x + f * (c2.x - c1.x), c1.y + f * (c2.y - c1.y)};
  }
  return pts;
}

double bilinear_sample(const PlaneView& map, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0 && x <= map.w - 1 && y <= map.h - 1))
    fail(ErrorCode::InvalidArgument,
         "bilinear_sample: (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the map");
  const int x1 = map.w > 1 ? std::min(static_cast<int>(x), map.w - 2) : 0;
  const int y1 = map.h > 1 ? std::min(static_cast<int>(y), map.h - 2) : 0;
  const int x2 = std::min(x1 + 1, map.w - 1);
  const int y2 = std::min(y1 + 1, map.h - 1);
  // On a one-pixel axis the cell collapses; keep unit weights on that axis.
  const double ax = map.w > 1 ? x - x1 : 0.0;
  const double ay = map.h > 1 ? y - y1 : 0.0;
  return map.at(y1, x1) * (1 - ax) * (1 - ay) + map.at(y1, x2) * ax * (1 - ay) +
         map.at(y2, x1) * (1 - ax) * ay + map.at(y2, x2) * ax * ay;
}

namespace {

double line_average(const PlaneView& prob, Point c1, Point c2, Point offset, int points) {
  double sum = 0.0;
  for (const Point& p : edge_points(c1, c2, points)) {
    const double x = std::clamp(p.x + offset.x, 0.0, static_cast<double>(prob.w - 1));
    const double y = std::clamp(p.y + offset.y, 0.0, static_cast<double>(prob.h - 1));
    sum += bilinear_sample(prob, x, y);
  }
  return sum / points;
}

}  // namespace

double score_edge(const PlaneView& prob, Point c1, Point c2, Neighborhood nb, int points) {
  require(prob.h >= 2 && prob.w >= 2 && prob.data.size() == static_cast<std::size_t>(prob.h) * prob.w,
          ErrorCode::Shape, "score_edge: degenerate probability map");
  double total = line_average(prob, c1, c2, {0, 0}, points);
  const auto offsets = neighborhood_offsets(nb);
  for (const Point& off : offsets) total += line_average(prob, c1, c2, off, points);
  return total / static_cast<double>(offsets.size() + 1);
}

ScoredEdgeSet score_candidates(const PlaneView& prob, std::span<const Point> corners,
                               std::span<const EdgePair> candidates, Neighborhood nb) {
  ScoredEdgeSet set;
  for (const auto& e : candidates) {
    set.edges.push_back(e);
    set.scores.push_back(score_edge(prob, corners[static_cast<std::size_t>(e.a)],
                                    corners[static_cast<std::size_t>(e.b)], nb));
    set.origin.push_back(0);
  }
  return set;
}

ExpansionPlan expansion_plan(int count, int target) {
  require(count >= 1, ErrorCode::InvalidArgument, "expansion of an empty edge set");
  return {target / count, target % count};
}

ScoredEdgeSet expand_scores(const ScoredEdgeSet& set, int target, double eps) {
  require(!set.edges.empty(), ErrorCode::InvalidArgument, "expand_scores: empty edge set");
  require(set.scores.size() == set.edges.size() && set.origin.size() == set.edges.size(),
          ErrorCode::InvalidArgument, "expand_scores: ragged edge set");
  require(target >= 1, ErrorCode::InvalidArgument, "expand_scores: target must be >= 1");
  const int n = static_cast<int>(set.size());
  ScoredEdgeSet out;
  if (n >= target) {
    std::vector<int> keep = top_k(set.scores, target);
    std::sort(keep.begin(), keep.end());
    for (int i : keep) {
      out.edges.push_back(set.edges[static_cast<std::size_t>(i)]);
      out.scores.push_back(set.scores[static_cast<std::size_t>(i)]);
      out.origin.push_back(set.origin[static_cast<std::size_t>(i)]);
    }
    return out;
  }
  const double hi = *std::max_element(set.scores.begin(), set.scores.end());
  const double lo = std::min(0.0, *std::min_element(set.scores.begin(), set.scores.end()));
  const double shift = hi - lo + eps;
  out = set;
  for (int r = 1; static_cast<int>(out.size()) < target; ++r) {
    for (int i = 0; i < n && static_cast<int>(out.size()) < target; ++i) {
      out.edges.push_back(set.edges[static_cast<std::size_t>(i)]);
      out.scores.push_back(set.scores[static_cast<std::size_t>(i)] - r * shift);
      out.origin.push_back(r);
    }
  }
  return out;
}

std::vector<int> top_k(std::span<const double> scores, int k) {
  require(k >= 0 && static_cast<std::size_t>(k) <= scores.size(), ErrorCode::InvalidArgument,
          "top_k: k = " + std::to_string(k) + " exceeds " + std::to_string(scores.size()) +
              " entries");
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

EdgeFeature extract_edge_features(std::span<const Tensor4> features, int sample, Point c1,
                                  Point c2, int frame_side) {
  require(!features.empty(), ErrorCode::InvalidArgument, "no feature maps");
  for (const Point& p : {c1, c2})
    require(p.x >= 0 && p.y >= 0 && p.x < frame_side && p.y < frame_side,
            ErrorCode::InvalidArgument, "edge endpoint outside the frame");
  EdgeFeature ef;
  for (const Tensor4& fm : features) {
    require(sample >= 0 && sample < fm.n(), ErrorCode::InvalidArgument,
            "feature sample index out of range");
    require(fm.h() >= 2 && fm.w() == fm.h(), ErrorCode::Shape,
            "feature maps must be square with side >= 2");
    const int side = fm.h();
    const double scale = static_cast<double>(side) / frame_side;
    const double limit = side - 1;
    const Point a{std::min(c1.x * scale, limit), std::min(c1.y * scale, limit)};
    const Point b{std::min(c2.x * scale, limit), std::min(c2.y * scale, limit)};
    const auto pts = edge_points(a, b, side);
    std::vector<double> vec;
    vec.reserve(pts.size() * static_cast<std::size_t>(fm.c()));
    for (const Point& p : pts)
      for (int c = 0; c < fm.c(); ++c) vec.push_back(bilinear_sample(fm.view(sample, c), p.x, p.y));
    ef.per_scale.push_back(std::move(vec));
  }
  return ef;
}

std::vector<double> fuse_features(const EdgeFeature& ef, std::span<const double> weights) {
  require(weights.size() == ef.per_scale.size(), ErrorCode::InvalidArgument,
          "fusion needs one weight per scale");
  require(!ef.per_scale.empty(), ErrorCode::InvalidArgument, "no scales to fuse");
  const std::size_t len = ef.per_scale.front().size();
  std::vector<double> fused(len, 0.0);
  for (std::size_t l = 0; l < ef.per_scale.size(); ++l) {
    require(std::isfinite(weights[l]), ErrorCode::InvalidArgument, "fusion weight is not finite");
    require(ef.per_scale[l].size() == len, ErrorCode::Shape,
            "per-scale feature vectors differ in length");
    for (std::size_t i = 0; i < len; ++i) fused[i] += weights[l] * ef.per_scale[l][i];
  }
  return fused;
}

FuseGrads fuse_features_backward(const EdgeFeature& ef, std::span<const double> weights,
                                 std::span<const double> grad_fused) {
  require(weights.size() == ef.per_scale.size(), ErrorCode::InvalidArgument,
          "fusion needs one weight per scale");
  FuseGrads g;
  for (std::size_t l = 0; l < ef.per_scale.size(); ++l) {
    const auto& v = ef.per_scale[l];
    require(v.size() == grad_fused.size(), ErrorCode::Shape, "fusion gradient length mismatch");
    double acc = 0.0;
    std::vector<double> gv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      acc += v[i] * grad_fused[i];
      gv[i] = weights[l] * grad_fused[i];
    }
    g.grad_weights.push_back(acc);
    g.grad_vectors.push_back(std::move(gv));
  }
  return g;
}

std::string scored_edges_to_json(const ScoredEdgeSet& set, std::span<const int> selected) {
  nlohmann::json j;
  j["edges"] = nlohmann::json::array();
  for (std::size_t i = 0; i < set.size(); ++i)
    j["edges"].push_back({{"a", set.edges[i].a},
                          {"b", set.edges[i].b},
                          {"score", set.scores[i]},
                          {"copy", set.origin[i]}});
  j["selected"] = std::vector<int>(selected.begin(), selected.end());
  return j.dump(1);
}

}  // namespace swapgraph
