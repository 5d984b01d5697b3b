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

#include "swapgraph/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "swapgraph/error.hpp"
#include "swapgraph/rng.hpp"

namespace swapgraph {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::Io, "failed writing '" + path + "'");
}

void SyntheticConfig::validate() const {
  require(side == 64, ErrorCode::InvalidArgument, "synthetic scenes are 64x64");
  require(count >= 1, ErrorCode::InvalidArgument, "image count must be >= 1");
  require(min_corners >= 4 && max_corners <= 12 && min_corners <= max_corners,
          ErrorCode::InvalidArgument, "corner range must satisfy 4 <= min <= max <= 12");
  require((min_corners + 1) / 2 <= max_corners / 2, ErrorCode::InvalidArgument,
          "corner range contains no even count (rectilinear footprints have even corner counts)");
  require(noise >= 0.0 && noise <= 0.5, ErrorCode::InvalidArgument, "noise must lie in [0, 0.5]");
}

namespace {

bool on_segment(Point p, Point a, Point b) {
  const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (cross != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

bool inside_closed_polygon(double px, double py, const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment({px, py}, poly[i], poly[(i + 1) % n])) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > py) != (b.y > py)) {
      const double xi = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
      if (px < xi) inside = !inside;
    }
  }
  return inside;
}

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

std::vector<Point> skyline_footprint(Rng& rng, int columns) {
  const int u0 = static_cast<int>(rng.uniform_int(6, 12));
  const int available = 57 - u0;
  const int total = static_cast<int>(rng.uniform_int(std::max(6 * columns, 16), available));
  const int extra = total - 6 * columns;
  std::vector<int> cuts;
  for (int i = 0; i + 1 < columns; ++i) cuts.push_back(static_cast<int>(rng.uniform_int(0, extra)));
  cuts.push_back(extra);
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> u{u0};
  int prev_cut = 0;
  for (int j = 0; j < columns; ++j) {
    u.push_back(u.back() + 6 + (cuts[static_cast<std::size_t>(j)] - prev_cut));
    prev_cut = cuts[static_cast<std::size_t>(j)];
  }

  const int base = static_cast<int>(rng.uniform_int(40, 57));
  std::vector<int> height;
  for (int j = 0; j < columns; ++j) {
    int h;
    do {
      h = static_cast<int>(rng.uniform_int(8, base - 6));
    } while (j > 0 && std::abs(h - height.back()) < 5);
    height.push_back(h);
  }

  const auto m = static_cast<std::size_t>(columns);
  std::vector<Point> pts;
  pts.push_back({static_cast<double>(u[0]), static_cast<double>(base)});
  pts.push_back({static_cast<double>(u[m]), static_cast<double>(base)});
  pts.push_back({static_cast<double>(u[m]), static_cast<double>(base - height[m - 1])});
  for (std::size_t j = m - 1; j >= 1; --j) {
    pts.push_back({static_cast<double>(u[j]), static_cast<double>(base - height[j])});
    pts.push_back({static_cast<double>(u[j]), static_cast<double>(base - height[j - 1])});
  }
  pts.push_back({static_cast<double>(u[0]), static_cast<double>(base - height[0])});
  return pts;
}

}  // namespace

Scene generate_synthetic_scene(const SyntheticConfig& cfg, int index) {
  cfg.validate();
  require(index >= 0, ErrorCode::InvalidArgument, "scene index must be >= 0");
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(index)));
  const int lo = (cfg.min_corners + 1) / 2 - 1;
  const int hi = cfg.max_corners / 2 - 1;
  const int columns = static_cast<int>(rng.uniform_int(lo, hi));
  std::vector<Point> pts = skyline_footprint(rng, columns);

  const int turns = static_cast<int>(rng.uniform_int(0, 3));
  const double last = cfg.side - 1;
  for (auto& p : pts)
    for (int t = 0; t < turns; ++t) p = {last - p.y, p.x};

  Scene scene;
  std::ostringstream id;
  id << std::setw(4) << std::setfill('0') << index;
  scene.annotation.image_id = id.str();
  scene.annotation.side = cfg.side;
  scene.annotation.graph.corners = pts;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) scene.annotation.graph.edges.push_back(EdgePair::make(i, (i + 1) % n));

  const double background = rng.uniform(0.05, 0.35);
  const double foreground = rng.uniform(background + 0.35, std::min(0.95, background + 0.6));
  scene.image = Tensor4(Shape4{1, 1, cfg.side, cfg.side});
  for (int y = 0; y < cfg.side; ++y)
    for (int x = 0; x < cfg.side; ++x) {
      const double base = inside_closed_polygon(x, y, pts) ? foreground : background;
      scene.image(0, 0, y, x) = quantize(base + rng.uniform(-cfg.noise, cfg.noise));
    }
  return scene;
}

std::vector<std::pair<int, int>> bresenham_line(int x0, int y0, int x1, int y1) {
  std::vector<std::pair<int, int>> out;
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.emplace_back(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

Tensor4 rasterize_edges(const PlanarGraph& graph, int side, int dilation) {
  require(side >= 1, ErrorCode::InvalidArgument, "raster side must be >= 1");
  require(dilation >= 0, ErrorCode::InvalidArgument, "dilation must be >= 0");
  graph.validate(side);
  Tensor4 mask(Shape4{1, 1, side, side});
  for (const auto& e : graph.edges) {
    const Point& a = graph.corners[static_cast<std::size_t>(e.a)];
    const Point& b = graph.corners[static_cast<std::size_t>(e.b)];
    for (auto [x, y] : bresenham_line(static_cast<int>(std::lround(a.x)), static_cast<int>(std::lround(a.y)),
                                      static_cast<int>(std::lround(b.x)), static_cast<int>(std::lround(b.y))))
      if (x >= 0 && y >= 0 && x < side && y < side) mask(0, 0, y, x) = 1.0;
  }
  for (int r = 0; r < dilation; ++r) {
    Tensor4 next = mask;
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        double v = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy;
            const int xx = x + dx;
            if (yy >= 0 && xx >= 0 && yy < side && xx < side) v = std::max(v, mask(0, 0, yy, xx));
          }
        next(0, 0, y, x) = v;
      }
    mask = std::move(next);
  }
  return mask;
}

bool segments_cross(Point a, Point b, Point c, Point d) {
  auto orient = [](Point p, Point q, Point r) {
    const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  // Coincident segments overlap along their whole length.
  if ((a == c && b == d) || (a == d && b == c)) return true;
  auto shared = [&](Point p) { return (p == a || p == b) && (p == c || p == d); };
  if (on_segment(c, a, b) && !shared(c)) return true;
  if (on_segment(d, a, b) && !shared(d)) return true;
  if (on_segment(a, c, d) && !shared(a)) return true;
  if (on_segment(b, c, d) && !shared(b)) return true;
  return false;
}

bool is_planar_embedding(const PlanarGraph& g) {
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    for (std::size_t j = i + 1; j < g.edges.size(); ++j) {
      const auto& e = g.edges[i];
      const auto& f = g.edges[j];
      if (segments_cross(g.corners[static_cast<std::size_t>(e.a)], g.corners[static_cast<std::size_t>(e.b)],
                         g.corners[static_cast<std::size_t>(f.a)], g.corners[static_cast<std::size_t>(f.b)]))
        return false;
    }
  return true;
}

std::string annotation_to_json(const AnnotationRecord& rec) {
  nlohmann::json j;
  j["format"] = "swapgraph-annotation";
  j["version"] = kAnnotationVersion;
  j["image_id"] = rec.image_id;
  j["side"] = rec.side;
  j["corners"] = nlohmann::json::array();
  for (const auto& c : rec.graph.corners) j["corners"].push_back({c.x, c.y});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : rec.graph.edges) j["edges"].push_back({e.a, e.b});
  return j.dump(1) + "\n";
}

AnnotationRecord annotation_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, "annotation JSON parse error at byte " + std::to_string(e.byte) +
                               ": " + e.what());
  }
  try {
    require(j.is_object(), ErrorCode::Parse, "annotation must be a JSON object");
    require(j.value("version", -1) == kAnnotationVersion, ErrorCode::Parse,
            "unsupported annotation version");
    AnnotationRecord rec;
    rec.image_id = j.at("image_id").get<std::string>();
    rec.side = j.at("side").get<int>();
    for (const auto& c : j.at("corners")) {
      require(c.is_array() && c.size() == 2, ErrorCode::Parse, "corner must be [x, y]");
      rec.graph.corners.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, ErrorCode::Parse, "edge must be [i, j]");
      rec.graph.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    rec.graph.validate(rec.side);
    return rec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed annotation: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    fail(ErrorCode::Parse, std::string("invalid annotation: ") + e.what());
  }
}

void save_annotation(const AnnotationRecord& rec, const std::string& path) {
  write_file(path, annotation_to_json(rec));
}

AnnotationRecord load_annotation(const std::string& path) {
  try {
    return annotation_from_json(read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse) throw;
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

std::string encode_pgm(const Tensor4& image) {
  require(image.n() == 1 && image.c() == 1, ErrorCode::Shape,
          "PGM export needs a single-channel single image, got " + image.shape().str());
  std::string out = "P5\n" + std::to_string(image.w()) + " " + std::to_string(image.h()) + "\n255\n";
  for (double v : image.data())
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  return out;
}

Tensor4 decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto error = [&](const std::string& what) {
    fail(ErrorCode::Parse, "PGM: " + what + " at byte " + std::to_string(pos));
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
      error("expected an integer");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) error("header value too large");
      ++pos;
    }
    return static_cast<int>(v);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') error("missing P5 magic");
  pos = 2;
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (w < 1 || h < 1) error("non-positive dimensions");
  if (maxval < 1 || maxval > 255) error("only 8-bit PGM (maxval <= 255) is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    error("expected whitespace after header");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < need)
    error("truncated pixel data (need " + std::to_string(need) + " bytes, have " +
          std::to_string(bytes.size() - pos) + ")");
  Tensor4 img(Shape4{1, 1, h, w});
  auto d = img.data();
  for (std::size_t i = 0; i < need; ++i)
    d[i] = static_cast<unsigned char>(bytes[pos + i]) / static_cast<double>(maxval);
  return img;
}

void save_image(const Tensor4& image, const std::string& path) { write_file(path, encode_pgm(image)); }

Tensor4 load_image(const std::string& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse) throw;
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

std::string render_svg_string(const Tensor4& image, const PlanarGraph& predicted,
                              const PlanarGraph& truth) {
  require(image.n() == 1 && image.c() == 1, ErrorCode::Shape, "SVG raster must be single-channel");
  const int h = image.h();
  const int w = image.w();
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * 8 << "\" height=\"" << h * 8
     << "\" viewBox=\"-0.5 -0.5 " << w << " " << h << "\" shape-rendering=\"crispEdges\">\n"
     << "<g id=\"raster\">\n";
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int g = static_cast<int>(std::lround(std::clamp(image(0, 0, y, x), 0.0, 1.0) * 255.0));
      os << "<rect x=\"" << x - 0.5 << "\" y=\"" << y - 0.5 << "\" width=\"1\" height=\"1\" fill=\"rgb("
         << g << "," << g << "," << g << ")\"/>\n";
    }
  os << "</g>\n";
  auto lines = [&os](const PlanarGraph& graph, const char* cls, const char* color, double width) {
    os << "<g id=\"" << cls << "\">\n";
    for (const auto& e : graph.edges) {
      const Point& a = graph.corners[static_cast<std::size_t>(e.a)];
      const Point& b = graph.corners[static_cast<std::size_t>(e.b)];
      os << "<line class=\"" << cls << "\" x1=\"" << a.x << "\" y1=\"" << a.y << "\" x2=\"" << b.x
         << "\" y2=\"" << b.y << "\" stroke=\"" << color << "\" stroke-width=\"" << width
         << "\" stroke-linecap=\"round\"/>\n";
    }
    os << "</g>\n";
  };
  lines(truth, "truth", "#00c853", 1.2);
  lines(predicted, "predicted", "#ff1744", 0.5);
  os << "</svg>\n";
  return os.str();
}

void render_svg(const Tensor4& image, const PlanarGraph& predicted, const PlanarGraph& truth,
                const std::string& path) {
  write_file(path, render_svg_string(image, predicted, truth));
}

namespace {
std::string indexed_name(int index, const char* ext) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << index << ext;
  return os.str();
}
}  // namespace

std::string image_path(const std::string& dir, int index) {
  return (fs::path(dir) / "images" / indexed_name(index, ".pgm")).string();
}

std::string annotation_path(const std::string& dir, int index) {
  return (fs::path(dir) / "annotations" / indexed_name(index, ".json")).string();
}

void write_dataset(const SyntheticConfig& cfg, const std::string& dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  require(!ec, ErrorCode::Io, "cannot create '" + dir + "/images': " + ec.message());
  fs::create_directories(fs::path(dir) / "annotations", ec);
  require(!ec, ErrorCode::Io, "cannot create '" + dir + "/annotations': " + ec.message());
  for (int i = 0; i < cfg.count; ++i) {
    const Scene s = generate_synthetic_scene(cfg, i);
    save_image(s.image, image_path(dir, i));
    save_annotation(s.annotation, annotation_path(dir, i));
  }
  nlohmann::json manifest = {{"format", "swapgraph-dataset"},
                             {"version", 1},
                             {"seed", cfg.seed},
                             {"count", cfg.count},
                             {"min_corners", cfg.min_corners},
                             {"max_corners", cfg.max_corners},
                             {"side", cfg.side},
                             {"noise", cfg.noise}};
  write_file((fs::path(dir) / "dataset.json").string(), manifest.dump(1) + "\n");
}

int dataset_size(const std::string& dir) {
  int n = 0;
  while (fs::exists(annotation_path(dir, n))) ++n;
  return n;
}

std::vector<Sample> load_dataset(const std::string& dir, int begin, int end) {
  require(begin >= 0 && begin <= end, ErrorCode::InvalidArgument, "invalid dataset range");
  std::vector<Sample> out;
  for (int i = begin; i < end; ++i) {
    Sample s{load_image(image_path(dir, i)), load_annotation(annotation_path(dir, i))};
    require(s.image.h() == s.annotation.side && s.image.w() == s.annotation.side, ErrorCode::Shape,
            "image " + std::to_string(i) + " does not match its annotation side");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> generate_samples(const SyntheticConfig& cfg, int begin, int end) {
  std::vector<Sample> out;
  for (int i = begin; i < end; ++i) {
    Scene s = generate_synthetic_scene(cfg, i);
    out.push_back({std::move(s.image), std::move(s.annotation)});
  }
  return out;
}

}  // namespace swapgraph
