#include "cvp/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cvp::fixtures {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

void add_noise(std::vector<double>& values, double sigma, Rng& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : values) v = std::clamp(v + noise(rng), 0.0, 1.0);
}

// Thick polyline stroke of scribble pixels.
void stroke(ScribbleSet& s, int cls, Point2 a, Point2 b, double half_width) {
  const Grid2D& g = s.grid();
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  const int hw = static_cast<int>(std::ceil(half_width));
  for (int t = 0; t <= steps; ++t) {
    const double f = static_cast<double>(t) / steps;
    const double cx = a.x + f * (b.x - a.x);
    const double cy = a.y + f * (b.y - a.y);
    for (int dy = -hw; dy <= hw; ++dy) {
      for (int dx = -hw; dx <= hw; ++dx) {
        const int y = static_cast<int>(std::lround(cy)) + dy;
        const int x = static_cast<int>(std::lround(cx)) + dx;
        if (!g.contains(y, x)) continue;
        if (std::hypot(x - cx, y - cy) > half_width) continue;
        s.add(cls, static_cast<std::uint32_t>(g.index(y, x)));
      }
    }
  }
}

void frame_strokes(ScribbleSet& s, int margin) {
  const Grid2D& g = s.grid();
  const double lo = margin;
  const double hx = g.width() - 1 - margin;
  const double hy = g.height() - 1 - margin;
  stroke(s, 0, {lo, lo}, {hx, lo}, 1.0);
  stroke(s, 0, {hx, lo}, {hx, hy}, 1.0);
  stroke(s, 0, {hx, hy}, {lo, hy}, 1.0);
  stroke(s, 0, {lo, hy}, {lo, lo}, 1.0);
}

RegionMask ellipse_mask(const Grid2D& grid, Point2 c, double ax, double ay, double angle) {
  RegionMask m(grid);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const double dx = x - c.x, dy = y - c.y;
      const double u = (ca * dx + sa * dy) / ax;
      const double v = (-sa * dx + ca * dy) / ay;
      if (u * u + v * v <= 1.0) m.set(y, x);
    }
  }
  return m;
}

RegionMask rect_mask(const Grid2D& grid, int y0, int x0, int y1, int x1) {
  RegionMask m(grid);
  for (int y = std::max(0, y0); y <= std::min(grid.height() - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(grid.width() - 1, x1); ++x) m.set(y, x);
  }
  return m;
}

RegionMask minus(const RegionMask& a, const RegionMask& b) {
  RegionMask out = a;
  for (std::size_t i = 0; i < a.grid().size(); ++i) {
    if (b[i]) out.bits()[i] = 0;
  }
  return out;
}

RegionMask unite(const RegionMask& a, const RegionMask& b) {
  RegionMask out = a;
  for (std::size_t i = 0; i < a.grid().size(); ++i) {
    if (b[i]) out.bits()[i] = 1;
  }
  return out;
}

Polygon rotated(const Polygon& p, Point2 c, double angle) {
  Polygon out;
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (const auto& v : p.vertices) {
    const double dx = v.x - c.x, dy = v.y - c.y;
    out.vertices.push_back({c.x + ca * dx - sa * dy, c.y + sa * dx + ca * dy});
  }
  return out;
}

}  // namespace

RegionMask SegmentationCase::truth_mask(int cls) const {
  RegionMask m(image.grid());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == cls) m.bits()[i] = 1;
  }
  return m;
}

RegionMask disc_mask(const Grid2D& grid, Point2 center, double radius) {
  return ellipse_mask(grid, center, radius, radius, 0.0);
}

SegmentationCase square_case(int size, std::uint64_t seed) {
  const Grid2D grid(size, size);
  Rng rng(seed);
  SegmentationCase out;
  out.name = "square";
  out.channels = 2;
  const int lo = size / 4, hi = size - 1 - size / 4;
  const RegionMask sq = rect_mask(grid, lo, lo, hi, hi);
  std::vector<double> img(grid.size(), 0.2);
  out.truth.assign(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sq[i]) {
      img[i] = 0.8;
      out.truth[i] = 1;
    }
  }
  add_noise(img, 0.05, rng);
  out.image = Image(grid, 1, std::move(img));
  out.scribbles = ScribbleSet(grid, 2);
  const double mid = (size - 1) / 2.0;
  stroke(out.scribbles, 1, {lo + 4.0, mid}, {hi - 4.0, mid}, 1.0);
  frame_strokes(out.scribbles, 3);
  return out;
}

SegmentationCase occluded_case(int index, int size) {
  if (index < 0 || index >= kOccludedCases) throw std::invalid_argument("occluded case index out of range");
  const Grid2D grid(size, size);
  Rng rng(100 + static_cast<std::uint64_t>(index));
  SegmentationCase out;
  out.name = "occluded" + std::to_string(index);
  const double s = size;
  std::vector<RegionMask> objects;
  std::vector<double> levels;
  double background = 0.2;

  switch (index) {
    case 0:
      objects.push_back(disc_mask(grid, {0.5 * s, 0.5 * s}, 0.28 * s));
      levels = {0.8};
      break;
    case 1:
      objects.push_back(ellipse_mask(grid, {0.5 * s, 0.48 * s}, 0.34 * s, 0.2 * s, 0.5));
      levels = {0.75};
      break;
    case 2:
      objects.push_back(rasterize(random_convex_polygon({0.5 * s, 0.5 * s}, 0.32 * s, 7, 17), grid));
      levels = {0.8};
      break;
    case 3:
      objects.push_back(disc_mask(grid, {0.3 * s, 0.32 * s}, 0.17 * s));
      objects.push_back(ellipse_mask(grid, {0.68 * s, 0.66 * s}, 0.22 * s, 0.14 * s, -0.4));
      levels = {0.55, 0.9};
      background = 0.15;
      break;
    case 4:
      objects.push_back(rasterize(random_convex_polygon({0.3 * s, 0.66 * s}, 0.19 * s, 6, 23), grid));
      objects.push_back(disc_mask(grid, {0.7 * s, 0.32 * s}, 0.18 * s));
      levels = {0.9, 0.55};
      background = 0.15;
      break;
  }
  out.channels = static_cast<int>(objects.size()) + 1;
  out.truth.assign(grid.size(), 0);
  std::vector<double> img(grid.size(), background);
  for (std::size_t c = 0; c < objects.size(); ++c) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (objects[c][i]) {
        out.truth[i] = static_cast<int>(c) + 1;
        img[i] = levels[c];
      }
    }
  }

  // Background-colored occluding bar across every object.
  const double angle = uniform(rng, 0.2, 1.2);
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double half = 0.012 * s;
  for (std::size_t c = 0; c < objects.size(); ++c) {
    const auto centers = objects[c].pixel_centers();
    double cx = 0.0, cy = 0.0;
    for (const auto& p : centers) {
      cx += p.x;
      cy += p.y;
    }
    cx /= centers.size();
    cy /= centers.size();
    const double shift = 0.25 * std::sqrt(centers.size() / std::numbers::pi);
    for (const auto& p : centers) {
      const double d = -sa * (p.x - cx) + ca * (p.y - cy) - shift;
      if (std::abs(d) <= half) img[grid.index(static_cast<int>(p.y), static_cast<int>(p.x))] = background;
    }
  }
  add_noise(img, 0.06, rng);
  out.image = Image(grid, 1, std::move(img));

  // One stroke per object across the occluder, and background strokes of
  // comparable total length along the top and bottom edges.
  out.scribbles = ScribbleSet(grid, out.channels);
  double total = 0.0;
  for (std::size_t c = 0; c < objects.size(); ++c) {
    const auto centers = objects[c].pixel_centers();
    double cx = 0.0, cy = 0.0;
    for (const auto& p : centers) {
      cx += p.x;
      cy += p.y;
    }
    cx /= centers.size();
    cy /= centers.size();
    const double r = 0.75 * std::sqrt(centers.size() / std::numbers::pi);
    stroke(out.scribbles, static_cast<int>(c) + 1, {cx + sa * r, cy - ca * r}, {cx - sa * r, cy + ca * r}, 1.0);
    total += 2.0 * r;
  }
  const double half_len = 0.25 * total;
  stroke(out.scribbles, 0, {0.5 * s - half_len, 0.05 * s}, {0.5 * s + half_len, 0.05 * s}, 1.0);
  stroke(out.scribbles, 0, {0.5 * s - half_len, 0.95 * s}, {0.5 * s + half_len, 0.95 * s}, 1.0);
  return out;
}

RingCase ring_case(int size, std::uint64_t seed) {
  const Grid2D grid(size, size);
  Rng rng(seed);
  RingCase out;
  const Point2 c{(size - 1) / 2.0, (size - 1) / 2.0};
  out.disc = disc_mask(grid, c, 0.38 * size);
  out.hole = ellipse_mask(grid, c, 0.2 * size, 0.16 * size, 0.3);
  const RegionMask ring = minus(out.disc, out.hole);
  std::vector<double> img(grid.size(), 0.2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (ring[i]) img[i] = 0.8;
  }
  add_noise(img, 0.05, rng);
  out.image = Image(grid, 1, std::move(img));

  const double ring_mid = 0.5 * (0.38 * size + 0.2 * size);
  const int segments = 48;
  auto ring_stroke = [&](ScribbleSet& s, int cls) {
    for (int i = 0; i < segments; ++i) {
      const double a0 = 2.0 * std::numbers::pi * i / segments;
      const double a1 = 2.0 * std::numbers::pi * (i + 1) / segments;
      stroke(s, cls, {c.x + ring_mid * std::cos(a0), c.y + ring_mid * std::sin(a0)},
             {c.x + ring_mid * std::cos(a1), c.y + ring_mid * std::sin(a1)}, 1.0);
    }
  };
  out.inner = ScribbleSet(grid, 2);
  stroke(out.inner, 1, {c.x - 0.12 * size, c.y}, {c.x + 0.12 * size, c.y}, 1.0);
  stroke(out.inner, 1, {c.x, c.y - 0.08 * size}, {c.x, c.y + 0.08 * size}, 1.0);
  ring_stroke(out.inner, 0);

  out.outer = ScribbleSet(grid, 2);
  ring_stroke(out.outer, 1);
  frame_strokes(out.outer, 2);
  return out;
}

Polygon random_convex_polygon(Point2 center, double radius, int vertices, std::uint64_t seed) {
  if (vertices < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  Rng rng(seed);
  std::vector<double> angles(vertices);
  for (double& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> pts;
  for (double a : angles) {
    const double r = radius * uniform(rng, 0.75, 1.0);
    pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  return quickhull(pts);
}

namespace {

bool inside_convex(const Polygon& poly, Point2 p) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < 0.0) return false;
  }
  return true;
}

}  // namespace

PointSet convex_point_set(const Grid2D& grid, int count, std::uint64_t seed) {
  if (count < 3) throw std::invalid_argument("point set needs at least 3 points");
  Rng rng(seed);
  const double extent = std::min(grid.width(), grid.height());
  const double radius = uniform(rng, 0.22, 0.36) * extent;
  const Point2 center{uniform(rng, radius + 4.0, grid.width() - radius - 4.0),
                      uniform(rng, radius + 4.0, grid.height() - radius - 4.0)};
  const int nverts = std::uniform_int_distribution<int>(5, 9)(rng);
  const Polygon poly = random_convex_polygon(center, radius, nverts, rng());
  PointSet out;
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (const auto& v : poly.vertices) {
    minx = std::min(minx, v.x);
    maxx = std::max(maxx, v.x);
    miny = std::min(miny, v.y);
    maxy = std::max(maxy, v.y);
  }
  while (static_cast<int>(out.points.size()) < count) {
    const Point2 p{uniform(rng, minx, maxx), uniform(rng, miny, maxy)};
    if (inside_convex(poly, p)) out.points.push_back(p);
  }
  return out;
}

PointSet with_outliers(const PointSet& clean, const Grid2D& grid, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  PointSet out = clean;
  const auto extra = static_cast<std::size_t>(std::lround(fraction * clean.points.size()));
  for (std::size_t i = 0; i < extra; ++i) {
    out.points.push_back({uniform(rng, 0.0, grid.width() - 1.0), uniform(rng, 0.0, grid.height() - 1.0)});
  }
  return out;
}

PointSet two_clusters(const Grid2D& grid, double diameter, double gap) {
  const double r = diameter / 2.0;
  const double cy = (grid.height() - 1) / 2.0;
  const double span = 2.0 * diameter + gap;
  const double x0 = (grid.width() - 1 - span) / 2.0 + r;
  const double x1 = x0 + diameter + gap;
  if (x0 - r < 0.0 || x1 + r > grid.width() - 1) throw std::invalid_argument("clusters do not fit the grid");
  PointSet out;
  for (double cx : {x0, x1}) {
    for (const auto& p : disc_mask(grid, {cx, cy}, r).pixel_centers()) out.points.push_back(p);
  }
  return out;
}

std::vector<MaskSample> theorem_corpus(const Grid2D& grid, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MaskSample> out;
  const double w = grid.width(), h = grid.height();
  const Point2 c{(w - 1) / 2.0, (h - 1) / 2.0};
  const double extent = std::min(w, h);

  for (int i = 0; i < 8; ++i) {
    const double r = uniform(rng, 0.18, 0.4) * extent;
    out.push_back({"disc" + std::to_string(i), disc_mask(grid, c, r), Regime::kStrictlyConvex, 2.0 * r});
  }
  for (int i = 0; i < 6; ++i) {
    const double a = uniform(rng, 0.25, 0.4) * extent, b = uniform(rng, 0.15, 0.25) * extent;
    out.push_back({"ellipse" + std::to_string(i), ellipse_mask(grid, c, a, b, uniform(rng, 0.0, 3.0)),
                   Regime::kStrictlyConvex, 2.0 * b});
  }
  for (int i = 0; i < 6; ++i) {
    const int hw = static_cast<int>(uniform(rng, 0.2, 0.4) * extent);
    const int hh = static_cast<int>(uniform(rng, 0.15, 0.35) * extent);
    const int cy = static_cast<int>(c.y), cx = static_cast<int>(c.x);
    out.push_back({"rect" + std::to_string(i), rect_mask(grid, cy - hh, cx - hw, cy + hh, cx + hw), Regime::kOther,
                   2.0 * std::min(hw, hh)});
  }
  for (int i = 0; i < 10; ++i) {
    const Polygon p = random_convex_polygon(c, uniform(rng, 0.3, 0.42) * extent, 6 + i % 5, rng());
    out.push_back({"polygon" + std::to_string(i), rasterize(p, grid), Regime::kOther, 0.3 * extent});
  }

  // Nonconvex shapes with arms and notches at least `arm` wide.
  for (int i = 0; i < 8; ++i) {
    const double arm = uniform(rng, 0.2, 0.26) * extent;
    const double side = uniform(rng, 0.62, 0.72) * extent;
    const double x0 = c.x - side / 2, y0 = c.y - side / 2;
    Polygon l{{{x0, y0}, {x0 + arm, y0}, {x0 + arm, y0 + side - arm}, {x0 + side, y0 + side - arm},
               {x0 + side, y0 + side}, {x0, y0 + side}}};
    out.push_back({"L" + std::to_string(i), rasterize(rotated(l, c, uniform(rng, 0.0, 6.28)), grid),
                   Regime::kStronglyNonconvex, std::min(arm, side - arm)});
  }
  for (int i = 0; i < 8; ++i) {
    const double arm = uniform(rng, 0.2, 0.24) * extent;
    const double side = uniform(rng, 0.74, 0.8) * extent;
    const double x0 = c.x - side / 2, y0 = c.y - side / 2;
    const double depth = side - arm;
    Polygon u{{{x0, y0}, {x0 + arm, y0}, {x0 + arm, y0 + depth}, {x0 + side - arm, y0 + depth},
               {x0 + side - arm, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}};
    out.push_back({"U" + std::to_string(i), rasterize(rotated(u, c, uniform(rng, 0.0, 6.28)), grid),
                   Regime::kStronglyNonconvex, std::min(arm, side - 2 * arm)});
  }
  for (int i = 0; i < 6; ++i) {
    const int tips = 4 + i % 3;
    const double outer = uniform(rng, 0.42, 0.46) * extent;
    const double inner = uniform(rng, 0.18, 0.22) * extent;
    const double phase = uniform(rng, 0.0, 1.0);
    Polygon star;
    for (int k = 0; k < 2 * tips; ++k) {
      const double a = phase + k * std::numbers::pi / tips;
      const double r = k % 2 == 0 ? outer : inner;
      star.vertices.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    out.push_back({"star" + std::to_string(i), rasterize(star, grid), Regime::kStronglyNonconvex,
                   2.0 * inner * std::sin(std::numbers::pi / tips)});
  }
  for (int i = 0; i < 4; ++i) {
    const double ro = uniform(rng, 0.44, 0.47) * extent;
    const double ri = uniform(rng, 0.16, 0.2) * extent;
    out.push_back({"annulus" + std::to_string(i), minus(disc_mask(grid, c, ro), disc_mask(grid, c, ri)),
                   Regime::kStronglyNonconvex, std::min(ro - ri, 2.0 * ri)});
  }
  // Overlapping discs with a waist.
  out.push_back({"dumbbell", unite(disc_mask(grid, {c.x - 0.15 * w, c.y}, 0.2 * extent),
                                   disc_mask(grid, {c.x + 0.15 * w, c.y}, 0.2 * extent)),
                 Regime::kStronglyNonconvex, 0.26 * extent});
  return out;
}

}  // namespace cvp::fixtures
