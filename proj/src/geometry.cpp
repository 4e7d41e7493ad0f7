#include "cvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvp {

double Polygon::area() const {
  const std::size_t n = vertices.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices[i];
    const Point2& b = vertices[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

double Polygon::perimeter() const {
  const std::size_t n = vertices.size();
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices[i];
    const Point2& b = vertices[(i + 1) % n];
    acc += std::hypot(b.x - a.x, b.y - a.y);
  }
  return n == 2 ? acc / 2.0 : acc;
}

RegionMask::RegionMask(Grid2D grid, std::vector<std::uint8_t> bits) : grid_(grid), bits_(std::move(bits)) {
  if (bits_.size() != grid_.size()) throw std::invalid_argument("mask size does not match grid");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t RegionMask::area() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Point2> RegionMask::pixel_centers() const {
  std::vector<Point2> pts;
  for (int y = 0; y < grid_.height(); ++y) {
    for (int x = 0; x < grid_.width(); ++x) {
      if ((*this)(y, x)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return pts;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

namespace {

bool lower_yx(const Point2& a, const Point2& b) { return a.y < b.y || (a.y == b.y && a.x < b.x); }

// Appends the hull chain strictly left of a->b (exclusive of a, inclusive of
// nothing), in order from a to b.
void hull_side(const std::vector<Point2>& pts, const Point2& a, const Point2& b, std::vector<Point2>& out) {
  std::vector<Point2> outside;
  double best = 0.0;
  Point2 far{};
  for (const Point2& p : pts) {
    const double d = cross(a, b, p);
    if (d > 0.0) {
      outside.push_back(p);
      if (d > best) {
        best = d;
        far = p;
      }
    }
  }
  if (outside.empty()) return;
  hull_side(outside, a, far, out);
  out.push_back(far);
  hull_side(outside, far, b, out);
}

}  // namespace

Polygon quickhull(std::span<const Point2> points) {
  if (points.empty()) throw std::invalid_argument("quickhull needs at least one point");
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const Point2 left = pts.front();
  const Point2 right = pts.back();
  if (pts.size() == 1) return Polygon{{left}};

  // With x right and y down, cross(a, b, p) > 0 means p is clockwise on screen;
  // walking left->right over the positive side then right->left over the
  // other gives a cycle with positive shoelace area.
  std::vector<Point2> hull;
  hull.push_back(left);
  hull_side(pts, left, right, hull);
  hull.push_back(right);
  hull_side(pts, right, left, hull);

  Polygon poly;
  if (hull.size() == 2) {
    poly.vertices = {left, right};
  } else {
    poly.vertices = std::move(hull);
    if (poly.area() < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  }
  const auto start = std::min_element(poly.vertices.begin(), poly.vertices.end(), lower_yx);
  std::rotate(poly.vertices.begin(), start, poly.vertices.end());
  return poly;
}

namespace {

constexpr double kOnEdgeTol = 1e-9;

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (std::abs(cross(a, b, p)) > kOnEdgeTol * std::max(1.0, len)) return false;
  return p.x >= std::min(a.x, b.x) - kOnEdgeTol && p.x <= std::max(a.x, b.x) + kOnEdgeTol &&
         p.y >= std::min(a.y, b.y) - kOnEdgeTol && p.y <= std::max(a.y, b.y) + kOnEdgeTol;
}

bool inside_or_on(const std::vector<Point2>& v, const Point2& p) {
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(v[j], v[i], p)) return true;
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < xc) inside = !inside;
    }
  }
  return inside;
}

void set_if_inside(RegionMask& mask, long y, long x) {
  if (mask.grid().contains(static_cast<int>(y), static_cast<int>(x))) mask.set(static_cast<int>(y), static_cast<int>(x));
}

}  // namespace

RegionMask rasterize(const Polygon& poly, const Grid2D& grid) {
  RegionMask mask(grid);
  const auto& v = poly.vertices;
  if (v.empty()) return mask;
  if (v.size() == 1) {
    set_if_inside(mask, std::lround(v[0].y), std::lround(v[0].x));
    return mask;
  }
  if (v.size() == 2 || std::abs(poly.area()) < 1e-12) {
    // Digital segment between the two extreme vertices: one pixel per step
    // along the major axis.
    Point2 a = v[0];
    Point2 b = v[0];
    double best = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        const double d = std::hypot(v[i].x - v[j].x, v[i].y - v[j].y);
        if (d > best) {
          best = d;
          a = v[i];
          b = v[j];
        }
      }
    }
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    if (std::abs(dx) >= std::abs(dy)) {
      const long x0 = std::lround(std::min(a.x, b.x));
      const long x1 = std::lround(std::max(a.x, b.x));
      for (long x = x0; x <= x1; ++x) {
        const double t = dx == 0.0 ? 0.0 : (x - a.x) / dx;
        set_if_inside(mask, std::lround(a.y + t * dy), x);
      }
    } else {
      const long y0 = std::lround(std::min(a.y, b.y));
      const long y1 = std::lround(std::max(a.y, b.y));
      for (long y = y0; y <= y1; ++y) {
        const double t = (y - a.y) / dy;
        set_if_inside(mask, y, std::lround(a.x + t * dx));
      }
    }
    return mask;
  }
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const auto& p : v) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(xmin)));
  const int x1 = std::min(grid.width() - 1, static_cast<int>(std::ceil(xmax)));
  const int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
  const int y1 = std::min(grid.height() - 1, static_cast<int>(std::ceil(ymax)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (inside_or_on(v, {static_cast<double>(x), static_cast<double>(y)})) mask.set(y, x);
    }
  }
  return mask;
}

bool digital_convexity_oracle(const RegionMask& mask) {
  const auto centers = mask.pixel_centers();
  if (centers.empty()) throw std::invalid_argument("digital convexity of an empty mask is undefined");
  return rasterize(quickhull(centers), mask.grid()) == mask;
}

namespace {

// 1D squared distance transform of f (Felzenszwalb & Huttenlocher lower envelope).
void edt_1d(const double* f, int n, double* d, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = inf;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const RegionMask& mask) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int h = mask.grid().height();
  const int w = mask.grid().width();
  std::vector<double> dist(mask.grid().size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = mask[i] ? 0.0 : inf;

  const int n = std::max(h, w);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = dist[static_cast<std::size_t>(y) * w + x];
    edt_1d(f.data(), h, d.data(), v, z);
    for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    double* row = dist.data() + static_cast<std::size_t>(y) * w;
    std::copy(row, row + w, f.begin());
    edt_1d(f.data(), w, d.data(), v, z);
    std::copy(d.begin(), d.begin() + w, row);
  }
  return dist;
}

ShapeDistance shape_distance_detail(const RegionMask& estimate, const RegionMask& reference) {
  if (!(estimate.grid() == reference.grid())) throw std::invalid_argument("shape distance needs masks on one grid");
  const std::size_t area_ref = reference.area();
  if (estimate.empty() || area_ref == 0) throw std::invalid_argument("shape distance of an empty mask");
  const auto to_ref = squared_distance_transform(reference);
  const auto to_est = squared_distance_transform(estimate);
  ShapeDistance out;
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < to_ref.size(); ++i) {
    if (estimate[i]) a = std::max(a, to_ref[i]);
    if (reference[i]) b = std::max(b, to_est[i]);
  }
  out.est_to_ref = std::sqrt(a);
  out.ref_to_est = std::sqrt(b);
  out.normalizer = 2.0 * std::sqrt(static_cast<double>(area_ref) / M_PI);
  out.value = std::max(out.est_to_ref, out.ref_to_est) / out.normalizer;
  return out;
}

double shape_distance(const RegionMask& estimate, const RegionMask& reference) {
  return shape_distance_detail(estimate, reference).value;
}

std::vector<int> connected_components(const RegionMask& mask, int* count) {
  const int h = mask.grid().height();
  const int w = mask.grid().width();
  std::vector<int> labels(mask.grid().size(), 0);
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (!mask[s] || labels[s] != 0) continue;
    ++next;
    labels[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int y = static_cast<int>(i / w);
      const int x = static_cast<int>(i % w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
          if (mask[j] && labels[j] == 0) {
            labels[j] = next;
            stack.push_back(j);
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

std::vector<RegionMask> component_masks(const RegionMask& mask) {
  int n = 0;
  const auto labels = connected_components(mask, &n);
  std::vector<RegionMask> out(n, RegionMask(mask.grid()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0) out[labels[i] - 1].bits()[i] = 1;
  }
  return out;
}

double convexity_ratio(const RegionMask& mask) {
  const auto centers = mask.pixel_centers();
  if (centers.empty()) throw std::invalid_argument("convexity ratio of an empty mask");
  const auto hull = rasterize(quickhull(centers), mask.grid());
  return static_cast<double>(mask.area()) / static_cast<double>(hull.area());
}

}  // namespace cvp
