#include "cvp/dataterm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cvp/convexity.hpp"
#include "cvp/errors.hpp"

namespace cvp {

ScribbleSet::ScribbleSet(Grid2D grid, int classes)
    : grid_(grid), pixels_(classes), owner_(grid.size(), -1) {
  if (classes < 2) throw std::invalid_argument("scribble set needs at least 2 classes");
}

ScribbleSet ScribbleSet::from_label_image(Grid2D grid, std::span<const int> labels, int classes) {
  if (labels.size() != grid.size()) throw std::invalid_argument("scribble image does not match grid");
  ScribbleSet s(grid, classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int v = labels[i];
    if (v == 0) continue;
    if (v < 0 || v > classes) throw std::invalid_argument("scribble value " + std::to_string(v) + " out of range");
    s.add(v - 1, static_cast<std::uint32_t>(i));
  }
  return s;
}

bool ScribbleSet::add(int cls, std::uint32_t pixel) {
  if (cls < 0 || cls >= classes()) throw std::invalid_argument("scribble class out of range");
  if (pixel >= owner_.size()) throw std::invalid_argument("scribble pixel outside grid");
  if (owner_[pixel] == cls) return true;
  if (owner_[pixel] >= 0) return false;
  owner_[pixel] = cls;
  pixels_[cls].push_back(pixel);
  return true;
}

void ScribbleSet::require_all_classes() const {
  for (int c = 0; c < classes(); ++c) {
    if (pixels_[c].empty()) throw MissingScribbles(c);
  }
}

std::size_t ScribbleSet::total() const {
  std::size_t n = 0;
  for (const auto& p : pixels_) n += p.size();
  return n;
}

ScribbleSet ScribbleSet::subsample(std::size_t limit, std::uint64_t seed) const {
  ScribbleSet out(grid_, classes());
  std::mt19937_64 rng(seed);
  for (int c = 0; c < classes(); ++c) {
    std::vector<std::uint32_t> px = pixels_[c];
    if (px.size() > limit) {
      // Partial Fisher-Yates; keeps the choice independent of the library's
      // distribution implementations.
      for (std::size_t i = 0; i < limit; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (px.size() - i));
        std::swap(px[i], px[j]);
      }
      px.resize(limit);
      std::sort(px.begin(), px.end());
    }
    for (auto p : px) out.add(c, p);
  }
  return out;
}

double scribble_distance(std::size_t pixel, int cls, const ScribbleSet& scribbles, const Image& image, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  const auto& px = scribbles.pixels(cls);
  if (px.empty()) throw MissingScribbles(cls);
  const Grid2D& g = image.grid();
  const int w = g.width();
  const double xr = g.normalized(static_cast<int>(pixel / w));
  const double xc = g.normalized(static_cast<int>(pixel % w));
  double acc = 0.0;
  for (std::uint32_t y : px) {
    acc += image.difference(y, pixel);
    if (cls >= 1) {
      const double dr = g.normalized(static_cast<int>(y / w)) - xr;
      const double dc = g.normalized(static_cast<int>(y % w)) - xc;
      acc += omega * (dr * dr + dc * dc);
    }
  }
  return acc;
}

MultiField scribble_distances(const Image& image, const ScribbleSet& scribbles, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  scribbles.require_all_classes();
  const Grid2D& g = image.grid();
  const std::size_t n = g.size();
  const int w = g.width();
  MultiField d(g, scribbles.classes());
  for (int cls = 0; cls < scribbles.classes(); ++cls) {
    const auto& px = scribbles.pixels(cls);
    const double m = static_cast<double>(px.size());
    auto out = d.channel(cls);
    if (image.channels() == 1) {
      std::vector<double> vals;
      vals.reserve(px.size());
      for (auto p : px) vals.push_back(image.values()[p]);
      std::sort(vals.begin(), vals.end());
      std::vector<double> prefix(vals.size() + 1, 0.0);
      for (std::size_t i = 0; i < vals.size(); ++i) prefix[i + 1] = prefix[i] + vals[i];
      for (std::size_t i = 0; i < n; ++i) {
        const double v = image.values()[i];
        const auto k = static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), v) - vals.begin());
        const double below = static_cast<double>(k) * v - prefix[k];
        const double above = (prefix.back() - prefix[k]) - static_cast<double>(vals.size() - k) * v;
        out[i] = below + above;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (auto p : px) acc += image.difference(p, i);
        out[i] = acc;
      }
    }
    if (cls >= 1) {
      double sr = 0.0, sc = 0.0, sq = 0.0;
      for (auto p : px) {
        const double r = g.normalized(static_cast<int>(p / w));
        const double c = g.normalized(static_cast<int>(p % w));
        sr += r;
        sc += c;
        sq += r * r + c * c;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double r = g.normalized(static_cast<int>(i / w));
        const double c = g.normalized(static_cast<int>(i % w));
        out[i] += omega * (m * (r * r + c * c) - 2.0 * (r * sr + c * sc) + sq);
      }
    }
  }
  return d;
}

namespace {

// log p_i(x) = -d_i - logsumexp(-d).
MultiField log_probabilities(const Image& image, const ScribbleSet& scribbles, double omega) {
  MultiField d = scribble_distances(image, scribbles, omega);
  const std::size_t n = d.pixels();
  const int k = d.channels();
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = d.at(0, i);
    for (int c = 1; c < k; ++c) dmin = std::min(dmin, d.at(c, i));
    double s = 0.0;
    for (int c = 0; c < k; ++c) s += std::exp(-(d.at(c, i) - dmin));
    const double lse = -dmin + std::log(s);
    for (int c = 0; c < k; ++c) d.at(c, i) = -d.at(c, i) - lse;
  }
  return d;
}

}  // namespace

MultiField class_probabilities(const Image& image, const ScribbleSet& scribbles, double omega) {
  MultiField p = log_probabilities(image, scribbles, omega);
  for (double& v : p.values()) v = std::exp(v);
  return p;
}

MultiField similarity_field(const Image& image, const ScribbleSet& scribbles, double omega) {
  MultiField f = log_probabilities(image, scribbles, omega);
  const double lo = -std::log1p(-kProbabilityFloor);
  const double hi = -std::log(kProbabilityFloor);
  for (double& v : f.values()) v = std::clamp(-v, lo, hi);
  return f;
}

RegionMask rasterize_points(const PointSet& points, const Grid2D& grid) {
  RegionMask mask(grid);
  for (const auto& p : points.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("non-finite point coordinate");
    const long x = std::lround(p.x);
    const long y = std::lround(p.y);
    if (!grid.contains(static_cast<int>(y), static_cast<int>(x))) {
      throw std::invalid_argument("point outside the grid");
    }
    mask.set(static_cast<int>(y), static_cast<int>(x));
  }
  return mask;
}

std::size_t Objective::pinned_count() const {
  return static_cast<std::size_t>(std::count_if(pins.begin(), pins.end(), [](int p) { return p >= 0; }));
}

Objective assemble_segment_objective(const SegmentInputs& in) {
  if (!in.image || !in.scribbles) throw std::invalid_argument("segment objective needs an image and scribbles");
  if (!(in.image->grid() == in.scribbles->grid())) throw ValidationError("scribbles and image differ in size");
  in.scribbles->require_all_classes();
  const ScribbleSet sampled = in.scribbles->subsample(kScribbleSampleLimit, in.seed);
  Objective obj;
  obj.g = similarity_field(*in.image, sampled, in.omega);
  obj.pins.assign(in.image->grid().size(), -1);
  for (int c = 0; c < in.scribbles->classes(); ++c) {
    for (auto p : in.scribbles->pixels(c)) obj.pins[p] = c;
  }
  obj.lambda = in.lambda;
  obj.sigma = in.sigma;
  return obj;
}

Objective assemble_hull_clean_objective(const PointSet& points, const Grid2D& grid, double sigma) {
  if (points.points.empty()) throw std::invalid_argument("hull needs a nonempty point set");
  const RegionMask s = rasterize_points(points, grid);
  Objective obj;
  obj.g = MultiField(grid, 2);
  auto g1 = obj.g.channel(1);
  std::fill(g1.begin(), g1.end(), 1.0);
  obj.pins.assign(grid.size(), -1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (s[i]) obj.pins[i] = 1;
  }
  obj.lambda = 0.0;
  obj.sigma = sigma;
  return obj;
}

Objective assemble_hull_noisy_objective(const PointSet& points, const Grid2D& grid, double gamma, double lambda,
                                        double sigma) {
  if (points.points.empty()) throw std::invalid_argument("hull needs a nonempty point set");
  const RegionMask s = rasterize_points(points, grid);
  Objective obj;
  obj.g = MultiField(grid, 2);
  auto g1 = obj.g.channel(1);
  for (std::size_t i = 0; i < grid.size(); ++i) g1[i] = s[i] ? 1.0 - gamma : 1.0;
  obj.pins.assign(grid.size(), -1);
  obj.lambda = lambda;
  obj.sigma = sigma;
  return obj;
}

MultiField length_linear_term(const LabelStack& u_ref, double sigma, double lambda) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  MultiField out(u_ref.grid(), u_ref.channels());
  if (lambda == 0.0) return out;
  const auto kernel = make_gaussian_kernel(sigma, u_ref.grid());
  const double scale = lambda * std::sqrt(M_PI / sigma);
  const std::size_t n = u_ref.pixels();
  std::vector<double> src(n);
  for (int c = 0; c < u_ref.channels(); ++c) {
    auto uc = u_ref.channel(c);
    for (std::size_t i = 0; i < n; ++i) src[i] = 1.0 - 2.0 * uc[i];
    auto dst = out.channel(c);
    gaussian_convolve(src, u_ref.grid(), kernel, c == 0 ? -1.0 : 1.0, dst);
    for (double& v : dst) v *= scale;
  }
  return out;
}

double boundary_term(const LabelStack& u, double lambda, double sigma) {
  if (lambda == 0.0) return 0.0;
  const auto kernel = make_gaussian_kernel(sigma, u.grid());
  const std::size_t n = u.pixels();
  std::vector<double> src(n), conv(n);
  double acc = 0.0;
  for (int c = 0; c < u.channels(); ++c) {
    auto uc = u.channel(c);
    for (std::size_t i = 0; i < n; ++i) src[i] = 1.0 - uc[i];
    gaussian_convolve(src, u.grid(), kernel, c == 0 ? 0.0 : 1.0, conv);
    for (std::size_t i = 0; i < n; ++i) acc += uc[i] * conv[i];
  }
  return lambda * std::sqrt(M_PI / sigma) * acc;
}

double objective_value(const LabelStack& u, const MultiField& g, double lambda, double sigma) {
  if (g.channels() != u.channels() || !(g.grid() == u.grid())) throw std::invalid_argument("objective shape mismatch");
  const double linear = dot(u.values(), g.values());
  return linear + boundary_term(u, lambda, sigma);
}

}  // namespace cvp
