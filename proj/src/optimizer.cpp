#include "cvp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cvp/errors.hpp"
#include "cvp/geometry.hpp"

namespace cvp {

namespace {
constexpr double kGolden = 1.6180339887498949;
}

void AdmmParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(tau > 0.0 && tau < kGolden)) throw std::invalid_argument("tau must lie in (0, (1+sqrt(5))/2)");
  if (max_iterations < 1) throw std::invalid_argument("max inner iterations must be >= 1");
  if (!(kkt_tol >= 0.0)) throw std::invalid_argument("kkt tolerance must be >= 0");
}

void OuterParams::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
  if (belt_radius < 1) throw std::invalid_argument("belt radius must be >= 1");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (check_stride < 1) throw std::invalid_argument("check stride must be >= 1");
  if (max_outer < 1) throw std::invalid_argument("max outer iterations must be >= 1");
  if (inner_budget < 1) throw std::invalid_argument("inner budget must be >= 1");
  for (int r : radii_override) {
    if (r < 1) throw std::invalid_argument("radii must be >= 1");
  }
}

std::vector<int> radii_schedule(int k, ScheduleKind kind) {
  if (k < 0) throw std::invalid_argument("outer iteration must be >= 0");
  if (kind == ScheduleKind::kSegment) {
    const int l = 2 * ((k / 100) % 7);
    return {(l + 1) % 14, (l + 3) % 14, (l + 5) % 14};
  }
  const int l = 2 * ((k / 100) % 10);
  return {(l + 1) % 22, (l + 3) % 22, (l + 5) % 22, (l + 7) % 22, (l + 9) % 22};
}

double simplex_project(std::span<const double> xi, std::span<double> out) {
  const std::size_t n = xi.size();
  // Small fixed buffer covers every realistic class count without allocating.
  double sorted_buf[16];
  std::vector<double> sorted_vec;
  double* sorted = sorted_buf;
  if (n > 16) {
    sorted_vec.resize(n);
    sorted = sorted_vec.data();
  }
  std::copy(xi.begin(), xi.end(), sorted);
  std::sort(sorted, sorted + n, std::greater<>());
  double cumsum = 0.0;
  double t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumsum += sorted[k];
    const double tk = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - tk > 0.0) t = tk;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(xi[i] - t, 0.0);
  return t;
}

void pinned_project(std::span<const double> xi, std::span<const int> pins, const BeltMask& belt,
                    const LabelStack& u_prev, LabelStack& out) {
  const std::size_t n = u_prev.pixels();
  const int ch = u_prev.channels();
  double in[kMaxChannels], proj[kMaxChannels];
  if (ch > kMaxChannels) throw std::invalid_argument("at most 16 channels supported");
  for (std::size_t i = 0; i < n; ++i) {
    if (pins[i] >= 0) {
      for (int c = 0; c < ch; ++c) out.at(c, i) = c == pins[i] ? 1.0 : 0.0;
    } else if (!belt.inside[i]) {
      for (int c = 0; c < ch; ++c) out.at(c, i) = u_prev.at(c, i);
    } else {
      for (int c = 0; c < ch; ++c) in[c] = xi[c * n + i];
      simplex_project({in, static_cast<std::size_t>(ch)}, {proj, static_cast<std::size_t>(ch)});
      for (int c = 0; c < ch; ++c) out.at(c, i) = proj[c];
    }
  }
}

double estimate_operator_norm_sq(const LinearizedConstraint& lin, int iterations, std::uint64_t seed) {
  const std::size_t len = lin.pixels() * lin.channels();
  std::vector<double> x(len), atax(len);
  std::mt19937_64 rng(seed);
  for (double& v : x) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  StackedField ax = lin.make_stacked();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double nx = norm2(x);
    for (double& v : x) v /= nx;
    lin.apply(x, ax);
    est = dot(ax.values(), ax.values());
    lin.apply_adjoint(ax, atax);
    x.swap(atax);
  }
  return est;
}

double choose_alpha(const LinearizedConstraint& lin, const AdmmParams& params) {
  if (params.alpha_mode == AlphaMode::kFixed) return 1.0 + params.mu;
  return 1.01 * params.mu * estimate_operator_norm_sq(lin);
}

namespace {

void init_multipliers(const LinearizedConstraint& lin, const AdmmParams& params, const SolveState& warm,
                      SolveState& s) {
  s.v = lin.make_stacked();
  s.z = lin.make_stacked();
  s.radii = lin.radii();
  if (!params.warm_multipliers || warm.radii.empty() || warm.v.pixels() != lin.pixels() ||
      warm.v.channels() != lin.channels()) {
    return;
  }
  for (int e = 0; e < lin.slots(); ++e) {
    const auto it = std::find(warm.radii.begin(), warm.radii.end(), lin.radii()[e]);
    if (it == warm.radii.end()) continue;
    const int src = static_cast<int>(it - warm.radii.begin());
    for (int c = 0; c < lin.channels(); ++c) {
      std::copy(warm.v.block(src, c).begin(), warm.v.block(src, c).end(), s.v.block(e, c).begin());
      std::copy(warm.z.block(src, c).begin(), warm.z.block(src, c).end(), s.z.block(e, c).begin());
    }
  }
}

// v/z update shared by both implementations. Returns (primal, dual movement).
std::pair<double, double> update_slack_and_multiplier(const StackedField& au, const StackedField& c,
                                                      const AdmmParams& params, StackedField& v, StackedField& z) {
  auto av = au.values();
  auto cv = c.values();
  auto vv = v.values();
  auto zv = z.values();
  double primal = 0.0;
  double dual = 0.0;
  const double mu = params.mu;
  const double step = params.tau * params.mu;
  for (std::size_t i = 0; i < vv.size(); ++i) {
    const double vn = std::max(0.0, av[i] - cv[i] + zv[i] / mu);
    const double dv = vn - vv[i];
    dual += dv * dv;
    vv[i] = vn;
    const double r = av[i] - vn - cv[i];
    primal += r * r;
    zv[i] += step * r;
  }
  return {std::sqrt(primal), std::sqrt(dual)};
}

void fill_combined(const StackedField& au, const StackedField& c, const StackedField& v, const StackedField& z,
                   double mu, StackedField& w) {
  auto av = au.values();
  auto cv = c.values();
  auto vv = v.values();
  auto zv = z.values();
  auto wv = w.values();
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = mu * (av[i] - vv[i] - cv[i]) + zv[i];
}

StackedField initial_image(const LinearizedConstraint& lin) {
  // A u^k = c + C(u^k).
  StackedField au = lin.residual_at_reference();
  auto a = au.values();
  auto c = lin.offsets().values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c[i];
  return au;
}

}  // namespace

SolveState admm_solve(const LinearizedConstraint& lin, const MultiField& gprime, const AdmmParams& params,
                      double alpha, std::span<const int> pins, const BeltMask& belt, const SolveState& warm,
                      int iterations, int outer_index) {
  params.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const Grid2D& grid = lin.grid();
  const std::size_t n = lin.pixels();
  const int ch = lin.channels();
  const int slots = lin.slots();

  SolveState s;
  s.u = warm.u;
  s.k = warm.k;
  init_multipliers(lin, params, warm, s);

  // Free pixels and their r_max neighborhood.
  std::vector<std::uint32_t> free_px;
  std::vector<double> free_ind(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (belt.inside[i] && pins[i] < 0) {
      free_px.push_back(static_cast<std::uint32_t>(i));
      free_ind[i] = 1.0;
    }
  }
  std::vector<std::uint32_t> region_px;
  if (!free_px.empty()) {
    const int rmax = *std::max_element(lin.radii().begin(), lin.radii().end());
    std::vector<double> spread(n);
    disc_convolve(free_ind, grid, make_disc_kernel(rmax), 0.0, spread);
    for (std::size_t i = 0; i < n; ++i) {
      if (spread[i] > 1e-12 || free_ind[i] > 0.0) region_px.push_back(static_cast<std::uint32_t>(i));
    }
  }

  StackedField au = initial_image(lin);
  StackedField w = lin.make_stacked();
  const StackedField& c = lin.offsets();
  const double tol = params.kkt_tol * (1.0 + norm2(c.values()));
  const std::size_t prefix_len = static_cast<std::size_t>(grid.height()) * (grid.width() + 1);
  std::vector<double> prefix(prefix_len);
  std::vector<double> conv(n), weighted(n);
  std::vector<double> atw(static_cast<std::size_t>(ch) * n);
  double xi[kMaxChannels], proj[kMaxChannels];
  if (ch > kMaxChannels) throw std::invalid_argument("at most 16 channels supported");

  const double inv_alpha = 1.0 / alpha;
  s.inner = InnerStats{};
  s.inner.alpha = alpha;

  for (int j = 0; j < iterations; ++j) {
    if (!free_px.empty()) {
      fill_combined(au, c, s.v, s.z, params.mu, w);

      // A^T w on the free pixels.
      for (auto i : free_px) {
        double acc = 0.0;
        for (int e = 0; e < slots; ++e) acc += -0.5 * w.block(e, 0)[i];
        atw[i] = acc;
      }
      for (int cc = 1; cc < ch; ++cc) {
        double* dst = atw.data() + cc * n;
        auto k = lin.coupling().channel(cc);
        for (auto i : free_px) dst[i] = 0.0;
        for (int e = 0; e < slots; ++e) {
          auto wb = w.block(e, cc);
          auto d = lin.diagonal(e).channel(cc);
          for (std::size_t i = 0; i < n; ++i) weighted[i] = k[i] * wb[i];
          row_prefix_sums(weighted, grid, 0.0, prefix);
          disc_from_prefix_at(prefix, grid, lin.kernels()[e], 0.0, free_px, conv);
          for (auto i : free_px) dst[i] += d[i] * wb[i] + conv[i];
        }
      }

      // Proximal step and projection.
      for (auto i : free_px) {
        bool finite = true;
        for (int cc = 0; cc < ch; ++cc) {
          xi[cc] = s.u.at(cc, i) - inv_alpha * (atw[cc * n + i] + gprime.at(cc, i));
          finite = finite && std::isfinite(xi[cc]);
        }
        if (!finite) throw NumericalDivergence(outer_index, j);
        simplex_project({xi, static_cast<std::size_t>(ch)}, {proj, static_cast<std::size_t>(ch)});
        for (int cc = 0; cc < ch; ++cc) s.u.at(cc, i) = proj[cc];
      }

      // A u on the region touched by the free pixels.
      for (int e = 0; e < slots; ++e) {
        auto dst = au.block(e, 0);
        auto u0 = s.u.channel(0);
        for (auto i : free_px) dst[i] = -0.5 * u0[i];
      }
      for (int cc = 1; cc < ch; ++cc) {
        auto uc = s.u.channel(cc);
        row_prefix_sums(uc, grid, 0.0, prefix);
        auto k = lin.coupling().channel(cc);
        for (int e = 0; e < slots; ++e) {
          disc_from_prefix_at(prefix, grid, lin.kernels()[e], 0.0, region_px, conv);
          auto d = lin.diagonal(e).channel(cc);
          auto dst = au.block(e, cc);
          for (auto i : region_px) dst[i] = d[i] * uc[i] + k[i] * conv[i];
        }
      }
    }

    const auto [primal, dual] = update_slack_and_multiplier(au, c, params, s.v, s.z);
    s.inner.iterations = j + 1;
    s.inner.primal_residual = primal;
    s.inner.dual_movement = dual;
    if (!std::isfinite(primal)) throw NumericalDivergence(outer_index, j);
    if (primal < tol && dual < tol) {
      s.inner.converged = true;
      break;
    }
  }
  return s;
}

namespace reference {

SolveState admm_solve(const LinearizedConstraint& lin, const MultiField& gprime, const AdmmParams& params,
                      double alpha, std::span<const int> pins, const BeltMask& belt, const SolveState& warm,
                      int iterations, int outer_index) {
  params.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const std::size_t n = lin.pixels();
  const int ch = lin.channels();

  SolveState s;
  s.u = warm.u;
  s.k = warm.k;
  init_multipliers(lin, params, warm, s);
  const LabelStack frozen = warm.u;

  StackedField au = lin.make_stacked();
  apply_linearized(lin, s.u.values(), au);
  StackedField w = lin.make_stacked();
  const StackedField& c = lin.offsets();
  const double tol = params.kkt_tol * (1.0 + norm2(c.values()));
  std::vector<double> atw(static_cast<std::size_t>(ch) * n);
  std::vector<double> xi(static_cast<std::size_t>(ch) * n);
  s.inner = InnerStats{};
  s.inner.alpha = alpha;

  for (int j = 0; j < iterations; ++j) {
    fill_combined(au, c, s.v, s.z, params.mu, w);
    apply_linearized_adjoint(lin, w, atw);
    auto uv = s.u.values();
    for (std::size_t i = 0; i < xi.size(); ++i) {
      xi[i] = uv[i] - (atw[i] + gprime.values()[i]) / alpha;
      if (!std::isfinite(xi[i])) throw NumericalDivergence(outer_index, j);
    }
    pinned_project(xi, pins, belt, frozen, s.u);
    apply_linearized(lin, s.u.values(), au);
    const auto [primal, dual] = update_slack_and_multiplier(au, c, params, s.v, s.z);
    s.inner.iterations = j + 1;
    s.inner.primal_residual = primal;
    s.inner.dual_movement = dual;
    if (primal < tol && dual < tol) {
      s.inner.converged = true;
      break;
    }
  }
  return s;
}

}  // namespace reference

KktResiduals kkt_residuals(const LinearizedConstraint& lin, const MultiField& gprime, std::span<const int> pins,
                           const BeltMask& belt, const SolveState& s) {
  const std::size_t n = lin.pixels();
  const int ch = lin.channels();
  KktResiduals r;

  std::vector<double> atz(static_cast<std::size_t>(ch) * n);
  lin.apply_adjoint(s.z, atz);
  std::vector<double> step(atz.size());
  auto uv = s.u.values();
  for (std::size_t i = 0; i < step.size(); ++i) step[i] = uv[i] - (atz[i] + gprime.values()[i]);
  LabelStack projected = s.u;
  pinned_project(step, pins, belt, s.u, projected);
  double acc = 0.0;
  for (std::size_t i = 0; i < uv.size(); ++i) {
    const double d = uv[i] - projected.values()[i];
    acc += d * d;
  }
  r.stationarity_u = std::sqrt(acc);

  acc = 0.0;
  auto vv = s.v.values();
  auto zv = s.z.values();
  for (std::size_t i = 0; i < vv.size(); ++i) {
    const double d = vv[i] - std::max(0.0, vv[i] + zv[i]);
    acc += d * d;
  }
  r.stationarity_v = std::sqrt(acc);

  StackedField au = lin.make_stacked();
  lin.apply(s.u.values(), au);
  acc = 0.0;
  auto av = au.values();
  auto cv = lin.offsets().values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - vv[i] - cv[i];
    acc += d * d;
  }
  r.primal = std::sqrt(acc);
  return r;
}

LabelStack initialize_segment(const ScribbleSet& scribbles) {
  scribbles.require_all_classes();
  const Grid2D& grid = scribbles.grid();
  const int ch = scribbles.classes();
  const int w = grid.width();
  const std::size_t n = grid.size();
  std::vector<double> vals(static_cast<std::size_t>(ch) * n, 0.0);
  for (int c = 1; c < ch; ++c) {
    std::vector<Point2> pts;
    for (auto p : scribbles.pixels(c)) pts.push_back({static_cast<double>(p % w), static_cast<double>(p / w)});
    const RegionMask hull = rasterize(quickhull(pts), grid);
    for (std::size_t i = 0; i < n; ++i) vals[c * n + i] = hull[i] ? 1.0 : 0.0;
  }
  LabelStack u(grid, ch, std::move(vals));
  if (ch > kMaxChannels) throw std::invalid_argument("at most 16 channels supported");
  double in[kMaxChannels], out[kMaxChannels];
  for (std::size_t i = 0; i < n; ++i) {
    double fg = 0.0;
    for (int c = 1; c < ch; ++c) fg += u.at(c, i);
    if (fg <= 1.0) {
      u.at(0, i) = 1.0 - fg;
      continue;
    }
    in[0] = 0.0;
    for (int c = 1; c < ch; ++c) in[c] = u.at(c, i);
    simplex_project({in, static_cast<std::size_t>(ch)}, {out, static_cast<std::size_t>(ch)});
    for (int c = 0; c < ch; ++c) u.at(c, i) = out[c];
  }
  return u;
}

LabelStack initialize_hull(const PointSet& points, const Grid2D& grid) {
  if (points.points.empty()) throw std::invalid_argument("hull needs a nonempty point set");
  const RegionMask s = rasterize_points(points, grid);
  LabelStack u(grid, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (s[i]) {
      u.at(0, i) = 0.0;
      u.at(1, i) = 1.0;
    }
  }
  return u;
}

double relative_change(const LabelStack& u_now, const LabelStack& u_then) {
  if (u_now.values().size() != u_then.values().size()) throw std::invalid_argument("relative change shape mismatch");
  double num = 0.0, den = 0.0;
  auto a = u_now.values();
  auto b = u_then.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::sqrt(den);
}

namespace {

long count_violations(const StackedField& residual, double tol) {
  long count = 0;
  for (int e = 0; e < residual.slots(); ++e) {
    for (int c = 1; c < residual.channels(); ++c) {
      for (double v : residual.block(e, c)) {
        if (v < -tol) ++count;
      }
    }
  }
  return count;
}

}  // namespace

SolveState outer_solve(const Objective& objective, const OuterParams& params, const AdmmParams& admm,
                       const LabelStack& u0, const ProgressFn& progress) {
  params.validate();
  admm.validate();
  if (!(objective.grid() == u0.grid()) || objective.channels() != u0.channels()) {
    throw std::invalid_argument("objective and initial stack differ in shape");
  }
  const std::size_t n = u0.pixels();
  const int ch = u0.channels();

  SolveState state;
  state.u = u0;
  for (std::size_t i = 0; i < n; ++i) {
    const int p = objective.pins[i];
    if (p < 0) continue;
    for (int c = 0; c < ch; ++c) state.u.at(c, i) = c == p ? 1.0 : 0.0;
  }
  LabelStack checkpoint = state.u;

  std::vector<int> alpha_radii;
  double alpha = 0.0;

  int k = 0;
  for (; k < params.max_outer; ++k) {
    const std::vector<int> radii =
        params.radii_override.empty() ? radii_schedule(k, params.schedule) : params.radii_override;
    const BeltMask belt = narrow_belt(state.u, params.belt_radius, params.theta, params.belt_literal);
    const LinearizedConstraint lin(state.u, radii, params.linearization);

    const double obj = objective_value(state.u, objective.g, objective.lambda, objective.sigma);
    const long viol = count_violations(lin.residual_at_reference(), params.violation_tol);
    state.objective_history.push_back(obj);
    state.violation_history.push_back(viol);
    state.belt_history.push_back(belt.count());

    MultiField gprime = objective.g;
    if (objective.lambda > 0.0) {
      const MultiField len = length_linear_term(state.u, objective.sigma, objective.lambda);
      auto gv = gprime.values();
      auto lv = len.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += lv[i];
    }

    if (admm.alpha_mode == AlphaMode::kFixed) {
      alpha = 1.0 + admm.mu;
    } else if (radii != alpha_radii) {
      alpha = choose_alpha(lin, admm);
      alpha_radii = radii;
    }

    const int budget = std::min(params.inner_budget, admm.max_iterations);
    SolveState next = admm_solve(lin, gprime, admm, alpha, objective.pins, belt, state, budget, k);
    state.u = std::move(next.u);
    state.v = std::move(next.v);
    state.z = std::move(next.z);
    state.radii = std::move(next.radii);
    state.inner = next.inner;
    state.k = k + 1;

    std::optional<double> err;
    if ((k + 1) % params.check_stride == 0) {
      err = relative_change(state.u, checkpoint);
      state.err_history.push_back(*err);
      checkpoint = state.u;
    }
    if (progress) {
      Progress p{k + 1, obj, viol, belt.count(), err, &state.u};
      if (!progress(p)) {
        ++k;
        break;
      }
    }
    if (err && *err < params.eps) {
      state.converged = true;
      ++k;
      break;
    }
  }
  state.k = k;
  state.hit_outer_cap = !state.converged && k >= params.max_outer;

  // Final diagnostics at the returned iterate.
  const std::vector<int> radii =
      params.radii_override.empty() ? radii_schedule(std::max(0, k - 1), params.schedule) : params.radii_override;
  state.objective_history.push_back(objective_value(state.u, objective.g, objective.lambda, objective.sigma));
  state.violation_history.push_back(violation_count(state.u, radii, params.violation_tol));
  state.belt_history.push_back(narrow_belt(state.u, params.belt_radius, params.theta, params.belt_literal).count());
  return state;
}

}  // namespace cvp
