// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cvp/convexity.hpp"
#include "cvp/fixtures.hpp"
#include "cvp/geometry.hpp"
#include "cvp/imageio.hpp"
#include "cvp/optimizer.hpp"
#include "cvp/tasks.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using cvp::Grid2D;
using cvp::LabelStack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LabelStack random_stack(const Grid2D& g, int channels, std::mt19937_64& rng) {
  std::exponential_distribution<double> dist(1.0);
  std::bernoulli_distribution sharp(0.3);
  LabelStack u(g, channels);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (sharp(rng)) {
      const int c = static_cast<int>(rng() % channels);
      for (int k = 0; k < channels; ++k) u.at(k, i) = k == c ? 1.0 : 0.0;
      continue;
    }
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += (u.at(c, i) = dist(rng));
    for (int c = 0; c < channels; ++c) u.at(c, i) /= s;
  }
  return u;
}

LabelStack mask_stack(const cvp::RegionMask& m) {
  std::vector<int> labels(m.grid().size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = m[i] ? 1 : 0;
  return LabelStack::from_labels(m.grid(), 2, labels);
}

Outcome simplex_projection() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.5);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int t = 0; t < 10000; ++t) {
    const int n = 2 + t % 7;
    std::vector<double> xi(n), out(n);
    for (auto& x : xi) x = nd(rng);
    cvp::simplex_project(xi, out);
    const auto ref = oracle::simplex_active_set(xi);
    if (ref.size() != xi.size()) return {false, "oracle found no KKT support"};
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(out[i] - ref[i]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, fmt("max error %.3g over 10000 vectors, %.2f s", worst, secs)};
}

Outcome linearization_exactness() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Grid2D g(10 + static_cast<int>(rng() % 8), 10 + static_cast<int>(rng() % 8));
    const int channels = 2 + static_cast<int>(rng() % 3);
    const int r = 1 + static_cast<int>(rng() % 7);
    const auto u = random_stack(g, channels, rng);
    const auto uref = random_stack(g, channels, rng);
    const cvp::LinearizedConstraint lin(uref, {r});
    auto au = lin.make_stacked();
    lin.apply(u.values(), au);
    const auto c = cvp::convexity_residual(u, r);
    const std::size_t n = g.size();
    for (int ch = 1; ch < channels; ++ch) {
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = u.at(ch, i) - uref.at(ch, i);
      for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
          const std::size_t i = g.index(y, x);
          const double remainder = diff[i] * oracle::disc_mean(diff, g.height(), g.width(), y, x, r, 0.0);
          const double lhs = c.values.at(ch, i) - (au.block(0, ch)[i] - lin.offsets().block(0, ch)[i]);
          worst = std::max(worst, std::abs(lhs - remainder));
        }
      }
    }
  }
  return {worst <= 1e-12, fmt("max |C(u) - lin - remainder| = %.3g over 1000 triples", worst)};
}

Outcome adjoint_correctness() {
  std::set<std::vector<int>> schedules;
  for (int k = 0; k < 700; k += 100) schedules.insert(cvp::radii_schedule(k, cvp::ScheduleKind::kSegment));
  for (int k = 0; k < 1000; k += 100) schedules.insert(cvp::radii_schedule(k, cvp::ScheduleKind::kHull));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const Grid2D g(24, 28);
  double worst = 0.0;
  for (const auto& radii : schedules) {
    for (int t = 0; t < 100; ++t) {
      const auto uk = random_stack(g, 3, rng);
      const cvp::LinearizedConstraint lin(uk, radii);
      std::vector<double> x(uk.values().size()), aty(x.size());
      for (auto& v : x) v = nd(rng);
      auto y = lin.make_stacked();
      for (auto& v : y.values()) v = nd(rng);
      auto ax = lin.make_stacked();
      lin.apply(x, ax);
      lin.apply_adjoint(y, aty);
      const double lhs = cvp::dot(ax.values(), y.values());
      const double rhs = cvp::dot(x, aty);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
  }
  return {worst <= 1e-10,
          fmt("max relative mismatch %.3g over %zu schedules x 100 pairs", worst, schedules.size())};
}

Outcome theorem_corpus() {
  const Grid2D g(160, 160);
  const std::vector<int> radii = {1, 4, 7, 10, 13};
  int total = 0, agree = 0, strict = 0, strict_ok = 0, nonconvex = 0, nonconvex_ok = 0;
  std::string misses;
  for (const auto& s : cvp::fixtures::theorem_corpus(g, 2024)) {
    if (!(s.feature_size > 26.0)) continue;
    const bool convex = oracle::digitally_convex(s.mask);
    const bool lib_convex = cvp::digital_convexity_oracle(s.mask);
    const bool feasible = cvp::violation_count(mask_stack(s.mask), radii, 1e-6) == 0;
    const bool ok = convex == feasible && lib_convex == convex;
    ++total;
    agree += ok;
    if (!ok) misses += " " + s.name;
    if (s.regime == cvp::fixtures::Regime::kStrictlyConvex) {
      ++strict;
      strict_ok += ok;
    } else if (s.regime == cvp::fixtures::Regime::kStronglyNonconvex) {
      ++nonconvex;
      nonconvex_ok += ok;
    }
  }
  const double rate = total ? static_cast<double>(agree) / total : 0.0;
  const bool pass = total >= 50 && rate >= 0.95 && strict_ok == strict && nonconvex_ok == nonconvex;
  return {pass, fmt("%d/%d agree (%.1f%%), strictly convex %d/%d, strongly nonconvex %d/%d%s%s", agree, total,
                    100.0 * rate, strict_ok, strict, nonconvex_ok, nonconvex, misses.empty() ? "" : "; misses:",
                    misses.c_str())};
}

// Independent KKT residuals for a one-radius Taylor instance with no pins and
// a full belt.
std::array<double, 3> oracle_kkt(const LabelStack& uk, int r, const cvp::MultiField& gp, const cvp::SolveState& s) {
  const std::size_t n = uk.pixels();
  const int ch = uk.channels();
  const auto lin = oracle::linearized_minus_offset(s.u, uk, r);
  std::vector<double> z(s.z.values().begin(), s.z.values().end());
  const auto atz = oracle::linearized_adjoint(z, uk, r);
  double primal = 0.0, sv = 0.0, su = 0.0;
  for (std::size_t i = 0; i < lin.size(); ++i) {
    primal += std::pow(lin[i] - s.v.values()[i], 2);
    const double v = s.v.values()[i];
    sv += std::pow(v - std::max(0.0, v + z[i]), 2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> step(ch);
    for (int c = 0; c < ch; ++c) step[c] = s.u.at(c, i) - atz[c * n + i] - gp.at(c, i);
    const auto p = oracle::simplex_active_set(step);
    for (int c = 0; c < ch; ++c) su += std::pow(s.u.at(c, i) - p[c], 2);
  }
  return {std::sqrt(primal), std::sqrt(su), std::sqrt(sv)};
}

Outcome inner_admm() {
  const Grid2D g(16, 16);
  struct Instance {
    cvp::RegionMask shape;
    int radius;
  };
  std::vector<Instance> instances;
  instances.push_back({cvp::fixtures::disc_mask(g, {7.5, 7.5}, 5.0), 1});
  instances.push_back({cvp::fixtures::disc_mask(g, {6.0, 9.0}, 4.5), 2});
  instances.push_back({cvp::rasterize(cvp::Polygon{{{3, 4}, {12, 4}, {12, 11}, {3, 11}}}, g), 3});
  instances.push_back({cvp::rasterize(cvp::fixtures::random_convex_polygon({8, 8}, 6, 6, 9), g), 2});
  instances.push_back({cvp::rasterize(cvp::Polygon{{{2, 13}, {13, 2}, {13, 13}}}, g), 1});
  cvp::AdmmParams params;
  params.tau = 1.0;
  params.alpha_mode = cvp::AlphaMode::kSafe;
  params.kkt_tol = 1e-9;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  bool pass = true;
  std::string detail;
  double worst_primal = 0.0, worst_kkt = 0.0;
  int max_iter = 0;
  for (const auto& inst : instances) {
    const auto uk = mask_stack(inst.shape);
    const cvp::LinearizedConstraint lin(uk, {inst.radius});
    cvp::MultiField gp(g, 2);
    for (double& v : gp.channel(1)) v = d(rng);
    const std::vector<int> pins(g.size(), -1);
    const auto belt = cvp::full_belt(g);
    cvp::SolveState warm;
    warm.u = uk;
    cvp::SolveState s;
    try {
      s = cvp::admm_solve(lin, gp, params, cvp::choose_alpha(lin, params), pins, belt, warm, 5000);
    } catch (const std::exception& e) {
      return {false, std::string("solver threw: ") + e.what()};
    }
    const auto lib = cvp::kkt_residuals(lin, gp, pins, belt, s);
    const auto ora = oracle_kkt(uk, inst.radius, gp, s);
    const double kkt = std::max({ora[0], ora[1], ora[2], lib.primal, lib.stationarity_u, lib.stationarity_v});
    worst_primal = std::max(worst_primal, ora[0]);
    worst_kkt = std::max(worst_kkt, kkt);
    max_iter = std::max(max_iter, s.inner.iterations);
    if (!(ora[0] < 1e-4) || !(kkt < 1e-3) || !std::isfinite(kkt)) pass = false;
  }
  return {pass, fmt("5 instances, max primal %.3g, max KKT %.3g, max iterations %d", worst_primal, worst_kkt,
                    max_iter)};
}

const std::vector<int> kHullCounts = {20, 50, 80, 120, 160, 200, 260, 330, 410, 500};

Outcome clean_hull() {
  const Grid2D g(256, 256);
  cvp::RunConfig cfg;
  double sum = 0.0, worst = 0.0, slowest = 0.0;
  bool pass = true;
  std::string per;
  for (std::size_t i = 0; i < kHullCounts.size(); ++i) {
    const auto pts = cvp::fixtures::convex_point_set(g, kHullCounts[i], 300 + i);
    const auto reference = cvp::rasterize(cvp::quickhull(pts.points), g);
    const auto t0 = Clock::now();
    const auto r = cvp::run_hull(pts, g, cfg, false);
    const double secs = seconds_since(t0);
    const double sd = r.mask.empty() ? INFINITY : oracle::sdist(r.mask, reference);
    sum += sd;
    worst = std::max(worst, sd);
    slowest = std::max(slowest, secs);
    per += fmt(" %.2f%%", 100 * sd);
    if (!(sd <= 0.02) || secs > 120.0) pass = false;
  }
  const double mean = sum / kHullCounts.size();
  pass = pass && mean <= 0.015;
  return {pass, fmt("S-dist mean %.2f%%, max %.2f%%, slowest %.1f s; per set:%s", 100 * mean, 100 * worst, slowest,
                    per.c_str())};
}

Outcome noisy_hull() {
  const Grid2D g(256, 256);
  cvp::RunConfig cfg;
  cfg.gamma = 10.0;
  cfg.outer.lambda = 1.0;
  double worst = 0.0;
  bool pass = true;
  std::string per;
  for (std::size_t i = 0; i < kHullCounts.size(); ++i) {
    const auto clean = cvp::fixtures::convex_point_set(g, kHullCounts[i], 300 + i);
    const auto noisy = cvp::fixtures::with_outliers(clean, g, 0.05, 900 + i);
    const auto reference = cvp::rasterize(cvp::quickhull(clean.points), g);
    const auto r = cvp::run_hull(noisy, g, cfg, true);
    const double sd = r.mask.empty() ? INFINITY : oracle::sdist(r.mask, reference);
    worst = std::max(worst, sd);
    per += r.mask.empty() ? std::string(" empty") : fmt(" %.2f%%", 100 * sd);
    if (!(sd <= 0.05)) pass = false;
  }
  return {pass, fmt("max S-dist %.2f%%; per set:%s", 100 * worst, per.c_str())};
}

Outcome segmentation() {
  cvp::RunConfig cfg;
  bool pass = true;
  std::string per;
  double worst_sd = 0.0, worst_ratio = 1.0;
  for (int i = 0; i < cvp::fixtures::kOccludedCases; ++i) {
    const auto fx = cvp::fixtures::occluded_case(i);
    const auto r = cvp::run_segment(fx.image, fx.scribbles, cfg);
    double case_sd = 0.0, case_ratio = 1.0;
    for (int c = 1; c < fx.channels; ++c) {
      const auto& mask = r.masks[c];
      for (const auto& comp : cvp::component_masks(mask)) {
        const auto hull = cvp::rasterize(cvp::Polygon{oracle::monotone_chain(comp.pixel_centers())}, mask.grid());
        case_ratio = std::min(case_ratio, static_cast<double>(comp.area()) / static_cast<double>(hull.area()));
      }
      const double sd = mask.empty() ? INFINITY : oracle::sdist(mask, fx.truth_mask(c));
      case_sd = std::max(case_sd, sd);
    }
    worst_sd = std::max(worst_sd, case_sd);
    worst_ratio = std::min(worst_ratio, case_ratio);
    per += fmt(" %s(ratio %.3f, S-dist %.2f%%)", fx.name.c_str(), case_ratio, 100 * case_sd);
    if (!(case_ratio >= 0.95) || !(case_sd <= 0.03)) pass = false;
  }
  return {pass, fmt("min ratio %.3f, max S-dist %.2f%%;%s", worst_ratio, 100 * worst_sd, per.c_str())};
}

Outcome monotonicity() {
  const auto fx = cvp::fixtures::square_case(128);
  const auto r = cvp::run_segment(fx.image, fx.scribbles, cvp::RunConfig{});
  const auto& h = r.state.objective_history;
  const double slack = 1e-6 * (1.0 + std::abs(h.front()));
  int increases = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < h.size(); ++k) {
    worst = std::max(worst, h[k] - h[k - 1]);
    if (h[k] - h[k - 1] > slack) ++increases;
  }
  const long viol = r.state.violation_history.back();
  const std::size_t belt = r.state.belt_history.back();
  const bool pass = increases == 0 && static_cast<double>(viol) <= 0.01 * static_cast<double>(belt);
  return {pass, fmt("%zu objective values, %d increases above slack (largest step %+.3g), final violations %ld of "
                    "%zu belt pixels",
                    h.size(), increases, worst, viol, belt)};
}

Outcome multi_hull() {
  const Grid2D g(256, 256);
  const auto pts = cvp::fixtures::two_clusters(g, 20, 100);
  cvp::RunConfig cfg;
  const auto a = cvp::run_hull(pts, g, cfg, false);
  const auto split = cvp::component_masks(a.mask);
  bool split_ok = split.size() == 2;
  for (const auto& m : split) split_ok = split_ok && oracle::digitally_convex(m);
  cvp::RunConfig big = cfg;
  big.outer.radii_override = {60, 65, 70};
  const auto b = cvp::run_hull(pts, g, big, false);
  const int merged = oracle::component_count(b.mask);
  return {split_ok && merged == 1,
          fmt("default schedule: %zu components (convex: %s); radii {60,65,70}: %d component(s)", split.size(),
              split_ok ? "yes" : "no", merged)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CVP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "cvp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto fx = cvp::fixtures::occluded_case(3, 96);
  const auto& g = fx.image.grid();
  std::vector<std::uint8_t> img(g.size()), scr(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) img[i] = static_cast<std::uint8_t>(std::lround(fx.image.values()[i] * 255));
  for (int c = 0; c < fx.scribbles.classes(); ++c) {
    for (auto p : fx.scribbles.pixels(c)) scr[p] = static_cast<std::uint8_t>(c + 1);
  }
  cvp::write_file(dir / "image.pgm", cvp::encode_pgm(g, img));
  cvp::write_file(dir / "scribbles.pgm", cvp::encode_pgm(g, scr));
  const auto pts = cvp::fixtures::with_outliers(cvp::fixtures::convex_point_set(Grid2D(96, 96), 60, 4), Grid2D(96, 96),
                                                0.05, 5);
  std::string csv = "x,y\n";
  for (const auto& p : pts.points) csv += fmt("%.17g,%.17g\n", p.x, p.y);
  cvp::write_file(dir / "points.csv", csv);

  std::vector<std::string> differing;
  int files = 0;
  for (int run = 0; run < 2; ++run) {
    const std::string out = (dir / ("run" + std::to_string(run))).string();
    run_cli("segment --image " + (dir / "image.pgm").string() + " --scribbles " + (dir / "scribbles.pgm").string() +
            " --seed 7 --max-outer 400 --out-dir " + out + "/segment");
    run_cli("hull --noisy --points " + (dir / "points.csv").string() +
            " --width 96 --height 96 --max-outer 400 --out-dir " + out + "/hull");
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir / "run0")) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    const auto rel = fs::relative(entry.path(), dir / "run0");
    ++files;
    const fs::path other = dir / "run1" / rel;
    if (!fs::exists(other) || cvp::read_file(entry.path()) != cvp::read_file(other)) differing.push_back(rel.string());
  }
  fs::remove_all(dir);
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {files >= 10 && differing.empty(),
          fmt("%d output files compared across two runs, %zu differ%s", files, differing.size(), list.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"simplex projection vs active-set oracle", simplex_projection},
      {"linearization exactness", linearization_exactness},
      {"adjoint correctness", adjoint_correctness},
      {"digital convexity vs constraint feasibility", theorem_corpus},
      {"inner ADMM convergence", inner_admm},
      {"clean hull vs quickhull", clean_hull},
      {"noisy hull robustness", noisy_hull},
      {"segmentation convexity", segmentation},
      {"objective monotonicity", monotonicity},
      {"multi-hull phase behavior", multi_hull},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
