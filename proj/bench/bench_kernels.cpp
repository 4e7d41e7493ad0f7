#include <benchmark/benchmark.h>

#include <random>

#include "cvp/convexity.hpp"
#include "cvp/fixtures.hpp"
#include "cvp/kernels.hpp"
#include "cvp/optimizer.hpp"

namespace {

std::vector<double> random_field(const cvp::Grid2D& g) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(0, 1);
  std::vector<double> v(g.size());
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_DiscReference(benchmark::State& st) {
  const cvp::Grid2D g(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
  const auto k = cvp::make_disc_kernel(static_cast<int>(st.range(1)));
  const auto in = random_field(g);
  std::vector<double> out(g.size());
  for (auto _ : st) {
    cvp::reference::convolve_direct(in, g, k.taps(), 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

void BM_DiscParallel(benchmark::State& st) {
  const cvp::Grid2D g(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
  const auto k = cvp::make_disc_kernel(static_cast<int>(st.range(1)));
  const auto in = random_field(g);
  std::vector<double> out(g.size());
  for (auto _ : st) {
    cvp::disc_convolve(in, g, k, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

void BM_GaussianReference(benchmark::State& st) {
  const cvp::Grid2D g(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
  const auto k = cvp::make_gaussian_kernel(0.01, g);
  const auto in = random_field(g);
  std::vector<double> out(g.size());
  for (auto _ : st) {
    cvp::reference::convolve_direct(in, g, k.taps(), 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_GaussianParallel(benchmark::State& st) {
  const cvp::Grid2D g(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
  const auto k = cvp::make_gaussian_kernel(0.01, g);
  const auto in = random_field(g);
  std::vector<double> out(g.size());
  for (auto _ : st) {
    cvp::gaussian_convolve(in, g, k, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

cvp::LinearizedConstraint square_linearization(int size) {
  const auto fx = cvp::fixtures::square_case(size);
  return cvp::LinearizedConstraint(cvp::initialize_segment(fx.scribbles), {1, 3, 5});
}

void BM_ApplyReference(benchmark::State& st) {
  const auto lin = square_linearization(static_cast<int>(st.range(0)));
  auto out = lin.make_stacked();
  for (auto _ : st) {
    cvp::reference::apply_linearized(lin, lin.reference().values(), out);
    benchmark::DoNotOptimize(out.values().data());
  }
}

void BM_ApplyParallel(benchmark::State& st) {
  const auto lin = square_linearization(static_cast<int>(st.range(0)));
  auto out = lin.make_stacked();
  for (auto _ : st) {
    lin.apply(lin.reference().values(), out);
    benchmark::DoNotOptimize(out.values().data());
  }
}

struct AdmmSetup {
  cvp::fixtures::SegmentationCase fx;
  cvp::Objective obj;
  cvp::LabelStack u0;
  cvp::BeltMask belt;
};

AdmmSetup admm_setup(int size) {
  AdmmSetup s{cvp::fixtures::square_case(size), {}, {}, {}};
  cvp::SegmentInputs in{&s.fx.image, &s.fx.scribbles};
  s.obj = cvp::assemble_segment_objective(in);
  s.u0 = cvp::initialize_segment(s.fx.scribbles);
  s.belt = cvp::narrow_belt(s.u0, 3, 0.1);
  return s;
}

template <bool Reference>
void BM_Admm(benchmark::State& st) {
  const auto s = admm_setup(static_cast<int>(st.range(0)));
  const cvp::LinearizedConstraint lin(s.u0, {1, 3, 5});
  const cvp::AdmmParams p;
  const double alpha = cvp::choose_alpha(lin, p);
  cvp::SolveState warm;
  warm.u = s.u0;
  for (auto _ : st) {
    auto r = Reference ? cvp::reference::admm_solve(lin, s.obj.g, p, alpha, s.obj.pins, s.belt, warm, 10)
                       : cvp::admm_solve(lin, s.obj.g, p, alpha, s.obj.pins, s.belt, warm, 10);
    benchmark::DoNotOptimize(r.u.values().data());
  }
}

}  // namespace

BENCHMARK(BM_DiscReference)->Args({256, 5})->Args({256, 13})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiscParallel)->Args({256, 5})->Args({256, 13})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussianReference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussianParallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyReference)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyParallel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Admm<true>)->Name("BM_AdmmReference")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Admm<false>)->Name("BM_AdmmSparse")->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
