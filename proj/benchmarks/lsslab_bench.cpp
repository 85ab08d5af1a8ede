#include <benchmark/benchmark.h>

#include "lsslab/clt_moments.hpp"
#include "lsslab/contour.hpp"
#include "lsslab/diagnostics.hpp"
#include "lsslab/simulator.hpp"
#include "lsslab/stieltjes.hpp"

using namespace lsslab;

static void BM_SolveSUnder(benchmark::State& state) {
  const PopulationSpectrum t({{0.05, 0.1}, {0.2, 0.2}, {0.4, 0.3}, {0.7, 0.25}, {1.0, 0.15}});
  const cplx z(0.7, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(solve_s_under(z, t, 0.5));
}
BENCHMARK(BM_SolveSUnder);

static void BM_SolveAlongContour(benchmark::State& state) {
  const auto t = PopulationSpectrum::identity();
  const auto c = build_contour(t, 0.5, 0.05, 1.0, static_cast<int>(state.range(0)));
  const auto nodes = c.rule(c.nodes()).nodes;
  for (auto _ : state) benchmark::DoNotOptimize(solve_along(nodes, t, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(nodes.size()));
}
BENCHMARK(BM_SolveAlongContour)->Arg(32)->Arg(64);

static void BM_ContourResidue(benchmark::State& state) {
  const Contour c(0.2, 2.3, 1.0, 64);
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate([](cplx z) { return 1.0 / (z - 1.0); }, c));
}
BENCHMARK(BM_ContourResidue);

static void BM_ComputeMoments(benchmark::State& state) {
  const auto t = PopulationSpectrum::identity();
  const auto f = TestFunction::parse("x^2");
  for (auto _ : state) benchmark::DoNotOptimize(compute_moments(f, t, 0.5, CltCase::kRealGaussian));
}
BENCHMARK(BM_ComputeMoments)->Unit(benchmark::kMillisecond);

static void BM_Replicate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t = PopulationSpectrum::identity();
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const auto x = sample_entries(EntryEnsemble::real_gaussian(), n / 2, n, seed++);
    benchmark::DoNotOptimize(eigenvalues(assemble_B(t, x, n)));
  }
}
BENCHMARK(BM_Replicate)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_KsToNormal(benchmark::State& state) {
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::sin(static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(ks_to_normal(xs));
}
BENCHMARK(BM_KsToNormal)->Arg(2000)->Arg(4000);

BENCHMARK_MAIN();
