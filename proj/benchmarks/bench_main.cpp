#include <benchmark/benchmark.h>

#include "heatmoment/bel.hpp"
#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/control.hpp"
#include "heatmoment/spde.hpp"
#include "heatmoment/spectral.hpp"

using namespace heatmoment;

static void BM_BuildFamily(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    BiorthogonalFamily f = build_family(HeatRates{N}, Horizon::finite(1.0));
    benchmark::DoNotOptimize(f.residual);
  }
  state.SetLabel("bits=" + std::to_string(build_family(HeatRates{N}, Horizon::finite(1.0)).precision_bits));
}
BENCHMARK(BM_BuildFamily)->Arg(4)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Synthesize(benchmark::State& state) {
  const std::size_t N = 12;
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, N);
  const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::finite(1.0));
  const StateVector z0({1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(z0.resized(N), prof, 1.0, N, fam).norm());
}
BENCHMARK(BM_Synthesize)->Unit(benchmark::kMicrosecond);

static void BM_ExactSample(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, N);
  const GaussianLaw law = transition_law(StateVector::zeros(N), prof, 0.1, N);
  SamplerConfig c;
  c.N = N;
  c.T = 0.1;
  c.samples = 100000;
  c.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample(law, c).sum());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.samples));
}
BENCHMARK(BM_ExactSample)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_EulerOracle(benchmark::State& state) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 3);
  const StateVector x({1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(euler_oracle(x, prof, 1.0, 4096, 1000, 1).sum());
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EulerOracle)->Unit(benchmark::kMillisecond);

static void BM_BelGradient(benchmark::State& state) {
  const std::size_t N = 4;
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, N);
  const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::finite(0.1));
  SamplerConfig c;
  c.N = N;
  c.T = 0.1;
  c.samples = 100000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bel_gradient(tanh_coordinate(1), StateVector({0.3, 0, 0, 0}), StateVector::unit(1, N), prof, c, fam).value);
  }
}
BENCHMARK(BM_BelGradient)->Unit(benchmark::kMillisecond);

static void BM_DInfinite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(d_infinite(5, state.range(0)).partial);
}
BENCHMARK(BM_DInfinite)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
