#include <benchmark/benchmark.h>

#include "nhfloquet/entanglement.hpp"
#include "nhfloquet/gaussian.hpp"
#include "nhfloquet/spectral.hpp"
#include "nhfloquet/spin.hpp"

using namespace nhf;

namespace {

const ModelParams kParams = make_params(0.2, -0.2, 0.2, 0.1);

void BM_PeriodMapKicks(benchmark::State& state) {
  const LatticeSpec lat{static_cast<int>(state.range(0)), Boundary::PeriodicEvenParity};
  const auto kicks = FloquetKicks::from(kParams, lat);
  auto f = initial_frame(QuenchConfig{}, lat);
  for (auto _ : state) period_map(f, kicks);
  benchmark::DoNotOptimize(f.norm_log);
}
BENCHMARK(BM_PeriodMapKicks)->RangeMultiplier(2)->Range(16, 256);

void BM_PeriodMapDense(benchmark::State& state) {
  const LatticeSpec lat{static_cast<int>(state.range(0)), Boundary::PeriodicEvenParity};
  const auto tm = build_transfer_matrix(kParams, lat);
  auto f = initial_frame(QuenchConfig{}, lat);
  for (auto _ : state) period_map(f, tm);
  benchmark::DoNotOptimize(f.norm_log);
}
BENCHMARK(BM_PeriodMapDense)->RangeMultiplier(2)->Range(16, 256);

void BM_TransferMatrix(benchmark::State& state) {
  const LatticeSpec lat{static_cast<int>(state.range(0)), Boundary::Open};
  for (auto _ : state) benchmark::DoNotOptimize(build_transfer_matrix(kParams, lat));
}
BENCHMARK(BM_TransferMatrix)->RangeMultiplier(2)->Range(16, 128);

void BM_EntropyFromFrame(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const LatticeSpec lat{L, Boundary::PeriodicEvenParity};
  const auto kicks = FloquetKicks::from(kParams, lat);
  auto f = initial_frame(QuenchConfig{}, lat);
  for (int t = 0; t < 20; ++t) period_map(f, kicks);
  std::vector<int> sites(static_cast<std::size_t>(L / 2));
  for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = static_cast<int>(i);
  for (auto _ : state) benchmark::DoNotOptimize(entropy_from_frame(f, sites));
}
BENCHMARK(BM_EntropyFromFrame)->RangeMultiplier(2)->Range(16, 256);

void BM_SpinPeriod(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const LatticeSpec lat{L, Boundary::Open};
  auto psi = spin_product_state(std::vector<int>(static_cast<std::size_t>(L), 1), Basis::X);
  for (auto _ : state) benchmark::DoNotOptimize(apply_floquet_period(psi, kParams, lat, 0.1));
}
BENCHMARK(BM_SpinPeriod)->DenseRange(8, 14, 2);

}  // namespace

BENCHMARK_MAIN();
