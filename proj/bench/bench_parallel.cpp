#include <benchmark/benchmark.h>

#include <cmath>

#include "hawkes_stein/experiment.hpp"
#include "hawkes_stein/parallel.hpp"
#include "hawkes_stein/philox.hpp"
#include "hawkes_stein/simulate.hpp"
#include "hawkes_stein/volterra.hpp"

using namespace hawkes_stein;

namespace {

GridFunction decay(std::size_t n) {
  return sample_grid([](double t) { return 0.5 * std::exp(-t); }, 0.01, n);
}

double replicate(std::size_t r) {
  const Configuration c(DrivingMeasure(derive_seed(1, 0, r)));
  return functional_standard(simulate(linear_reference(), c, 200.0));
}

std::vector<double> sample(std::size_t n) {
  return serial_map<double>(n, [](std::size_t r) { return replicate(r); });
}

void BM_convolve_serial(benchmark::State& s) {
  const auto f = decay(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(convolve_serial(f, f));
}

void BM_convolve_omp(benchmark::State& s) {
  const auto f = decay(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(convolve(f, f));
}

void BM_replications_serial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(sample(static_cast<std::size_t>(s.range(0))));
}

void BM_replications_omp(benchmark::State& s) {
  for (auto _ : s) {
    benchmark::DoNotOptimize(
        parallel_map<double>(static_cast<std::size_t>(s.range(0)), [](std::size_t r) { return replicate(r); }));
  }
}

void BM_bootstrap_serial(benchmark::State& s) {
  const auto x = sample(2000);
  for (auto _ : s) benchmark::DoNotOptimize(bootstrap_se_serial(x, 2.0, static_cast<std::size_t>(s.range(0)), 3));
}

void BM_bootstrap_omp(benchmark::State& s) {
  const auto x = sample(2000);
  for (auto _ : s) benchmark::DoNotOptimize(bootstrap_se(x, 2.0, static_cast<std::size_t>(s.range(0)), 3));
}

}  // namespace

BENCHMARK(BM_convolve_serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolve_omp)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replications_serial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replications_omp)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_serial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_omp)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
