// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <map>

#include "svarkit/bootstrap.hpp"
#include "svarkit/breaks.hpp"
#include "svarkit/critvals.hpp"
#include "svarkit/robust.hpp"
#include "svarkit/simulate.hpp"

using namespace svarkit;

namespace {

const Matrix& sample(Index T) {
  static std::map<Index, Matrix> cache;
  auto it = cache.find(T);
  if (it == cache.end()) {
    DgpSpec s;
    s.kind = DgpKind::Var;
    s.coeffs = {Matrix{{0.5, 0.1}, {0.2, 0.3}}};
    s.sigma = Matrix::Identity(2, 2);
    s.T = T;
    it = cache.emplace(T, simulate(s, 7).y).first;
  }
  return it->second;
}

template <bool Parallel>
void BM_mbb(benchmark::State& st) {
  const VarModel m = fit_var(sample(500), 1, true);
  BootstrapConfig cfg;
  cfg.replicates = 499;
  cfg.seed = 1;
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? mbb_distribution(m, cfg) : mbb_distribution_serial(m, cfg));
}

template <bool Parallel>
void BM_mlts(benchmark::State& st) {
  const Matrix& y = sample(1000);
  MltsSearch cfg;
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? fit_mlts(y, 1, 0.25, cfg) : fit_mlts_serial(y, 1, 0.25, cfg));
}

template <bool Parallel>
void BM_bridge(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? simulate_bridge_table(10000, 500, 3)
                                      : simulate_bridge_table_serial(10000, 500, 3));
}

template <bool Parallel>
void BM_breaks(benchmark::State& st) {
  const Matrix& y = sample(2000);
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? detect_breaks(y, 1) : detect_breaks_serial(y, 1));
}

}  // namespace

BENCHMARK(BM_mbb<false>)->Name("mbb/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mbb<true>)->Name("mbb/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mlts<false>)->Name("mlts/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mlts<true>)->Name("mlts/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bridge<false>)->Name("bridge_table/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bridge<true>)->Name("bridge_table/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_breaks<false>)->Name("break_grid/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_breaks<true>)->Name("break_grid/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
