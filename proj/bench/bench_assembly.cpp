#include <benchmark/benchmark.h>

#include "hsnl/fem1d.hpp"
#include "hsnl/kernels.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/symbols.hpp"

namespace {

const hsnl::Fn one = [](double) { return 1.0; };

void BM_AssembleSerial(benchmark::State& state) {
    const auto w = hsnl::constant_kernel(1, 0.1);
    const auto mesh = hsnl::make_mesh(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hsnl::assemble_serial(w, 1, one, one, mesh).stiffness(0, 0));
}

void BM_AssembleParallel(benchmark::State& state) {
    const auto w = hsnl::constant_kernel(1, 0.1);
    const auto mesh = hsnl::make_mesh(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hsnl::assemble(w, 1, one, one, mesh).stiffness(0, 0));
}

void BM_AssembleRiesz(benchmark::State& state) {
    const auto w = hsnl::riesz_truncated(1, 0.5);
    const auto mesh = hsnl::make_mesh(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hsnl::assemble(w, 1, one, one, mesh).stiffness(0, 0));
}

void BM_SymbolGrid(benchmark::State& state) {
    const auto w = hsnl::riesz_truncated(1, 0.5);
    const double nu[1] = {1.0}, dir[1] = {1.0};
    const auto grid = hsnl::log_grid(1e-2, 1e2, static_cast<int>(state.range(0)), dir);
    for (auto _ : state) benchmark::DoNotOptimize(hsnl::symbol_grid(w, nu, grid).size());
}

}  // namespace

BENCHMARK(BM_AssembleSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleRiesz)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SymbolGrid)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
