#include <benchmark/benchmark.h>
#include <omp.h>

#include "ilmc/coupling.hpp"
#include "ilmc/potentials.hpp"
#include "ilmc/samplers.hpp"

namespace {

using ilmc::Exec;

const ilmc::Potential& gl() {
  static const ilmc::Potential p = ilmc::make_ginzburg_landau(1, 1.0, 1.0);
  return p;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial"
                                     : "parallel x" + std::to_string(omp_get_max_threads()));
}

void BM_TerminalStates(benchmark::State& state) {
  const ilmc::Vec x0 = ilmc::scalar_vec(0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ilmc::sample_terminal_states(gl(), 0.1, ilmc::Method::kIlmc, x0, 2000, 100, 1, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 2000 * 100);
  label(state);
}

void BM_Contraction(benchmark::State& state) {
  const auto lyap = ilmc::LyapunovConfig::defaults_for(gl());
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ilmc::estimate_contraction(gl(), 0.05, 100, 1000, 2.0, lyap, 1, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 1000 * 100);
  label(state);
}

void BM_Crossval(benchmark::State& state) {
  const ilmc::Vec x = ilmc::scalar_vec(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(ilmc::one_step_crossval(gl(), 0.1, x, 10000, 100, 1, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 10000);
  label(state);
}

BENCHMARK(BM_TerminalStates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Contraction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Crossval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
