#include <benchmark/benchmark.h>

#include "dqpt/critical.hpp"
#include "dqpt/loschmidt.hpp"
#include "dqpt/oracle.hpp"
#include "dqpt/sweep.hpp"

namespace {

dqpt::QuenchSchedule kitaev_schedule() {
    const auto h02 = dqpt::BlochDispersion::kitaev({1.0, 2.0, 2.0});
    return {h02, dqpt::BlochDispersion::kitaev({1.0, 0.2, 5.0}), h02, 1.3726051718491876};
}

void BM_RateFunction(benchmark::State& state) {
    const auto s = kitaev_schedule();
    const auto grid = dqpt::critical_aligned_grid(s, static_cast<std::size_t>(state.range(0)));
    const auto field = dqpt::thermal_bloch(s.h0, dqpt::Temperature::from_T(5.0), grid.points());
    const auto times = dqpt::uniform_times(3.0, 3001);
    const auto threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dqpt::rate_function(s, field, times, threads));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 3001);
}
BENCHMARK(BM_RateFunction)->Args({1000, 1})->Args({1000, 0})->Args({4000, 0})->Unit(benchmark::kMillisecond);

void BM_AmplitudeStage2(benchmark::State& state) {
    const dqpt::Vec3 n1{0.0, 0.6, 0.8}, n2{1.0, 0.0, 0.0}, nvec{0.1, 0.2, -0.3};
    double t = 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dqpt::amplitude_stage2_k(nvec, 1.1, n1, 1.0, 0.7, n2, t));
        t += 1e-9;
    }
}
BENCHMARK(BM_AmplitudeStage2);

void BM_FindOrthogonalMomenta(benchmark::State& state) {
    const auto a = dqpt::BlochDispersion::kitaev({1.0, 0.2, 5.0});
    const auto b = dqpt::BlochDispersion::kitaev({1.0, 2.0, 2.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(dqpt::find_orthogonal_momenta(a, b, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_FindOrthogonalMomenta)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_KitaevPhaseDiagram(benchmark::State& state) {
    const auto axis = dqpt::Axis::linspace("v", -4.0, 4.0, 201);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dqpt::kitaev_phase_diagram(0.2, 5.0, axis, axis, 1));
    }
}
BENCHMARK(BM_KitaevPhaseDiagram)->Unit(benchmark::kMillisecond);

void BM_OracleDraw(benchmark::State& state) {
    std::size_t i = 0;
    for (auto _ : state) {
        const auto d = dqpt::oracle::make_draw(1, i++);
        const auto temp = dqpt::Temperature::from_beta(d.beta);
        benchmark::DoNotOptimize(dqpt::oracle::amplitude_bruteforce(d.stages, d.tau, temp, d.t));
        benchmark::DoNotOptimize(dqpt::oracle::closed_form_amplitude(d.stages, d.tau, temp, d.t));
    }
}
BENCHMARK(BM_OracleDraw);

}  // namespace

BENCHMARK_MAIN();
