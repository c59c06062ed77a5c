#include <benchmark/benchmark.h>

#include "qnet/simulator.hpp"
#include "qnet/workloads.hpp"

using namespace qnet;

namespace {
const ParameterSet kDefaults = default_ion_trap();
}

// Full event-driven runs; the counter reports simulated instructions/s.
static void BM_RunQft(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const GridLayout layout =
        build_mesh(side, side, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    InstructionStream stream = qft_pattern(side * side);
    place_stream(stream, PlacementKind::HomeBase, layout);
    std::uint64_t instructions = 0;
    for (auto _ : state) {
        const SimReport report = run(stream, layout, kDefaults);
        benchmark::DoNotOptimize(report.makespan);
        instructions += report.instructions;
    }
    state.counters["instructions/s"] =
        benchmark::Counter(static_cast<double>(instructions), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RunQft)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_RunMobileQft(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const GridLayout layout =
        build_mesh(side, side, 8, 8, 2, 3, LqCapacity::Mobile, 600, kDefaults);
    InstructionStream stream = qft_pattern(side * side);
    place_stream(stream, PlacementKind::Mobile, layout);
    for (auto _ : state) {
        const SimReport report = run(stream, layout, kDefaults);
        benchmark::DoNotOptimize(report.makespan);
    }
}
BENCHMARK(BM_RunMobileQft)->Arg(6)->Unit(benchmark::kMillisecond);
