#include <benchmark/benchmark.h>

#include "qnet/channel.hpp"
#include "qnet/fidelity.hpp"
#include "qnet/purification.hpp"

using namespace qnet;

namespace {
const ParameterSet kDefaults = default_ion_trap();
}

static void BM_TeleportFidelityChain(benchmark::State& state) {
    const double f_link = link_fidelity(kDefaults, 600);
    const int hops = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            chained_teleport_fidelity(1.0, hops, f_link, kDefaults.errors));
    }
}
BENCHMARK(BM_TeleportFidelityChain)->Arg(8)->Arg(64)->Arg(512);

static void BM_DejmpsRound(benchmark::State& state) {
    const BellDiagonalState s = werner_state(0.92);
    for (auto _ : state) benchmark::DoNotOptimize(dejmps_round(s, kDefaults.errors));
}
BENCHMARK(BM_DejmpsRound);

static void BM_OraclePurify(benchmark::State& state) {
    const auto coeffs = werner_state(0.92).coefficients();
    for (auto _ : state)
        benchmark::DoNotOptimize(oracle_purify(coeffs, coeffs, Protocol::DEJMPS,
                                               kDefaults.errors));
}
BENCHMARK(BM_OraclePurify);

static void BM_MaxAchievableFidelity(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(max_achievable_fidelity(Protocol::DEJMPS, kDefaults.errors));
}
BENCHMARK(BM_MaxAchievableFidelity);

static void BM_PlanChannel(benchmark::State& state) {
    const DistanceCells d = state.range(0) * 600;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            plan_channel(d, PlacementScheme::VirtualWirePlusEndpoints, kDefaults, 600));
    }
}
BENCHMARK(BM_PlanChannel)->Arg(4)->Arg(64);

BENCHMARK_MAIN();
