#include <doctest.h>

#include "qnet/sweep.hpp"
#include "qnet/workloads.hpp"

using namespace qnet;
using doctest::Approx;

namespace {
const ParameterSet kDefaults = default_ion_trap();
}

TEST_CASE("sweeps normalize against the unlimited-resources baseline") {
    SweepConfig cfg;
    cfg.base = build_mesh(2, 2, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    cfg.points = {{2, 2, 1}, {8, 8, 2}};
    cfg.baseline = {1024, 1024, 1024};
    cfg.threads = 2;

    InstructionStream s = qft_pattern(4);
    place_stream(s, PlacementKind::HomeBase, cfg.base);

    const auto runs = run_sweep(s, cfg, kDefaults);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].point == SweepPoint{2, 2, 1});
    CHECK(runs[0].normalized >= runs[1].normalized - 1e-12);
    CHECK(runs[1].normalized >= 1.0 - 1e-12);

    // Repeatable to the bit.
    const auto again = run_sweep(s, cfg, kDefaults);
    for (size_t i = 0; i < runs.size(); ++i) {
        CHECK(runs[i].makespan == again[i].makespan);
        CHECK(runs[i].normalized == again[i].normalized);
    }
}

TEST_CASE("normalization divides by the baseline makespan") {
    std::vector<SweepRun> runs(2);
    runs[0].makespan = 500.0;
    runs[1].makespan = 1000.0;
    normalize_sweep(runs, 500.0);
    CHECK(runs[0].normalized == Approx(1.0));
    CHECK(runs[1].normalized == Approx(2.0));
    CHECK_THROWS_AS(normalize_sweep(runs, 0.0), std::invalid_argument);
}

TEST_CASE("the baseline run can appear in the point list itself") {
    SweepConfig cfg;
    cfg.base = build_mesh(2, 2, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    cfg.points = {{4, 4, 1}, {1024, 1024, 1024}};
    cfg.baseline = {1024, 1024, 1024};

    InstructionStream s = qft_pattern(4);
    place_stream(s, PlacementKind::HomeBase, cfg.base);

    const auto runs = run_sweep(s, cfg, kDefaults);
    REQUIRE(runs.size() == 2);
    CHECK(runs[1].normalized == Approx(1.0));
}
