#pragma once

#include <vector>

#include "qnet/simulator.hpp"

namespace qnet {

/// One resource-allocation point: teleporters per T' node, generators per
/// G node, purifier queues per endpoint.
struct SweepPoint {
    int t = 4;
    int g = 4;
    int p = 1;

    bool operator==(const SweepPoint&) const = default;
};

struct SweepRun {
    SweepPoint point;
    Microseconds makespan = 0.0;
    double normalized = 0.0;
    std::uint64_t total_pairs = 0;
    std::uint64_t nonlocal_pairs = 0;
    double mean_teleporter_utilization = 0.0;
    double mean_purifier_utilization = 0.0;
};

struct SweepConfig {
    GridLayout base;                         // t/g/p fields are overridden per point
    std::vector<SweepPoint> points;
    SweepPoint baseline{1024, 1024, 1024};   // close approximation of unlimited resources
    SimOptions sim;
    int threads = 2;
};

/// Runs every point (plus the baseline when absent from the list) and
/// fills `normalized` with makespan / baseline makespan. Points execute
/// concurrently; results come back in point order.
std::vector<SweepRun> run_sweep(const InstructionStream& stream, const SweepConfig& config,
                                const ParameterSet& params);

/// Divides each run's makespan by the baseline makespan.
/// Throws std::invalid_argument when the baseline is missing (<= 0).
void normalize_sweep(std::vector<SweepRun>& runs, Microseconds baseline_makespan);

}  // namespace qnet
