#include "qnet/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace qnet {

namespace {

GridLayout with_point(GridLayout layout, const SweepPoint& point) {
    layout.teleporters_per_router = point.t;
    layout.generators_per_link = point.g;
    layout.purifier_queues_per_endpoint = point.p;
    return layout;
}

SweepRun run_point(const InstructionStream& stream, const SweepConfig& cfg,
                   const ParameterSet& params, const SweepPoint& point) {
    const SimReport report = run(stream, with_point(cfg.base, point), params, cfg.sim);
    SweepRun out;
    out.point = point;
    out.makespan = report.makespan;
    out.total_pairs = report.total_pairs();
    out.nonlocal_pairs = report.nonlocal_pairs;
    out.mean_teleporter_utilization = report.mean_teleporter_utilization;
    out.mean_purifier_utilization = report.mean_purifier_utilization;
    return out;
}

}  // namespace

std::vector<SweepRun> run_sweep(const InstructionStream& stream, const SweepConfig& config,
                                const ParameterSet& params) {
    std::vector<SweepPoint> points = config.points;
    const bool baseline_listed =
        std::find(points.begin(), points.end(), config.baseline) != points.end();
    if (!baseline_listed) points.push_back(config.baseline);

    std::vector<SweepRun> runs(points.size());
    std::atomic<size_t> next{0};
    const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(points.size())));
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
            runs[i] = run_point(stream, config, params, points[i]);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    Microseconds baseline_makespan = 0.0;
    for (const SweepRun& r : runs)
        if (r.point == config.baseline) baseline_makespan = r.makespan;
    normalize_sweep(runs, baseline_makespan);

    if (!baseline_listed) runs.pop_back();
    return runs;
}

void normalize_sweep(std::vector<SweepRun>& runs, Microseconds baseline_makespan) {
    if (!(baseline_makespan > 0.0))
        throw std::invalid_argument("sweep normalization needs a baseline makespan");
    for (SweepRun& r : runs) r.normalized = r.makespan / baseline_makespan;
}

}  // namespace qnet
