#include "qnet/channel.hpp"

#include <algorithm>
#include <cmath>

#include "qnet/fidelity.hpp"

namespace qnet {

const char* to_string(PlacementScheme scheme) {
    switch (scheme) {
        case PlacementScheme::EndpointsOnly: return "endpoints-only";
        case PlacementScheme::VirtualWirePlusEndpoints: return "virtual-wire";
        case PlacementScheme::BetweenTeleports: return "between-teleports";
        case PlacementScheme::BetweenTeleportsPlusVirtualWire: return "between-teleports-virtual-wire";
    }
    return "?";
}

const char* to_string(PlanStage stage) {
    switch (stage) {
        case PlanStage::None: return "none";
        case PlanStage::Wire: return "wire";
        case PlanStage::Chain: return "chain";
        case PlanStage::Endpoint: return "endpoint";
    }
    return "?";
}

namespace {

bool purifies_wire(PlacementScheme s) {
    return s == PlacementScheme::VirtualWirePlusEndpoints ||
           s == PlacementScheme::BetweenTeleportsPlusVirtualWire;
}

bool purifies_between(PlacementScheme s) {
    return s == PlacementScheme::BetweenTeleports ||
           s == PlacementScheme::BetweenTeleportsPlusVirtualWire;
}

struct PurifyRun {
    int rounds = 0;
    Fidelity fidelity = 0.0;
    double pair_cost = 1.0;  // product of 2/p_success
    std::vector<double> success;
    bool reached = false;
};

// Iterates DEJMPS from a Werner start until f_target (or `max_rounds`,
// or the recurrence stalls).
PurifyRun purify_until(Fidelity f_start, Fidelity f_target, const ErrorRates& p, int max_rounds) {
    PurifyRun run;
    run.fidelity = f_start;
    if (f_start >= f_target) {
        run.reached = true;
        return run;
    }
    if (!(f_start > 0.25)) return run;

    BellDiagonalState state = werner_state(f_start);
    for (int round = 1; round <= max_rounds; ++round) {
        PurifyOutcome out;
        try {
            out = dejmps_round(state, p);
        } catch (const NonPurifiableError&) {
            return run;
        }
        if (out.fidelity() <= run.fidelity + 1e-15) return run;  // stalled
        run.rounds = round;
        run.fidelity = out.fidelity();
        run.pair_cost *= 2.0 / out.p_success;
        run.success.push_back(out.p_success);
        state = out.state;
        if (run.fidelity >= f_target) {
            run.reached = true;
            return run;
        }
    }
    return run;
}

// Exactly `rounds` DEJMPS rounds from a Werner start.
PurifyRun purify_rounds(Fidelity f_start, int rounds, const ErrorRates& p) {
    PurifyRun run;
    run.fidelity = f_start;
    run.reached = true;
    BellDiagonalState state = werner_state(f_start);
    for (int round = 1; round <= rounds; ++round) {
        PurifyOutcome out;
        try {
            out = dejmps_round(state, p);
        } catch (const NonPurifiableError&) {
            run.reached = false;
            return run;
        }
        run.rounds = round;
        run.fidelity = out.fidelity();
        run.pair_cost *= 2.0 / out.p_success;
        run.success.push_back(out.p_success);
        state = out.state;
    }
    return run;
}

struct ChainResult {
    Fidelity fidelity = 0.0;
    int rounds_between = 0;      // max over maintenance stages
    double stage_multiplier = 1.0;  // product of per-stage input multipliers
    std::vector<double> stage_cost;  // per-stage raw multiplier, hop order
};

// Chains `hops` teleports on a stream of link fidelity f_link. With
// between-teleports purification each of the hops-1 interior stages
// restores the traveling pair to at least f_link (best effort within
// the round cap).
ChainResult chain_fidelity(Fidelity f_link, int hops, bool maintain, const ErrorRates& p,
                           int between_cap) {
    ChainResult result;
    Fidelity f = f_link;
    for (int hop = 1; hop <= hops; ++hop) {
        f = teleport_fidelity(f, f_link, p);
        if (maintain && hop < hops) {
            PurifyRun stage = purify_until(f, f_link, p, between_cap);
            f = stage.fidelity;
            result.rounds_between = std::max(result.rounds_between, stage.rounds);
            result.stage_multiplier *= stage.pair_cost;
            result.stage_cost.push_back(stage.pair_cost);
        }
    }
    result.fidelity = f;
    return result;
}

}  // namespace

ChannelPlan plan_channel(DistanceCells distance, PlacementScheme scheme,
                         const ParameterSet& params, DistanceCells hop_spacing,
                         const PlannerOptions& opts) {
    if (hop_spacing < 1) throw std::invalid_argument("hop_spacing must be at least one cell");
    if (distance < 0) throw std::invalid_argument("distance must be non-negative");

    ChannelPlan plan;
    plan.distance = distance;
    plan.hop_spacing = hop_spacing;
    plan.scheme = scheme;
    plan.hops = static_cast<int>((distance + hop_spacing - 1) / hop_spacing);

    const ErrorRates& errs = params.errors;
    const Fidelity f_min = params.threshold.f_min;

    if (plan.hops == 0) {
        // Co-located endpoints: local generation feeds the purifier directly.
        const Fidelity f_local = generation_fidelity(errs, params.f_zero);
        plan.chain_fidelity = f_local;
        PurifyRun endpoint = purify_until(f_local, f_min, errs, 10000);
        if (!endpoint.reached) {
            plan.feasible = false;
            plan.failing_stage = PlanStage::Endpoint;
            return plan;
        }
        plan.rounds_endpoint = endpoint.rounds;
        plan.endpoint_pair_cost = endpoint.pair_cost;
        plan.endpoint_success = endpoint.success;
        plan.delivered_fidelity = endpoint.fidelity;
        plan.total_pairs = endpoint.pair_cost;
        plan.nonlocal_pairs = 0.0;
        plan.setup_latency = static_cast<double>(endpoint.rounds) *
                             queue_purifier_round_latency(params.times, distance);
        return plan;
    }

    const Fidelity f_raw = link_fidelity(params, hop_spacing);
    const bool maintain = purifies_between(scheme);

    // Wire depth: minimal depth whose resulting chain still reaches the
    // threshold within the endpoint cap. If no depth manages that, fall
    // back to the depth with the best delivered chain fidelity.
    int rounds_wire = 0;
    PurifyRun wire;  // zero-round identity by default
    wire.fidelity = f_raw;
    ChainResult chain;
    bool endpoint_cap_met = false;

    if (purifies_wire(scheme)) {
        int best_w = 0;
        Fidelity best_f = -1.0;
        PurifyRun best_wire;
        ChainResult best_chain;
        for (int w = 0; w <= opts.wire_depth_cap; ++w) {
            PurifyRun candidate = purify_rounds(f_raw, w, errs);
            if (!candidate.reached) break;
            ChainResult chained =
                chain_fidelity(candidate.fidelity, plan.hops, maintain, errs, opts.between_rounds_cap);
            PurifyRun endpoint =
                purify_until(chained.fidelity, f_min, errs, opts.endpoint_depth_cap);
            if (chained.fidelity > best_f) {
                best_f = chained.fidelity;
                best_w = w;
                best_wire = candidate;
                best_chain = chained;
            }
            if (endpoint.reached) {
                rounds_wire = w;
                wire = candidate;
                chain = chained;
                endpoint_cap_met = true;
                break;
            }
        }
        if (!endpoint_cap_met) {
            rounds_wire = best_w;
            wire = best_wire;
            chain = best_chain;
        }
    } else {
        chain = chain_fidelity(f_raw, plan.hops, maintain, errs, opts.between_rounds_cap);
    }

    plan.rounds_wire = rounds_wire;
    plan.rounds_between = chain.rounds_between;
    plan.chain_fidelity = chain.fidelity;

    if (!(chain.fidelity > 0.25)) {
        plan.feasible = false;
        plan.failing_stage = PlanStage::Chain;
        return plan;
    }

    PurifyRun endpoint = purify_until(chain.fidelity, f_min, errs, 10000);
    if (!endpoint.reached) {
        plan.feasible = false;
        plan.failing_stage =
            purifies_wire(scheme) && !endpoint_cap_met ? PlanStage::Wire : PlanStage::Endpoint;
        return plan;
    }

    plan.rounds_endpoint = endpoint.rounds;
    plan.endpoint_pair_cost = endpoint.pair_cost;
    plan.endpoint_success = endpoint.success;
    plan.delivered_fidelity = endpoint.fidelity;

    // Pair accounting, per delivered endpoint pair. Arrivals needed at
    // the endpoints: endpoint_pair_cost. Each arrival required a column
    // of between-stage sacrifices behind it, so the expected number of
    // pairs teleporting hop k is endpoint_pair_cost times the product of
    // the stage multipliers from stage k on.
    const double arrivals = endpoint.pair_cost;
    double departures = arrivals;
    for (double m : chain.stage_cost) departures *= m;

    double teleport_ops = 0.0;
    {
        double alive = departures;
        for (int hop = 1; hop <= plan.hops; ++hop) {
            teleport_ops += alive;
            if (hop <= static_cast<int>(chain.stage_cost.size()))
                alive /= chain.stage_cost[hop - 1];
        }
    }

    const double wire_cost = wire.pair_cost;  // raw generations per delivered wire pair
    plan.nonlocal_pairs = departures;
    plan.total_pairs = departures * wire_cost + teleport_ops * wire_cost;

    plan.setup_latency =
        static_cast<double>(plan.hops) * teleport_latency(hop_spacing, params.times) +
        static_cast<double>(endpoint.rounds) * queue_purifier_round_latency(params.times, distance);
    return plan;
}

double pairs_per_logical_transfer(const ChannelPlan& plan, const LogicalTransferSpec& spec) {
    if (spec.physical_per_logical < 1)
        throw std::invalid_argument("physical_per_logical must be at least 1");
    if (!plan.feasible)
        throw InfeasiblePlanError(std::string("plan infeasible at stage ") +
                                  to_string(plan.failing_stage));
    return plan.endpoint_pair_cost * static_cast<double>(spec.physical_per_logical);
}

std::vector<ChannelPlan> distance_sweep(PlacementScheme scheme, const ParameterSet& params,
                                        const std::vector<DistanceCells>& distances,
                                        DistanceCells hop_spacing, const PlannerOptions& opts) {
    std::vector<ChannelPlan> rows;
    rows.reserve(distances.size());
    for (DistanceCells d : distances) rows.push_back(plan_channel(d, scheme, params, hop_spacing, opts));
    return rows;
}

std::vector<SensitivityRow> error_rate_sensitivity(const ParameterSet& params,
                                                   const std::vector<double>& rate_grid,
                                                   PlacementScheme scheme, int reference_hops,
                                                   DistanceCells hop_spacing,
                                                   const PlannerOptions& opts) {
    std::vector<SensitivityRow> rows;
    rows.reserve(rate_grid.size());
    for (double rate : rate_grid) {
        ParameterSet varied = params;
        varied.errors.p_1q = rate;
        varied.errors.p_2q = rate;
        varied.errors.p_mv = rate;
        varied.errors.p_ms = rate;

        SensitivityRow row;
        row.rate = rate;
        row.max_fidelity = max_achievable_fidelity(Protocol::DEJMPS, varied.errors);
        if (row.max_fidelity >= params.threshold.f_min) {
            const ChannelPlan plan =
                plan_channel(static_cast<DistanceCells>(reference_hops) * hop_spacing, scheme,
                             varied, hop_spacing, opts);
            row.feasible = plan.feasible;
            if (plan.feasible) row.nonlocal_pairs = plan.nonlocal_pairs;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qnet
