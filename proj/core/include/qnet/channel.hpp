#pragma once

#include <string>
#include <vector>

#include "qnet/params.hpp"
#include "qnet/purification.hpp"

namespace qnet {

// Analytical channel planner. A channel distributes endpoint-quality EPR
// pairs across `distance` cells of a teleporter mesh whose hops span
// hop_spacing cells each. Pairs are generated mid-path, chain-teleported
// outward over virtual-wire links, and DEJMPS-purified at one or more of
// three places: the virtual wires, between teleport hops, and the
// endpoints.

enum class PlacementScheme {
    EndpointsOnly,
    VirtualWirePlusEndpoints,
    BetweenTeleports,
    BetweenTeleportsPlusVirtualWire,
};

const char* to_string(PlacementScheme scheme);

enum class PlanStage { None, Wire, Chain, Endpoint };

const char* to_string(PlanStage stage);

struct PlannerOptions {
    /// Endpoint tree depth the wire-purification rule aims for.
    int endpoint_depth_cap = 5;
    /// Most rounds of purification a virtual wire may use.
    int wire_depth_cap = 5;
    /// Most rounds per between-teleports maintenance stage.
    int between_rounds_cap = 5;
};

struct ChannelPlan {
    DistanceCells distance = 0;
    DistanceCells hop_spacing = 600;
    int hops = 0;
    PlacementScheme scheme = PlacementScheme::EndpointsOnly;

    int rounds_wire = 0;      // purification depth of each virtual wire
    int rounds_between = 0;   // rounds per between-teleports stage (max over stages)
    int rounds_endpoint = 0;  // endpoint tree depth

    /// Expected raw pairs generated anywhere per delivered endpoint pair.
    double total_pairs = 0.0;
    /// Expected pairs whose halves traverse at least one teleport hop.
    double nonlocal_pairs = 0.0;
    /// Expected raw arrivals consumed by the endpoint purifier per
    /// delivered pair (product of 2/p_success over endpoint rounds).
    double endpoint_pair_cost = 1.0;
    /// Per-round endpoint success probabilities, level 0 first.
    std::vector<double> endpoint_success;

    Microseconds setup_latency = 0.0;
    Fidelity delivered_fidelity = 1.0;
    Fidelity chain_fidelity = 1.0;  // before endpoint purification

    bool feasible = true;
    PlanStage failing_stage = PlanStage::None;
};

struct LogicalTransferSpec {
    int physical_per_logical = 49;
    ThresholdPolicy threshold;
};

class InfeasiblePlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plans one channel. Infeasible distances come back marked, with the
/// failing stage identified, rather than throwing.
ChannelPlan plan_channel(DistanceCells distance, PlacementScheme scheme,
                         const ParameterSet& params, DistanceCells hop_spacing = 600,
                         const PlannerOptions& opts = {});

/// Expected raw EPR pairs teleported to the endpoints to move one
/// logical qubit: endpoint raw-pair need x physical qubits per logical.
/// Throws InfeasiblePlanError for infeasible plans.
double pairs_per_logical_transfer(const ChannelPlan& plan, const LogicalTransferSpec& spec);

/// One plan row per distance; infeasible rows are marked, not dropped.
std::vector<ChannelPlan> distance_sweep(PlacementScheme scheme, const ParameterSet& params,
                                        const std::vector<DistanceCells>& distances,
                                        DistanceCells hop_spacing = 600,
                                        const PlannerOptions& opts = {});

struct SensitivityRow {
    double rate = 0.0;
    Fidelity max_fidelity = 1.0;      // DEJMPS fixpoint at this rate
    double nonlocal_pairs = 0.0;      // at the reference distance
    bool feasible = false;            // false marks the breakdown regime
};

/// Sets p_1q = p_2q = p_mv = p_ms = r for each grid rate and reports the
/// teleported-pair need at reference_hops hops, or a breakdown marker.
std::vector<SensitivityRow> error_rate_sensitivity(const ParameterSet& params,
                                                   const std::vector<double>& rate_grid,
                                                   PlacementScheme scheme,
                                                   int reference_hops = 64,
                                                   DistanceCells hop_spacing = 600,
                                                   const PlannerOptions& opts = {});

}  // namespace qnet
