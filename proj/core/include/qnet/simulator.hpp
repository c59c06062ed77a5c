#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "qnet/channel.hpp"
#include "qnet/topology.hpp"
#include "qnet/workloads.hpp"

namespace qnet {

// Deterministic event-driven simulator for logical instruction streams
// over a mesh GridLayout.
//
// Timing model of one channel (source site S, destination site D,
// n = pairs_needed):
//   * The dimension-order path S..D has h hops; traveling pairs are
//     injected at the router path[floor(h/2)] by the G node of the
//     midpoint link. Each injected pair splits into two halves that are
//     chain-teleported outward along dimension-order paths to S and D,
//     together crossing h links.
//   * Every EPR pair production (traveling pairs and the wire pairs
//     consumed by each hop) occupies one of the g generator units of its
//     link for t_gen; requests are queued FIFO at channel-open time, so
//     wire streams behave as pre-distributed up to generator bandwidth.
//   * A hop consumes a wire pair of its link, a teleporter of the source
//     router's X or Y set for t_tprt, and a storage cell at the receiving
//     router dedicated to the incoming link (at most t cells; full
//     storage back-pressures the sender). The teleported half is usable
//     at the next router after t_tprt plus t_cb x hop_spacing of
//     classical transit. A dimension turn adds turn_cells x t_mv.
//   * At its terminal router a half moves local_cells x t_mv to the P
//     node. When both halves have arrived the pair enters the endpoint
//     queue purifiers: rounds_endpoint levels, each round combining two
//     pairs on one of the p level stations at each endpoint site for
//     t_prfy + t_cb x distance.
//   * Purification success is expected-value deterministic by default
//     (per-level credit accumulators), or seeded-stochastic.
//   * Data qubits teleport as purified pairs are delivered, pipelined;
//     the k-th physical teleport completes t_tprt + t_cb x distance
//     after its pair is delivered. The logical gate costs t_2q after the
//     last arrival.
//
// Home Base placement keeps one resident per site plus one visitor slot;
// the first operand of an instruction visits the second and teleports
// home after the gate. Mobile placement gives every site capacity 2 and
// qubits migrate to their partner's current site, returning home only
// after their final instruction.

enum class EventKind : std::uint8_t {
    ClassicalArrive = 0,
    GenerationComplete = 1,
    TeleportComplete = 2,
    MoveComplete = 3,
    PurifyRoundComplete = 4,
    MeasureComplete = 5,
    ChannelReady = 6,
    InstructionComplete = 7,
};

const char* to_string(EventKind kind);

struct Event {
    Microseconds time = 0.0;
    EventKind kind = EventKind::GenerationComplete;
    std::uint8_t detail = 0;
    std::uint32_t channel = 0;
    std::uint32_t subject = 0;
    std::uint64_t seq = 0;
};

/// Classical message traveling with a qubit: generator-assigned id, both
/// destinations, and the folded two-bit Pauli frame.
struct QubitIdPacket {
    std::uint64_t id = 0;
    Coordinate dest;
    Coordinate partner_dest;
    std::uint8_t correction = 0;  // bit0: X frame, bit1: Z frame

    void fold(std::uint8_t hop_correction) { correction ^= (hop_correction & 3u); }
};

struct TraceRow {
    Microseconds time = 0.0;
    EventKind kind = EventKind::GenerationComplete;
    std::string subject;
};

struct WaitHistogram {
    // Bucket upper bounds in microseconds: 1, 10, 100, 1e3, 1e4, 1e5, inf.
    std::array<std::uint64_t, 7> buckets{};
    std::uint64_t waits = 0;
    Microseconds total_wait = 0.0;

    void record(Microseconds wait);
};

struct SimReport {
    Microseconds makespan = 0.0;
    std::uint64_t instructions = 0;
    std::uint64_t channels_opened = 0;

    // EPR accounting (pair counts).
    std::uint64_t traveling_pairs = 0;   // generated for transport through the path
    std::uint64_t local_pairs = 0;       // generated for co-located channels
    std::uint64_t wire_pairs = 0;        // virtual-wire pairs consumed by teleports
    std::uint64_t nonlocal_pairs = 0;    // traveling pairs that crossed >= 1 hop
    std::uint64_t pairs_used = 0;        // consumed by data teleports
    std::uint64_t pairs_measured = 0;    // measured away by successful rounds
    std::uint64_t pairs_discarded = 0;   // lost to failed rounds
    std::uint64_t pairs_leftover = 0;    // recycled unused at channel close
    std::uint64_t purify_rounds = 0;
    std::uint64_t recycled_qubits = 0;   // ions returned to generators

    std::uint64_t total_pairs() const { return traveling_pairs + local_pairs + wire_pairs; }

    // Utilization fractions over the makespan.
    std::vector<double> teleporter_utilization;  // per router, X then Y set interleaved
    std::vector<double> generator_utilization;   // per link
    std::vector<double> purifier_utilization;    // per site
    double mean_teleporter_utilization = 0.0;
    double mean_generator_utilization = 0.0;
    double mean_purifier_utilization = 0.0;

    WaitHistogram teleport_wait;  // hop start minus earliest possible start
    WaitHistogram purify_wait;    // round start minus input-ready time
    WaitHistogram slot_wait;      // site-capacity wait before a transfer

    std::vector<TraceRow> trace;  // populated only when tracing is on

    std::string to_json() const;
};

struct SimOptions {
    int physical_per_logical = 49;
    bool stochastic = false;
    std::uint64_t seed = 1;
    bool collect_trace = false;
    PlannerOptions planner;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DeadlockError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

/// Dependency waves: instruction i joins the first group after the last
/// group containing an earlier instruction that shares a qubit with i.
std::vector<std::vector<LogicalInstruction>> schedule(const InstructionStream& stream,
                                                      const GridLayout& layout);

class Engine {
public:
    Engine(const GridLayout& layout, const ParameterSet& params, const SimOptions& options = {});
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Schedules EPR distribution of pairs_needed purified pairs between
    /// two sites, starting now. Returns a channel id to query after run().
    int open_channel(Coordinate src, Coordinate dst, int pairs_needed);

    /// Full logical transfer: channel setup plus the pipelined physical
    /// teleports of one logical qubit. Returns a transfer id.
    int teleport_logical(Coordinate src, Coordinate dst);

    /// Runs until no events remain.
    void run();

    Microseconds channel_ready_time(int channel_id) const;
    Microseconds transfer_complete_time(int transfer_id) const;
    Microseconds now() const;

    SimReport report() const;

private:
    friend SimReport run(const InstructionStream&, const GridLayout&, const ParameterSet&,
                         const SimOptions&);
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Executes a placed instruction stream to completion. Deterministic:
/// identical inputs produce an identical report.
SimReport run(const InstructionStream& stream, const GridLayout& layout,
              const ParameterSet& params, const SimOptions& options = {});

}  // namespace qnet
