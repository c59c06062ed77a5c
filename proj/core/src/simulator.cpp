#include "qnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include <json.hpp>

namespace qnet {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::ClassicalArrive: return "ClassicalArrive";
        case EventKind::GenerationComplete: return "GenerationComplete";
        case EventKind::TeleportComplete: return "TeleportComplete";
        case EventKind::MoveComplete: return "MoveComplete";
        case EventKind::PurifyRoundComplete: return "PurifyRoundComplete";
        case EventKind::MeasureComplete: return "MeasureComplete";
        case EventKind::ChannelReady: return "ChannelReady";
        case EventKind::InstructionComplete: return "InstructionComplete";
    }
    return "?";
}

void WaitHistogram::record(Microseconds wait) {
    if (wait <= 1e-9) return;
    ++waits;
    total_wait += wait;
    static const double edges[6] = {1.0, 10.0, 100.0, 1e3, 1e4, 1e5};
    size_t b = 0;
    while (b < 6 && wait > edges[b]) ++b;
    ++buckets[b];
}

std::vector<std::vector<LogicalInstruction>> schedule(const InstructionStream& stream,
                                                      const GridLayout& layout) {
    if (static_cast<int>(stream.placement.size()) < stream.qubit_count)
        throw std::invalid_argument("stream placement does not cover every qubit");
    for (const Coordinate& c : stream.placement)
        if (!layout.in_bounds(c)) throw std::invalid_argument("placement outside the grid");

    std::vector<std::vector<LogicalInstruction>> groups;
    std::vector<int> last_group(static_cast<size_t>(stream.qubit_count) + 1, -1);
    for (const LogicalInstruction& op : stream.ops) {
        if (op.qubit_a < 1 || op.qubit_a > stream.qubit_count || op.qubit_b < 1 ||
            op.qubit_b > stream.qubit_count || op.qubit_a == op.qubit_b)
            throw std::invalid_argument("instruction references an unknown qubit");
        const int g = std::max(last_group[op.qubit_a], last_group[op.qubit_b]) + 1;
        if (static_cast<int>(groups.size()) <= g) groups.resize(g + 1);
        groups[g].push_back(op);
        last_group[op.qubit_a] = g;
        last_group[op.qubit_b] = g;
    }
    return groups;
}

namespace {

// Compact queue node: the key packs (kind, channel, subject) so ties at
// equal timestamps order by kind precedence, then subject identities.
struct QEvent {
    double time = 0.0;
    std::uint64_t key = 0;

    static std::uint64_t pack(EventKind kind, std::uint32_t channel, std::uint32_t subject,
                              std::uint64_t seq) {
        return (static_cast<std::uint64_t>(kind) << 60) |
               ((static_cast<std::uint64_t>(channel) & 0x1FFFFF) << 39) |
               (static_cast<std::uint64_t>(subject) << 7) | (seq & 0x7F);
    }
    EventKind kind() const { return static_cast<EventKind>(key >> 60); }
    std::uint32_t channel() const { return static_cast<std::uint32_t>((key >> 39) & 0x1FFFFF); }
    std::uint32_t subject() const { return static_cast<std::uint32_t>((key >> 7) & 0xFFFFFFFF); }

    bool before(const QEvent& o) const { return time < o.time || (time == o.time && key < o.key); }
};

// 4-ary min-heap; shallower and more cache-friendly than a binary heap
// at the event volumes a full workload run produces.
class EventQueue {
public:
    bool empty() const { return heap_.empty(); }
    size_t size() const { return heap_.size(); }

    void push(const QEvent& ev) {
        heap_.push_back(ev);
        size_t i = heap_.size() - 1;
        while (i > 0) {
            const size_t parent = (i - 1) / 4;
            if (!heap_[i].before(heap_[parent])) break;
            std::swap(heap_[i], heap_[parent]);
            i = parent;
        }
    }

    QEvent pop() {
        const QEvent top = heap_.front();
        heap_.front() = heap_.back();
        heap_.pop_back();
        size_t i = 0;
        const size_t n = heap_.size();
        for (;;) {
            const size_t first = 4 * i + 1;
            if (first >= n) break;
            size_t best = first;
            const size_t last = std::min(first + 4, n);
            for (size_t c = first + 1; c < last; ++c)
                if (heap_[c].before(heap_[best])) best = c;
            if (!heap_[best].before(heap_[i])) break;
            std::swap(heap_[i], heap_[best]);
            i = best;
        }
        return top;
    }

private:
    std::vector<QEvent> heap_;
};

// Multi-server FIFO resource; grants follow call order. Only busy units
// live in the heap, so its size tracks in-flight jobs rather than the
// configured capacity.
struct ServerPool {
    int idle = 0;
    int units = 0;
    std::vector<double> busy;  // min-heap of pending completion times
    double busy_sum = 0.0;

    void init(int n) {
        units = n;
        idle = n;
        busy.clear();
    }

    // Earliest time a unit can start a new job (0 when one is idle).
    double min_free() const { return idle > 0 ? 0.0 : busy.front(); }

    // Starts a job of length `service` no earlier than `earliest`.
    // Completions at or before the simulation clock are interchangeable
    // idle units; `earliest` may be future-dated, so it cannot serve as
    // the compaction threshold itself.
    double grant(double now, double earliest, double service) {
        while (!busy.empty() && busy.front() <= now) {
            std::pop_heap(busy.begin(), busy.end(), std::greater<>());
            busy.pop_back();
            ++idle;
        }
        double start = earliest;
        if (idle > 0) {
            --idle;
        } else {
            std::pop_heap(busy.begin(), busy.end(), std::greater<>());
            start = std::max(earliest, busy.back());
            busy.pop_back();
        }
        busy.push_back(start + service);
        std::push_heap(busy.begin(), busy.end(), std::greater<>());
        busy_sum += service;
        return start;
    }
};

// Generator pools only ever see nondecreasing request times (requests
// are posted at channel-open instants), so with the constant t_gen
// service the earliest-free unit is always the one granted a full cycle
// ago: a ring buffer replaces the heap.
struct GenPool {
    std::vector<double> ring;
    size_t next = 0;
    double busy_sum = 0.0;

    void init(int units) {
        ring.assign(static_cast<size_t>(units), 0.0);
        next = 0;
    }

    double grant(double earliest, double service) {
        const double start = std::max(earliest, ring[next]);
        ring[next] = start + service;
        if (++next == ring.size()) next = 0;
        busy_sum += service;
        return start;
    }
};

struct HopTask {
    double earliest = 0.0;
    std::uint32_t channel = 0;
    std::uint32_t pair = 0;
    std::uint8_t half = 0;
    std::uint16_t hop = 0;  // 1-based index into the half's path
};

// Storage cells of one incoming (directed) link. A cell is held from hop
// grant until the occupant's departure is scheduled; a full pool
// back-pressures senders in FIFO order. Cells with a known future
// release can be granted ahead of time.
struct StoragePool {
    int cap = 0;
    int pending = 0;                // occupied, release time unknown
    std::vector<double> scheduled;  // occupied, min-heap of known releases
    std::deque<HopTask> waiters;

    std::optional<double> reserve(double now, double request) {
        // Cells whose release already happened are plain free cells.
        while (!scheduled.empty() && scheduled.front() <= now) {
            std::pop_heap(scheduled.begin(), scheduled.end(), std::greater<>());
            scheduled.pop_back();
        }
        if (pending + static_cast<int>(scheduled.size()) < cap) {
            ++pending;
            return request;
        }
        if (!scheduled.empty()) {
            std::pop_heap(scheduled.begin(), scheduled.end(), std::greater<>());
            const double t = scheduled.back();
            scheduled.pop_back();
            ++pending;
            return std::max(request, t);
        }
        return std::nullopt;
    }

    // Current occupant departs at T; hands the cell to the first waiter.
    std::optional<std::pair<HopTask, double>> release(double T) {
        if (!waiters.empty()) {
            HopTask task = waiters.front();
            waiters.pop_front();
            return std::make_pair(task, std::max(task.earliest, T));
        }
        --pending;
        scheduled.push_back(T);
        std::push_heap(scheduled.begin(), scheduled.end(), std::greater<>());
        return std::nullopt;
    }
};

struct PlanInfo {
    int rounds = 0;
    std::vector<double> p_success;
};

enum OpStage : std::uint8_t {
    kWaitDeps,
    kWaitQubits,
    kWaitSlot,
    kTransfer,
    kGate,
    kReturning,
    kDone,
};

struct OpState {
    int seq = 0;
    int qa = 0;
    int qb = 0;
    OpStage stage = kWaitDeps;
    int preds = 0;
    int succ_a = -1;
    int succ_b = -1;
    int dest_site = -1;
    int return_qubit = -1;
    double slot_request = 0.0;
    int visit_channel = -1;
    int return_channel = -1;
};

struct QubitState {
    int home = 0;
    int cur = 0;
    bool settled = true;
    int waiting_op = -1;
    int ops_left = 0;
};

struct SiteState {
    int occupancy = 0;
    int capacity = 1;
    std::deque<int> waiters;  // op ids, FIFO
};

struct Channel {
    int id = 0;
    int op_id = -1;
    bool is_return = false;
    bool data_phase = false;

    int src_site = 0;
    int dst_site = 0;
    int hops = 0;
    double dist_cells = 0.0;
    int pairs_needed = 0;
    int rounds = 0;
    std::vector<double> p_success;
    double round_latency = 0.0;

    std::vector<int> path_src;  // router ids; [0] is the injection router
    std::vector<int> path_dst;
    int turn_src = 0;  // 1-based hop index that changes dimension, 0 none
    int turn_dst = 0;

    int raw_pairs = 0;
    std::vector<double> gen_time;
    std::vector<double> token_src;   // [pair * src_hops + hop-1]
    std::vector<double> token_dst;
    std::vector<double> pair_first;  // first half's endpoint time, -1 unset

    std::vector<int> level_count;
    std::vector<double> level_pending;  // buffered input time, -1 empty
    std::vector<double> credit;

    int delivered = 0;
    int measured = 0;
    int discarded = 0;
    double last_delivery = 0.0;
    double ready_time = -1.0;
    double complete_time = -1.0;
    bool closed = false;
    double open_time = 0.0;

    void release_buffers() {
        gen_time = {};
        token_src = {};
        token_dst = {};
        pair_first = {};
    }
};

}  // namespace

struct Engine::Impl {
    GridLayout layout;
    ParameterSet params;
    SimOptions opts;

    int rows = 0, cols = 0, n_routers = 0, n_sites = 0, n_links = 0;
    double t_gen = 0, t_tprt = 0, t_2q = 0, t_local = 0, t_turn = 0, hop_step = 0;

    std::vector<ServerPool> xy_sets;     // router*2 + (0 = X moves, 1 = Y moves)
    std::vector<GenPool> link_gen;       // per undirected link
    std::vector<GenPool> site_gen;       // co-located channels only
    std::vector<ServerPool> purify_sta;  // site*depth + level, p units each
    std::vector<StoragePool> storage;    // directed link = link*2 + dir

    std::vector<std::unique_ptr<Channel>> channels;
    std::vector<int> transfer_channel;

    std::vector<OpState> ops;
    std::vector<QubitState> qubits;
    std::vector<SiteState> sites;
    bool stream_mode = false;
    PlacementKind placement_kind = PlacementKind::HomeBase;

    EventQueue queue;
    std::deque<std::pair<HopTask, double>> pending_hops;  // granted storage handoffs
    std::uint64_t seq = 0;
    double clock = 0.0;
    double makespan = 0.0;

    std::mt19937_64 rng;
    std::unordered_map<int, PlanInfo> plan_cache;
    std::unordered_map<long long, int> raw_cache;

    SimReport stats;

    // ---- layout indexing ----------------------------------------------------

    int router_id(Coordinate c) const { return c.x * cols + c.y; }
    Coordinate router_at(int id) const { return {id / cols, id % cols}; }

    int link_id(int u, int v) const {
        if (u > v) std::swap(u, v);
        const int ux = u / cols, uy = u % cols;
        if (v == u + 1 && v / cols == ux) return ux * (cols - 1) + uy;  // same-row link
        return rows * (cols - 1) + ux * cols + uy;                      // down link
    }
    int directed_storage(int u, int v) const { return link_id(u, v) * 2 + (u < v ? 0 : 1); }
    bool is_x_move(int u, int v) const { return std::abs(u - v) >= cols; }

    int turn_hop_of(const std::vector<int>& path) const {
        for (size_t i = 2; i < path.size(); ++i)
            if (is_x_move(path[i - 1], path[i]) != is_x_move(path[i - 2], path[i - 1]))
                return static_cast<int>(i);
        return 0;
    }

    // ---- construction -------------------------------------------------------

    Impl(const GridLayout& lay, const ParameterSet& par, const SimOptions& options)
        : layout(lay), params(par), opts(options), rng(options.seed) {
        validate(params);
        rows = layout.rows;
        cols = layout.cols;
        n_routers = rows * cols;
        n_sites = n_routers;
        n_links = layout.link_count();

        t_gen = params.times.t_gen;
        t_tprt = params.times.t_tprt;
        t_2q = params.times.t_2q;
        t_local = static_cast<double>(layout.local_cells) * params.times.t_mv;
        t_turn = static_cast<double>(layout.turn_cells) * params.times.t_mv;
        hop_step = t_tprt + params.times.t_cb * static_cast<double>(layout.hop_spacing);

        xy_sets.resize(static_cast<size_t>(n_routers) * 2);
        for (auto& pool : xy_sets) pool.init(layout.teleporters_per_router / 2);
        link_gen.resize(static_cast<size_t>(std::max(n_links, 1)));
        for (auto& pool : link_gen) pool.init(layout.generators_per_link);
        site_gen.resize(static_cast<size_t>(n_sites));
        for (auto& pool : site_gen) pool.init(layout.generators_per_link);
        purify_sta.resize(static_cast<size_t>(n_sites) * layout.purifier_depth);
        for (auto& pool : purify_sta) pool.init(layout.purifier_queues_per_endpoint);
        storage.resize(static_cast<size_t>(std::max(n_links, 1)) * 2);
        for (auto& pool : storage) pool.cap = layout.storage_per_link();
    }

    // ---- event helpers ------------------------------------------------------

    void push_event(double time, EventKind kind, std::uint32_t channel, std::uint32_t subject) {
        queue.push(QEvent{time, QEvent::pack(kind, channel, subject, seq++)});
    }

    void trace(double time, EventKind kind, std::string subject) {
        if (opts.collect_trace) stats.trace.push_back(TraceRow{time, kind, std::move(subject)});
    }

    // ---- planning -----------------------------------------------------------

    const PlanInfo& plan_for(int hops) {
        auto it = plan_cache.find(hops);
        if (it != plan_cache.end()) return it->second;
        const ChannelPlan plan =
            plan_channel(static_cast<DistanceCells>(hops) * layout.hop_spacing,
                         PlacementScheme::EndpointsOnly, params, layout.hop_spacing, opts.planner);
        if (!plan.feasible)
            throw SimulationError(std::string("channel infeasible at ") + std::to_string(hops) +
                                  " hops (stage " + to_string(plan.failing_stage) + ")");
        if (plan.rounds_endpoint > layout.purifier_depth)
            throw SimulationError("endpoint purification needs depth " +
                                  std::to_string(plan.rounds_endpoint) +
                                  " but queue purifiers have " +
                                  std::to_string(layout.purifier_depth) + " levels");
        PlanInfo info;
        info.rounds = plan.rounds_endpoint;
        info.p_success = plan.endpoint_success;
        return plan_cache.emplace(hops, std::move(info)).first->second;
    }

    // Raw inputs the credit-policy chain consumes to emit `outputs`.
    int raw_needed(int hops, int outputs, int rounds, const std::vector<double>& p) {
        const long long key = static_cast<long long>(hops) * (1ll << 32) + outputs;
        auto it = raw_cache.find(key);
        if (it != raw_cache.end()) return it->second;
        int raws = 0;
        if (rounds == 0) {
            raws = outputs;
        } else {
            std::vector<int> count(rounds + 1, 0);
            std::vector<double> credit(rounds, 0.5);
            while (count[rounds] < outputs) {
                ++raws;
                ++count[0];
                for (int level = 0; level < rounds && count[level] >= 2; ++level) {
                    count[level] -= 2;
                    credit[level] += p[level];
                    if (credit[level] >= 1.0 - 1e-12) {
                        credit[level] -= 1.0;
                        ++count[level + 1];
                    }
                }
            }
        }
        raw_cache.emplace(key, raws);
        return raws;
    }

    // ---- channel lifecycle ----------------------------------------------------

    void request_pair_production(Channel& ch, int k, double now) {
        if (ch.hops == 0) {
            ++stats.local_pairs;
            ch.gen_time[k] = site_gen[ch.src_site].grant(now, t_gen) + t_gen;
        } else {
            ++stats.traveling_pairs;
            ++stats.nonlocal_pairs;
            const int src_hops = static_cast<int>(ch.path_src.size()) - 1;
            const int dst_hops = static_cast<int>(ch.path_dst.size()) - 1;
            ch.gen_time[k] = link_gen[gen_link_of(ch)].grant(now, t_gen) + t_gen;
            for (int i = 1; i <= src_hops; ++i) {
                const int l = link_id(ch.path_src[i - 1], ch.path_src[i]);
                ch.token_src[static_cast<size_t>(k) * src_hops + i - 1] =
                    link_gen[l].grant(now, t_gen) + t_gen;
            }
            for (int i = 1; i <= dst_hops; ++i) {
                const int l = link_id(ch.path_dst[i - 1], ch.path_dst[i]);
                ch.token_dst[static_cast<size_t>(k) * dst_hops + i - 1] =
                    link_gen[l].grant(now, t_gen) + t_gen;
            }
        }
        push_event(ch.gen_time[k], EventKind::GenerationComplete, ch.id,
                   static_cast<std::uint32_t>(k));
    }

    int gen_link_of(const Channel& ch) const {
        // The injection router is path_src[0] == path_dst[0]; the
        // generator sits on the first link of the destination leg.
        return link_id(ch.path_dst[0], ch.path_dst[1]);
    }

    int open_channel_impl(int src_site, int dst_site, int pairs_needed, int op_id, bool is_return,
                          bool data_phase, double now) {
        auto ch = std::make_unique<Channel>();
        ch->id = static_cast<int>(channels.size());
        ch->op_id = op_id;
        ch->is_return = is_return;
        ch->data_phase = data_phase;
        ch->src_site = src_site;
        ch->dst_site = dst_site;
        ch->pairs_needed = pairs_needed;
        ch->open_time = now;
        ++stats.channels_opened;

        const Coordinate src = router_at(src_site), dst = router_at(dst_site);
        const auto path = dimension_order_path(layout, src, dst);
        ch->hops = static_cast<int>(path.size()) - 1;
        ch->dist_cells = static_cast<double>(ch->hops) * static_cast<double>(layout.hop_spacing);

        const PlanInfo& plan = plan_for(ch->hops);
        ch->rounds = plan.rounds;
        ch->p_success = plan.p_success;
        ch->round_latency =
            queue_purifier_round_latency(params.times, static_cast<DistanceCells>(ch->dist_cells));
        ch->level_count.assign(ch->rounds + 1, 0);
        ch->level_pending.assign(std::max(ch->rounds, 1), -1.0);
        ch->credit.assign(std::max(ch->rounds, 1), 0.5);

        if (ch->hops > 0) {
            const int mid = ch->hops / 2;
            const auto src_leg = dimension_order_path(layout, path[mid], src);
            const auto dst_leg = dimension_order_path(layout, path[mid], dst);
            for (const auto& c : src_leg) ch->path_src.push_back(router_id(c));
            for (const auto& c : dst_leg) ch->path_dst.push_back(router_id(c));
            ch->turn_src = turn_hop_of(ch->path_src);
            ch->turn_dst = turn_hop_of(ch->path_dst);
        }

        ch->raw_pairs = raw_needed(ch->hops, pairs_needed, ch->rounds, ch->p_success);
        const int K = ch->raw_pairs;
        ch->gen_time.resize(K);
        ch->pair_first.assign(K, -1.0);
        if (ch->hops > 0) {
            ch->token_src.resize(static_cast<size_t>(K) * (ch->path_src.size() - 1));
            ch->token_dst.resize(static_cast<size_t>(K) * (ch->path_dst.size() - 1));
        }

        Channel& ref = *ch;
        const int id = ref.id;
        channels.push_back(std::move(ch));
        for (int k = 0; k < K; ++k) request_pair_production(ref, k, now);
        return id;
    }

    // ---- hop mechanics --------------------------------------------------------

    const std::vector<int>& half_path(const Channel& ch, int half) const {
        return half == 0 ? ch.path_src : ch.path_dst;
    }

    double token_of(const Channel& ch, int half, int pair, int hop) const {
        const auto& tokens = half == 0 ? ch.token_src : ch.token_dst;
        const int hops = static_cast<int>(half_path(ch, half).size()) - 1;
        return tokens[static_cast<size_t>(pair) * hops + hop - 1];
    }

    void attempt_hop(const HopTask& task) {
        const Channel& ch = *channels[task.channel];
        const auto& path = half_path(ch, task.half);
        StoragePool& pool = storage[directed_storage(path[task.hop - 1], path[task.hop])];
        auto grant = pool.reserve(clock, task.earliest);
        if (!grant) {
            pool.waiters.push_back(task);
            return;
        }
        start_hop(task, *grant);
    }

    void start_hop(const HopTask& task, double slot_time) {
        const Channel& ch = *channels[task.channel];
        const auto& path = half_path(ch, task.half);
        const int u = path[task.hop - 1], v = path[task.hop];

        const double token = token_of(ch, task.half, task.pair, task.hop);
        ServerPool& set = xy_sets[u * 2 + (is_x_move(u, v) ? 0 : 1)];
        const double start = set.grant(clock, std::max({task.earliest, slot_time, token}), t_tprt);
        stats.teleport_wait.record(start - task.earliest);
        ++stats.wire_pairs;
        stats.recycled_qubits += 2;  // the wire pair is consumed by the hop

        if (task.hop >= 2) queue_release(path[task.hop - 2], u, start);
        push_event(start + hop_step, EventKind::TeleportComplete, task.channel,
                   (task.pair << 12) | (static_cast<std::uint32_t>(task.hop) << 1) | task.half);
    }

    void queue_release(int u, int v, double when) {
        auto handoff = storage[directed_storage(u, v)].release(when);
        if (handoff) pending_hops.push_back(*handoff);
    }

    // Handoffs can cascade (a resumed hop frees its previous cell); drain
    // iteratively to keep the stack flat.
    void drain_pending() {
        while (!pending_hops.empty()) {
            auto [task, slot_time] = pending_hops.front();
            pending_hops.pop_front();
            start_hop(task, slot_time);
        }
    }

    void on_generation(const Event& ev) {
        Channel& ch = *channels[ev.channel];
        if (ch.closed) return;
        const int pair = static_cast<int>(ev.subject);
        if (opts.collect_trace)
            trace(ev.time, EventKind::GenerationComplete,
                  "ch" + std::to_string(ch.id) + ".pair" + std::to_string(pair));
        if (ch.hops == 0) {
            half_at_endpoint(ch, pair, ev.time);
            half_at_endpoint(ch, pair, ev.time);
            return;
        }
        for (std::uint8_t half = 0; half < 2; ++half) {
            if (half_path(ch, half).size() == 1)
                half_at_endpoint(ch, pair, ev.time);
            else
                attempt_hop(HopTask{ev.time, static_cast<std::uint32_t>(ch.id),
                                    static_cast<std::uint32_t>(pair), half, 1});
        }
    }

    void on_teleport_complete(const Event& ev) {
        Channel& ch = *channels[ev.channel];
        const int pair = static_cast<int>(ev.subject >> 12);
        const int hop = static_cast<int>((ev.subject >> 1) & 0x7ff);
        const int half = static_cast<int>(ev.subject & 1);
        const auto& path = half_path(ch, half);

        if (ch.closed) {  // satisfied while this half was in flight
            queue_release(path[hop - 1], path[hop], ev.time);
            return;
        }
        if (opts.collect_trace)
            trace(ev.time, EventKind::TeleportComplete,
                  "ch" + std::to_string(ch.id) + ".pair" + std::to_string(pair) + ".hop" +
                      std::to_string(hop) + (half == 0 ? "s" : "d"));

        if (hop == static_cast<int>(path.size()) - 1) {
            queue_release(path[hop - 1], path[hop], ev.time);
            half_at_endpoint(ch, pair, ev.time);
            return;
        }
        const int turn = (half == 0) ? ch.turn_src : ch.turn_dst;
        attempt_hop(HopTask{ev.time + (turn == hop + 1 ? t_turn : 0.0),
                            static_cast<std::uint32_t>(ch.id), static_cast<std::uint32_t>(pair),
                            static_cast<std::uint8_t>(half), static_cast<std::uint16_t>(hop + 1)});
    }

    void half_at_endpoint(Channel& ch, int pair, double arrival) {
        const double done = arrival + t_local;
        if (ch.pair_first[pair] < 0.0) {
            ch.pair_first[pair] = done;
            return;
        }
        const double joined = std::max(ch.pair_first[pair], done);
        if (opts.collect_trace)
            trace(joined, EventKind::MoveComplete,
                  "ch" + std::to_string(ch.id) + ".pair" + std::to_string(pair));
        if (ch.rounds == 0)
            deliver(ch, joined);
        else
            feed_level(ch, 0, joined);
    }

    void feed_level(Channel& ch, int level, double when) {
        if (ch.level_pending[level] < 0.0) {
            ch.level_pending[level] = when;
            return;
        }
        const double ready = std::max(ch.level_pending[level], when);
        ch.level_pending[level] = -1.0;
        ServerPool& a = purify_sta[ch.src_site * layout.purifier_depth + level];
        ServerPool& b = purify_sta[ch.dst_site * layout.purifier_depth + level];
        const double start = std::max({ready, a.min_free(), b.min_free()});
        a.grant(clock, start, ch.round_latency);
        b.grant(clock, start, ch.round_latency);
        stats.purify_wait.record(start - ready);
        ++stats.purify_rounds;
        push_event(start + ch.round_latency, EventKind::PurifyRoundComplete, ch.id,
                   static_cast<std::uint32_t>(level));
    }

    void on_purify_round(const Event& ev) {
        Channel& ch = *channels[ev.channel];
        if (ch.closed) return;  // inputs already counted as leftovers
        const int level = static_cast<int>(ev.subject);
        if (opts.collect_trace)
            trace(ev.time, EventKind::PurifyRoundComplete,
                  "ch" + std::to_string(ch.id) + ".L" + std::to_string(level));

        bool success;
        if (opts.stochastic) {
            success = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < ch.p_success[level];
        } else {
            ch.credit[level] += ch.p_success[level];
            success = ch.credit[level] >= 1.0 - 1e-12;
            if (success) ch.credit[level] -= 1.0;
        }

        if (!success) {
            ch.discarded += 2;
            stats.pairs_discarded += 2;
            stats.recycled_qubits += 4;
            if (opts.stochastic) order_replacements(ch, level, ev.time);
            return;
        }
        ++ch.measured;
        ++stats.pairs_measured;
        stats.recycled_qubits += 2;
        if (level + 1 == ch.rounds)
            deliver(ch, ev.time);
        else
            feed_level(ch, level + 1, ev.time);
    }

    void order_replacements(Channel& ch, int level, double now) {
        // A failure at level L costs roughly a level-(L+1) subtree.
        const int extra = 1 << (level + 1);
        const int base = static_cast<int>(ch.gen_time.size());
        ch.raw_pairs = base + extra;
        ch.gen_time.resize(ch.raw_pairs);
        ch.pair_first.resize(ch.raw_pairs, -1.0);
        if (ch.hops > 0) {
            ch.token_src.resize(static_cast<size_t>(ch.raw_pairs) * (ch.path_src.size() - 1));
            ch.token_dst.resize(static_cast<size_t>(ch.raw_pairs) * (ch.path_dst.size() - 1));
        }
        for (int k = base; k < ch.raw_pairs; ++k) request_pair_production(ch, k, now);
    }

    void deliver(Channel& ch, double when) {
        ++ch.delivered;
        ch.last_delivery = std::max(ch.last_delivery, when);
        if (ch.delivered < ch.pairs_needed || ch.closed) return;

        ch.ready_time = ch.last_delivery;
        if (opts.collect_trace)
            trace(ch.ready_time, EventKind::ChannelReady, "ch" + std::to_string(ch.id));
        push_event(ch.ready_time, EventKind::ChannelReady, ch.id, 0);

        stats.pairs_used += ch.pairs_needed;
        stats.recycled_qubits += 2 * static_cast<std::uint64_t>(ch.pairs_needed);
        if (ch.data_phase) {
            const double arrive = ch.last_delivery + t_tprt + params.times.t_cb * ch.dist_cells;
            push_event(arrive, EventKind::MeasureComplete, ch.id, 0);
        }

        // Conservation: everything generated beyond the delivered pairs and
        // purification losses is recycled unused.
        const int leftover = ch.raw_pairs - ch.pairs_needed - ch.measured - ch.discarded;
        if (leftover > 0) {
            stats.pairs_leftover += static_cast<std::uint64_t>(leftover);
            stats.recycled_qubits += 2 * static_cast<std::uint64_t>(leftover);
        }
        ch.closed = true;
        ch.release_buffers();
    }

    // ---- stream-mode instruction machinery ------------------------------------

    void settle_qubit(int q, double now) {
        qubits[q].settled = true;
        const int op = qubits[q].waiting_op;
        if (op >= 0) {
            qubits[q].waiting_op = -1;
            try_issue(op, now);
        }
    }

    void reserve_site(int site, int op_id, double now) {
        SiteState& s = sites[site];
        if (s.occupancy < s.capacity) {
            ++s.occupancy;
            issue_transfer(op_id, now);
        } else {
            ops[op_id].stage = kWaitSlot;
            ops[op_id].slot_request = now;
            s.waiters.push_back(op_id);
        }
    }

    void release_site(int site, double now) {
        SiteState& s = sites[site];
        if (!s.waiters.empty()) {
            const int op = s.waiters.front();
            s.waiters.pop_front();
            stats.slot_wait.record(now - ops[op].slot_request);
            issue_transfer(op, now);  // the cell passes straight to the waiter
        } else {
            --s.occupancy;
        }
    }

    void try_issue(int op_id, double now) {
        OpState& op = ops[op_id];
        if (op.preds > 0 || (op.stage != kWaitDeps && op.stage != kWaitQubits)) return;
        op.stage = kWaitQubits;
        if (!qubits[op.qa].settled) {
            qubits[op.qa].waiting_op = op_id;
            return;
        }
        if (!qubits[op.qb].settled) {
            qubits[op.qb].waiting_op = op_id;
            return;
        }

        const bool mobile = placement_kind == PlacementKind::Mobile;
        op.dest_site = mobile ? qubits[op.qb].cur : qubits[op.qb].home;
        if (mobile && qubits[op.qa].cur == op.dest_site) {
            op.stage = kGate;
            op.dest_site = -1;  // nothing reserved, nothing to release
            push_event(now + t_2q, EventKind::InstructionComplete, 0,
                       static_cast<std::uint32_t>(op_id));
            return;
        }
        reserve_site(op.dest_site, op_id, now);
    }

    void issue_transfer(int op_id, double now) {
        OpState& op = ops[op_id];
        op.stage = kTransfer;
        qubits[op.qa].settled = false;
        op.visit_channel = open_channel_impl(qubits[op.qa].cur, op.dest_site,
                                             opts.physical_per_logical, op_id,
                                             /*is_return=*/false, /*data_phase=*/true, now);
    }

    void on_transfer_arrive(const Event& ev) {
        Channel& ch = *channels[ev.channel];
        ch.complete_time = ev.time;
        if (opts.collect_trace)
            trace(ev.time, EventKind::MeasureComplete, "ch" + std::to_string(ch.id));
        if (ch.op_id < 0) return;  // manual teleport_logical

        OpState& op = ops[ch.op_id];
        if (!ch.is_return) {
            const int old_site = qubits[op.qa].cur;
            qubits[op.qa].cur = op.dest_site;
            if (placement_kind == PlacementKind::Mobile && old_site != op.dest_site)
                release_site(old_site, ev.time);
            op.stage = kGate;
            push_event(ev.time + t_2q, EventKind::InstructionComplete, 0,
                       static_cast<std::uint32_t>(ch.op_id));
        } else {
            finish_return(op, ev.time);
        }
    }

    void finish_return(OpState& op, double now) {
        const int q = op.return_qubit >= 0 ? op.return_qubit : op.qa;
        const int old_site = qubits[q].cur;
        qubits[q].cur = qubits[q].home;
        op.stage = kDone;
        release_site(old_site, now);
        settle_qubit(q, now);
    }

    void on_instruction_complete(const Event& ev) {
        const int op_id = static_cast<int>(ev.subject);
        OpState& op = ops[op_id];
        if (opts.collect_trace)
            trace(ev.time, EventKind::InstructionComplete, "op" + std::to_string(op.seq));
        ++stats.instructions;
        --qubits[op.qa].ops_left;
        --qubits[op.qb].ops_left;

        for (int succ : {op.succ_a, op.succ_b}) {
            if (succ < 0) continue;
            if (--ops[succ].preds == 0) try_issue(succ, ev.time);
        }

        if (placement_kind == PlacementKind::HomeBase) {
            op.stage = kReturning;
            op.return_qubit = op.qa;
            op.return_channel =
                open_channel_impl(qubits[op.qa].cur, qubits[op.qa].home, opts.physical_per_logical,
                                  op_id, /*is_return=*/true, /*data_phase=*/true, ev.time);
            return;
        }

        // Mobile: migrate in place; return home only after the final op.
        op.stage = kDone;
        settle_qubit(op.qa, ev.time);
        for (int q : {op.qa, op.qb}) {
            if (qubits[q].ops_left == 0 && qubits[q].cur != qubits[q].home) {
                op.stage = kReturning;
                op.return_qubit = q;
                qubits[q].settled = false;
                ++sites[qubits[q].home].occupancy;  // the vacated home has room
                op.return_channel = open_channel_impl(qubits[q].cur, qubits[q].home,
                                                      opts.physical_per_logical, op_id,
                                                      /*is_return=*/true,
                                                      /*data_phase=*/true, ev.time);
                break;  // a second displaced qubit returns via its own final op
            }
        }
    }

    // ---- run loop --------------------------------------------------------------

    void dispatch(const Event& ev) {
        clock = ev.time;
        makespan = std::max(makespan, ev.time);
        switch (ev.kind) {
            case EventKind::GenerationComplete: on_generation(ev); break;
            case EventKind::TeleportComplete: on_teleport_complete(ev); break;
            case EventKind::PurifyRoundComplete: on_purify_round(ev); break;
            case EventKind::MeasureComplete: on_transfer_arrive(ev); break;
            case EventKind::InstructionComplete: on_instruction_complete(ev); break;
            default: break;
        }
        drain_pending();
    }

    void run_loop() {
        drain_pending();
        while (!queue.empty()) {
            const QEvent q = queue.pop();
            dispatch(Event{q.time, q.kind(), 0, q.channel(), q.subject(), 0});
        }
        if (stream_mode) check_deadlock();
    }

    void check_deadlock() const {
        std::string blocked;
        int incomplete = 0;
        for (const OpState& op : ops) {
            if (op.stage == kDone) continue;
            ++incomplete;
            if (incomplete <= 5)
                blocked += " op" + std::to_string(op.seq) + "(" + std::to_string(op.qa) + "," +
                           std::to_string(op.qb) + ")stage" + std::to_string(op.stage);
        }
        if (incomplete > 0)
            throw DeadlockError("no pending events but " + std::to_string(incomplete) +
                                " instructions incomplete; first blocked:" + blocked);
    }

    SimReport build_report() const {
        SimReport out = stats;
        out.makespan = makespan;
        const double span = makespan > 0 ? makespan : 1.0;

        double acc = 0.0;
        out.teleporter_utilization.reserve(xy_sets.size());
        for (const auto& pool : xy_sets) {
            const double u = pool.busy_sum / (span * static_cast<double>(pool.units));
            out.teleporter_utilization.push_back(u);
            acc += u;
        }
        out.mean_teleporter_utilization =
            xy_sets.empty() ? 0.0 : acc / static_cast<double>(xy_sets.size());

        acc = 0.0;
        out.generator_utilization.reserve(link_gen.size());
        for (const auto& pool : link_gen) {
            const double u = pool.busy_sum / (span * static_cast<double>(pool.ring.size()));
            out.generator_utilization.push_back(u);
            acc += u;
        }
        out.mean_generator_utilization =
            link_gen.empty() ? 0.0 : acc / static_cast<double>(link_gen.size());

        acc = 0.0;
        out.purifier_utilization.assign(static_cast<size_t>(n_sites), 0.0);
        for (int s = 0; s < n_sites; ++s) {
            double busy = 0.0;
            for (int l = 0; l < layout.purifier_depth; ++l)
                busy += purify_sta[s * layout.purifier_depth + l].busy_sum;
            out.purifier_utilization[s] =
                busy / (span * layout.purifier_depth *
                        static_cast<double>(layout.purifier_queues_per_endpoint));
            acc += out.purifier_utilization[s];
        }
        out.mean_purifier_utilization = n_sites == 0 ? 0.0 : acc / n_sites;
        return out;
    }
};

Engine::Engine(const GridLayout& layout, const ParameterSet& params, const SimOptions& options)
    : impl_(std::make_unique<Impl>(layout, params, options)) {}

Engine::~Engine() = default;

int Engine::open_channel(Coordinate src, Coordinate dst, int pairs_needed) {
    if (!impl_->layout.in_bounds(src) || !impl_->layout.in_bounds(dst))
        throw std::invalid_argument("channel endpoint outside the grid");
    if (pairs_needed < 1) throw std::invalid_argument("pairs_needed must be at least 1");
    const int id = impl_->open_channel_impl(impl_->router_id(src), impl_->router_id(dst),
                                            pairs_needed, -1, false,
                                            /*data_phase=*/false, impl_->clock);
    impl_->drain_pending();
    return id;
}

int Engine::teleport_logical(Coordinate src, Coordinate dst) {
    if (!impl_->layout.in_bounds(src) || !impl_->layout.in_bounds(dst))
        throw std::invalid_argument("transfer endpoint outside the grid");
    if (src == dst) {  // the state is already in place
        auto ch = std::make_unique<Channel>();
        ch->id = static_cast<int>(impl_->channels.size());
        ch->ready_time = impl_->clock;
        ch->complete_time = impl_->clock;
        ch->closed = true;
        impl_->transfer_channel.push_back(ch->id);
        impl_->channels.push_back(std::move(ch));
        return static_cast<int>(impl_->transfer_channel.size()) - 1;
    }
    const int ch = impl_->open_channel_impl(impl_->router_id(src), impl_->router_id(dst),
                                            impl_->opts.physical_per_logical, -1, false,
                                            /*data_phase=*/true, impl_->clock);
    impl_->drain_pending();
    impl_->transfer_channel.push_back(ch);
    return static_cast<int>(impl_->transfer_channel.size()) - 1;
}

void Engine::run() { impl_->run_loop(); }

Microseconds Engine::channel_ready_time(int channel_id) const {
    const auto& ch = *impl_->channels.at(static_cast<size_t>(channel_id));
    if (ch.ready_time < 0.0) throw SimulationError("channel never became ready");
    return ch.ready_time;
}

Microseconds Engine::transfer_complete_time(int transfer_id) const {
    const int ch_id = impl_->transfer_channel.at(static_cast<size_t>(transfer_id));
    const auto& ch = *impl_->channels.at(static_cast<size_t>(ch_id));
    if (ch.complete_time < 0.0) throw SimulationError("transfer never completed");
    return ch.complete_time;
}

Microseconds Engine::now() const { return impl_->clock; }

SimReport Engine::report() const { return impl_->build_report(); }

SimReport run(const InstructionStream& stream, const GridLayout& layout,
              const ParameterSet& params, const SimOptions& options) {
    Engine engine(layout, params, options);
    Engine::Impl& impl = *engine.impl_;
    impl.stream_mode = true;
    impl.placement_kind = stream.placement_kind;

    if (static_cast<int>(stream.placement.size()) < stream.qubit_count)
        throw std::invalid_argument("stream placement does not cover every qubit");

    impl.qubits.resize(static_cast<size_t>(stream.qubit_count) + 1);
    impl.sites.resize(static_cast<size_t>(impl.n_sites));
    const bool mobile = stream.placement_kind == PlacementKind::Mobile;
    for (auto& site : impl.sites) site.capacity = mobile ? 2 : 1;
    for (int q = 1; q <= stream.qubit_count; ++q) {
        const Coordinate home = stream.placement[q - 1];
        if (!layout.in_bounds(home)) throw std::invalid_argument("placement outside the grid");
        impl.qubits[q].home = impl.qubits[q].cur = impl.router_id(home);
        if (mobile) ++impl.sites[impl.qubits[q].cur].occupancy;
    }
    if (mobile)
        for (const auto& site : impl.sites)
            if (site.occupancy > site.capacity)
                throw std::invalid_argument("mobile placement overfills a site");

    impl.ops.resize(stream.ops.size());
    std::vector<int> last_op(static_cast<size_t>(stream.qubit_count) + 1, -1);
    for (size_t i = 0; i < stream.ops.size(); ++i) {
        const LogicalInstruction& in = stream.ops[i];
        if (in.qubit_a < 1 || in.qubit_a > stream.qubit_count || in.qubit_b < 1 ||
            in.qubit_b > stream.qubit_count || in.qubit_a == in.qubit_b)
            throw std::invalid_argument("instruction references an unknown qubit");
        OpState& op = impl.ops[i];
        op.seq = in.seq;
        op.qa = in.qubit_a;
        op.qb = in.qubit_b;
        ++impl.qubits[op.qa].ops_left;
        ++impl.qubits[op.qb].ops_left;
        for (int q : {op.qa, op.qb}) {
            if (last_op[q] >= 0) {
                OpState& prev = impl.ops[last_op[q]];
                if (prev.succ_a != static_cast<int>(i) && prev.succ_b != static_cast<int>(i)) {
                    (q == prev.qa ? prev.succ_a : prev.succ_b) = static_cast<int>(i);
                    ++op.preds;
                }
            }
            last_op[q] = static_cast<int>(i);
        }
    }
    for (size_t i = 0; i < impl.ops.size(); ++i)
        if (impl.ops[i].preds == 0) impl.try_issue(static_cast<int>(i), 0.0);
    impl.drain_pending();

    impl.run_loop();
    return impl.build_report();
}

std::string SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["makespan_us"] = makespan;
    j["instructions"] = instructions;
    j["channels_opened"] = channels_opened;
    j["epr"] = {
        {"traveling_pairs", traveling_pairs}, {"local_pairs", local_pairs},
        {"wire_pairs", wire_pairs},           {"nonlocal_pairs", nonlocal_pairs},
        {"total_pairs", total_pairs()},       {"pairs_used", pairs_used},
        {"pairs_measured", pairs_measured},   {"pairs_discarded", pairs_discarded},
        {"pairs_leftover", pairs_leftover},   {"purify_rounds", purify_rounds},
        {"recycled_qubits", recycled_qubits},
    };
    j["utilization"] = {
        {"teleporter_mean", mean_teleporter_utilization},
        {"generator_mean", mean_generator_utilization},
        {"purifier_mean", mean_purifier_utilization},
        {"teleporter_sets", teleporter_utilization},
        {"generators", generator_utilization},
        {"purifiers", purifier_utilization},
    };
    auto hist = [](const WaitHistogram& h) {
        return nlohmann::ordered_json{
            {"waits", h.waits}, {"total_wait_us", h.total_wait}, {"buckets", h.buckets}};
    };
    j["waits"] = {{"teleport", hist(teleport_wait)},
                  {"purify", hist(purify_wait)},
                  {"slot", hist(slot_wait)}};
    if (!trace.empty()) {
        auto rows = nlohmann::ordered_json::array();
        for (const TraceRow& row : trace)
            rows.push_back(
                {{"time", row.time}, {"kind", to_string(row.kind)}, {"subject", row.subject}});
        j["trace"] = rows;
    }
    return j.dump(2);
}

}  // namespace qnet
