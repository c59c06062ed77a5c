#include <doctest.h>

#include <map>
#include <set>

#include "qnet/simulator.hpp"
#include "qnet/workloads.hpp"

using namespace qnet;

namespace {
const ParameterSet kDefaults = default_ion_trap();
}

TEST_CASE("all-to-all pattern emits the documented prefix") {
    const InstructionStream s = qft_pattern(6);
    REQUIRE(s.ops.size() == 15);
    const std::pair<int, int> expected[] = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {1, 5},
                                            {2, 4}, {1, 6}, {2, 5}, {3, 4}};
    for (size_t i = 0; i < std::size(expected); ++i) {
        CHECK(s.ops[i].qubit_a == expected[i].first);
        CHECK(s.ops[i].qubit_b == expected[i].second);
    }

    CHECK(qft_pattern(2).ops.size() == 1);
    CHECK(qft_pattern(256).ops.size() == 32640);
    CHECK_THROWS_AS(qft_pattern(1), std::invalid_argument);
}

TEST_CASE("all-to-all pattern covers each pair once with ascending partners") {
    const int n = 12;
    const InstructionStream s = qft_pattern(n);
    std::set<std::pair<int, int>> pairs;
    std::map<int, int> last_partner;
    for (const auto& op : s.ops) {
        CHECK(op.qubit_a < op.qubit_b);
        CHECK(pairs.insert({op.qubit_a, op.qubit_b}).second);
        auto it = last_partner.find(op.qubit_a);
        if (it != last_partner.end()) CHECK(op.qubit_b > it->second);
        last_partner[op.qubit_a] = op.qubit_b;
    }
    CHECK(pairs.size() == static_cast<size_t>(n * (n - 1) / 2));
}

TEST_CASE("bipartite pattern is the row-major cross product") {
    const InstructionStream tiny = modmult_pattern(1, 1);
    REQUIRE(tiny.ops.size() == 1);
    CHECK(tiny.ops[0].qubit_a == 1);
    CHECK(tiny.ops[0].qubit_b == 2);

    const InstructionStream s = modmult_pattern(2, 3);
    REQUIRE(s.ops.size() == 6);
    const std::pair<int, int> expected[] = {{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}};
    for (size_t i = 0; i < 6; ++i) {
        CHECK(s.ops[i].qubit_a == expected[i].first);
        CHECK(s.ops[i].qubit_b == expected[i].second);
    }

    CHECK(modmult_pattern(128, 128).ops.size() == 16384);
    CHECK_THROWS_AS(modmult_pattern(0, 3), std::invalid_argument);
}

TEST_CASE("modular exponentiation alternates squaring and multiply phases") {
    const InstructionStream s = modexp_pattern(4, 1);
    REQUIRE(s.ops.size() == 5);
    const std::pair<int, int> expected[] = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}};
    for (size_t i = 0; i < 5; ++i) {
        CHECK(s.ops[i].qubit_a == expected[i].first);
        CHECK(s.ops[i].qubit_b == expected[i].second);
    }

    const InstructionStream degenerate = modexp_pattern(2, 1);
    REQUIRE(degenerate.ops.size() == 1);
    CHECK(degenerate.ops[0].qubit_a == 1);
    CHECK(degenerate.ops[0].qubit_b == 2);

    const InstructionStream twice = modexp_pattern(4, 2);
    REQUIRE(twice.ops.size() == 10);
    for (int i = 0; i < 5; ++i) {
        CHECK(twice.ops[i + 5].qubit_a == twice.ops[i].qubit_a);
        CHECK(twice.ops[i + 5].qubit_b == twice.ops[i].qubit_b);
    }

    CHECK_THROWS_AS(modexp_pattern(5, 1), std::invalid_argument);
}

TEST_CASE("home base placement is a row-major bijection") {
    const GridLayout m = build_mesh(16, 16, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    const auto placement = home_base_placement(256, m);
    REQUIRE(placement.size() == 256);
    std::set<std::pair<int, int>> sites;
    for (const Coordinate& c : placement) CHECK(sites.insert({c.x, c.y}).second);
    CHECK(placement[0] == Coordinate{0, 0});
    CHECK(placement[16] == Coordinate{1, 0});

    CHECK(home_base_placement(1, m).size() == 1);
    CHECK_THROWS_AS(home_base_placement(257, m), std::invalid_argument);
}

TEST_CASE("mobile placement snakes through the grid") {
    const GridLayout m = build_mesh(2, 2, 4, 4, 1, 3, LqCapacity::Mobile, 600, kDefaults);
    const auto placement = mobile_placement(4, m);
    REQUIRE(placement.size() == 4);
    CHECK(placement[0] == Coordinate{0, 0});
    CHECK(placement[1] == Coordinate{0, 1});
    CHECK(placement[2] == Coordinate{1, 1});
    CHECK(placement[3] == Coordinate{1, 0});
}

TEST_CASE("serpentine traffic is nearest-neighbor except returns") {
    // Walk the mobile discipline for the all-to-all pattern: qubit i
    // hosts partners at home, then marches site to site, then returns.
    const int n = 16;
    const GridLayout m = build_mesh(4, 4, 4, 4, 1, 3, LqCapacity::Mobile, 600, kDefaults);
    const auto placement = mobile_placement(n, m);
    const InstructionStream s = qft_pattern(n);

    std::vector<Coordinate> pos(placement.begin(), placement.end());
    for (const auto& op : s.ops) {
        const Coordinate from = pos[op.qubit_a - 1];
        const Coordinate to = pos[op.qubit_b - 1];
        const int hops = std::abs(from.x - to.x) + std::abs(from.y - to.y);
        CHECK(hops == 1);
        pos[op.qubit_a - 1] = to;  // the visitor stays at the partner's site
    }
    // Returns to the starting location are the only longer transfers.
    int long_returns = 0;
    for (int q = 0; q < n; ++q) {
        const int hops = std::abs(pos[q].x - placement[q].x) + std::abs(pos[q].y - placement[q].y);
        if (hops > 1) ++long_returns;
    }
    CHECK(long_returns > 0);
}

TEST_CASE("placement attaches and validates streams") {
    const GridLayout m = build_mesh(4, 4, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    InstructionStream s = qft_pattern(16);
    place_stream(s, PlacementKind::HomeBase, m);
    CHECK(s.placement.size() == 16);
    CHECK(s.placement_kind == PlacementKind::HomeBase);

    InstructionStream bad = qft_pattern(4);
    bad.ops.push_back({99, 3, 3});
    CHECK_THROWS_AS(place_stream(bad, PlacementKind::HomeBase, m), std::invalid_argument);
}

TEST_CASE("stream serialization round-trips") {
    const GridLayout m = build_mesh(4, 4, 4, 4, 1, 3, LqCapacity::Mobile, 600, kDefaults);
    InstructionStream s = modexp_pattern(8, 2);
    place_stream(s, PlacementKind::Mobile, m);

    InstructionStream back = load_stream(save_stream(s));
    REQUIRE(back.ops.size() == s.ops.size());
    for (size_t i = 0; i < s.ops.size(); ++i) {
        CHECK(back.ops[i].qubit_a == s.ops[i].qubit_a);
        CHECK(back.ops[i].qubit_b == s.ops[i].qubit_b);
    }
    REQUIRE(back.placement.size() == s.placement.size());
    for (size_t i = 0; i < s.placement.size(); ++i) CHECK(back.placement[i] == s.placement[i]);

    CHECK_THROWS_AS(load_stream("op 1 2\n"), ConfigParseError);
    CHECK_THROWS_AS(load_stream("jump 1 2 3\n"), ConfigParseError);
}

TEST_CASE("schedule waves reproduce the all-to-all issue groups") {
    const GridLayout m = build_mesh(4, 4, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    InstructionStream s = qft_pattern(6);
    place_stream(s, PlacementKind::HomeBase, m);
    const auto groups = schedule(s, m);

    auto group_pairs = [&](size_t g) {
        std::set<std::pair<int, int>> out;
        for (const auto& op : groups.at(g)) out.insert({op.qubit_a, op.qubit_b});
        return out;
    };
    CHECK(group_pairs(0) == std::set<std::pair<int, int>>{{1, 2}});
    CHECK(group_pairs(1) == std::set<std::pair<int, int>>{{1, 3}});
    CHECK(group_pairs(2) == std::set<std::pair<int, int>>{{1, 4}, {2, 3}});
    CHECK(group_pairs(3) == std::set<std::pair<int, int>>{{1, 5}, {2, 4}});
    CHECK(group_pairs(4) == std::set<std::pair<int, int>>{{1, 6}, {2, 5}, {3, 4}});
}

TEST_CASE("schedule waves cover the stream and respect per-qubit order") {
    const GridLayout m = build_mesh(4, 4, 4, 4, 1, 3, LqCapacity::HomeBase, 600, kDefaults);
    for (auto make : {+[] { return qft_pattern(12); }, +[] { return modmult_pattern(6, 6); },
                      +[] { return modexp_pattern(8, 2); }}) {
        InstructionStream s = make();
        place_stream(s, PlacementKind::HomeBase, m);
        const auto groups = schedule(s, m);

        size_t total = 0;
        std::vector<int> last_wave(static_cast<size_t>(s.qubit_count) + 1, -1);
        for (size_t g = 0; g < groups.size(); ++g) {
            for (const auto& op : groups[g]) {
                ++total;
                CHECK(last_wave[op.qubit_a] < static_cast<int>(g));
                CHECK(last_wave[op.qubit_b] < static_cast<int>(g));
                last_wave[op.qubit_a] = static_cast<int>(g);
                last_wave[op.qubit_b] = static_cast<int>(g);
            }
        }
        CHECK(total == s.ops.size());
    }
}
