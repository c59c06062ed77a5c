#include "qnet/workloads.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qnet {

InstructionStream qft_pattern(int n) {
    if (n < 2) throw std::invalid_argument("all-to-all pattern needs at least 2 qubits");
    InstructionStream stream;
    stream.qubit_count = n;
    stream.ops.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    int seq = 0;
    for (int sum = 3; sum <= 2 * n - 1; ++sum)
        for (int a = 1; a < sum - a; ++a)
            if (sum - a <= n) stream.ops.push_back({seq++, a, sum - a});
    return stream;
}

InstructionStream modmult_pattern(int n_a, int n_b) {
    if (n_a < 1 || n_b < 1) throw std::invalid_argument("bipartite pattern needs non-empty sets");
    InstructionStream stream;
    stream.qubit_count = n_a + n_b;
    stream.ops.reserve(static_cast<size_t>(n_a) * n_b);
    int seq = 0;
    for (int a = 1; a <= n_a; ++a)
        for (int b = 1; b <= n_b; ++b) stream.ops.push_back({seq++, a, n_a + b});
    return stream;
}

InstructionStream modexp_pattern(int n, int steps) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("register size must be even and >= 2");
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    const int half = n / 2;
    InstructionStream stream;
    stream.qubit_count = n;
    int seq = 0;
    for (int step = 0; step < steps; ++step) {
        // Squaring: all-to-all inside the first half.
        if (half >= 2) {
            InstructionStream square = qft_pattern(half);
            for (const auto& op : square.ops) stream.ops.push_back({seq++, op.qubit_a, op.qubit_b});
        }
        // Multiplication: bipartite across the halves.
        for (int a = 1; a <= half; ++a)
            for (int b = half + 1; b <= n; ++b) stream.ops.push_back({seq++, a, b});
    }
    return stream;
}

std::vector<Coordinate> home_base_placement(int n, const GridLayout& layout) {
    if (n < 1 || n > layout.site_count())
        throw std::invalid_argument("placement needs 1..sites qubits, got " + std::to_string(n));
    std::vector<Coordinate> placement;
    placement.reserve(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) placement.push_back(layout.site_at(q));
    return placement;
}

std::vector<Coordinate> mobile_placement(int n, const GridLayout& layout) {
    if (n < 1 || n > layout.site_count())
        throw std::invalid_argument("placement needs 1..sites qubits, got " + std::to_string(n));
    std::vector<Coordinate> placement;
    placement.reserve(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        const int row = q / layout.cols;
        const int pos = q % layout.cols;
        const int col = (row % 2 == 0) ? pos : layout.cols - 1 - pos;
        placement.push_back(Coordinate{row, col});
    }
    return placement;
}

void place_stream(InstructionStream& stream, PlacementKind kind, const GridLayout& layout) {
    for (const auto& op : stream.ops) {
        if (op.qubit_a == op.qubit_b)
            throw std::invalid_argument("instruction " + std::to_string(op.seq) +
                                        " pairs a qubit with itself");
        if (op.qubit_a < 1 || op.qubit_a > stream.qubit_count || op.qubit_b < 1 ||
            op.qubit_b > stream.qubit_count)
            throw std::invalid_argument("instruction " + std::to_string(op.seq) +
                                        " references an unplaced qubit");
    }
    stream.placement_kind = kind;
    stream.placement = (kind == PlacementKind::HomeBase)
                           ? home_base_placement(stream.qubit_count, layout)
                           : mobile_placement(stream.qubit_count, layout);
}

std::string save_stream(const InstructionStream& stream) {
    std::string out;
    char buf[64];
    for (size_t q = 0; q < stream.placement.size(); ++q) {
        std::snprintf(buf, sizeof buf, "place %zu %d %d\n", q + 1, stream.placement[q].x,
                      stream.placement[q].y);
        out += buf;
    }
    for (const auto& op : stream.ops) {
        std::snprintf(buf, sizeof buf, "op %d %d %d\n", op.seq, op.qubit_a, op.qubit_b);
        out += buf;
    }
    return out;
}

InstructionStream load_stream(const std::string& text) {
    InstructionStream stream;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "op") {
            LogicalInstruction op;
            if (!(ls >> op.seq >> op.qubit_a >> op.qubit_b))
                throw ConfigParseError(lineno, "malformed op line");
            stream.ops.push_back(op);
            stream.qubit_count = std::max({stream.qubit_count, op.qubit_a, op.qubit_b});
        } else if (head == "place") {
            int q;
            Coordinate c;
            if (!(ls >> q >> c.x >> c.y)) throw ConfigParseError(lineno, "malformed place line");
            if (q < 1) throw ConfigParseError(lineno, "qubit numbers start at 1");
            if (static_cast<int>(stream.placement.size()) < q) stream.placement.resize(q);
            stream.placement[q - 1] = c;
            stream.qubit_count = std::max(stream.qubit_count, q);
        } else {
            throw ConfigParseError(lineno, "unknown directive \"" + head + "\"");
        }
    }
    return stream;
}

}  // namespace qnet
