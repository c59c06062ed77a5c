#pragma once

#include <string>
#include <vector>

#include "qnet/topology.hpp"

namespace qnet {

/// One two-logical-qubit operation; qubits are numbered from 1.
struct LogicalInstruction {
    int seq = 0;
    int qubit_a = 0;
    int qubit_b = 0;
};

enum class PlacementKind { HomeBase, Mobile };

struct InstructionStream {
    std::vector<LogicalInstruction> ops;
    int qubit_count = 0;
    PlacementKind placement_kind = PlacementKind::HomeBase;
    /// Home site of logical qubit q at placement[q - 1].
    std::vector<Coordinate> placement;
};

/// All-to-all pattern: every unordered pair once, emitted in diagonal
/// order (ascending a+b, then ascending a) so each qubit's partner
/// sequence ascends. n(n-1)/2 instructions.
InstructionStream qft_pattern(int n);

/// Bipartite pattern: qubits 1..n_a against n_a+1..n_a+n_b, row-major.
InstructionStream modmult_pattern(int n_a, int n_b);

/// `steps` repetitions of an all-to-all squaring phase on the first half
/// followed by a bipartite multiply phase between the halves.
InstructionStream modexp_pattern(int n, int steps);

/// Row-major site per qubit, one per site; visitors return home.
std::vector<Coordinate> home_base_placement(int n, const GridLayout& layout);

/// Serpentine (boustrophedon) site order for capacity-2 sites, matching
/// the snake traversal of the all-to-all pattern.
std::vector<Coordinate> mobile_placement(int n, const GridLayout& layout);

/// Attaches a placement to a stream and validates qubit indices.
void place_stream(InstructionStream& stream, PlacementKind kind, const GridLayout& layout);

/// Line-oriented text: `op <seq> <qa> <qb>` and `place <q> <x> <y>`.
std::string save_stream(const InstructionStream& stream);
InstructionStream load_stream(const std::string& text);

}  // namespace qnet
