#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qnet/params.hpp"

namespace qnet {

// Recurrence-based entanglement purification. Two protocols are modeled:
// DEJMPS, which acts on general Bell-diagonal states, and BBPSSW, which
// twirls its input to Werner form before every round. Both consume two
// noisy pairs per round and keep the surviving pair only when the two
// endpoint measurement outcomes agree.
//
// Noise model for noisy rounds: every two-qubit gate is followed by
// two-qubit depolarizing noise with probability p_2q, every one-qubit
// gate by one-qubit depolarizing noise with probability p_1q, and every
// measurement outcome flips with probability p_ms. oracle_purify runs
// the same circuit exactly on the 16-dimensional two-pair joint state
// and is the reference the closed forms are validated against.

enum class Protocol { DEJMPS, BBPSSW };

/// Mixed two-qubit state diagonal in the Bell basis. Coefficient order:
/// a on Phi+, b on Psi-, c on Psi+, d on Phi-. Fidelity is a.
struct BellDiagonalState {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    Fidelity fidelity() const { return a; }
    std::array<double, 4> coefficients() const { return {a, b, c, d}; }

    /// Throws std::invalid_argument unless all coefficients are
    /// non-negative and sum to 1 within 1e-12.
    void validate() const;
};

/// Werner form: the three non-dominant Bell components are equal.
struct WernerState {
    Fidelity f = 1.0;

    /// Throws std::invalid_argument unless f is in [1/4, 1].
    void validate() const;
};

BellDiagonalState werner_state(Fidelity f);

struct PurifyOutcome {
    BellDiagonalState state;
    double p_success = 1.0;

    Fidelity fidelity() const { return state.fidelity(); }
};

/// Input state cannot be improved by the protocol (Werner f <= 1/4, or
/// the a coefficient is not strictly dominant).
class NonPurifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixpoint iteration failed to converge; the message carries the tail
/// of the iterate trace.
class FixpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One BBPSSW round on two copies of s. Noiseless limit:
///   F' = (F^2 + (1-F)^2/9) / (F^2 + 2F(1-F)/3 + 5(1-F)^2/9),
/// p_success = the denominator. The outcome state is the Werner
/// projection of the surviving pair.
PurifyOutcome bbpssw_round(const WernerState& s, const ErrorRates& p);

/// One DEJMPS round on two copies of s. Noiseless limit:
///   a' = (a^2+b^2)/N, b' = 2cd/N, c' = (c^2+d^2)/N, d' = 2ab/N,
/// N = (a+b)^2 + (c+d)^2 = p_success.
PurifyOutcome dejmps_round(const BellDiagonalState& s, const ErrorRates& p);

/// Exact density-matrix simulation of one purification round on the
/// 16-dimensional joint state of two (possibly different) Bell-diagonal
/// pairs, with depolarizing gate noise and measurement bit flips.
/// Independent of the closed forms above; used to validate them.
PurifyOutcome oracle_purify(const std::array<double, 4>& pair1, const std::array<double, 4>& pair2,
                            Protocol protocol, const ErrorRates& p);

/// Minimal number of rounds for a Werner start of fidelity f_in to reach
/// f_target, or nullopt when the protocol's fixpoint lies below f_target.
std::optional<int> rounds_to_threshold(Fidelity f_in, Protocol protocol, const ErrorRates& p,
                                       Fidelity f_target);

/// Fixpoint of the noisy recurrence, iterated from f = 0.99 until
/// |dF| < 1e-12 (at most 10^4 iterations; FixpointError on failure).
Fidelity max_achievable_fidelity(Protocol protocol, const ErrorRates& p);

/// Minimal rounds from a Werner start until the remaining error is
/// within `rel` of the fixpoint error: 1 - F <= (1+rel)(1 - F*) + 1e-12.
/// nullopt when not reached within 10^5 rounds.
std::optional<int> rounds_to_near_fixpoint(Fidelity f_start, Protocol protocol,
                                           const ErrorRates& p, double rel = 0.1);

/// Expected raw input pairs per delivered output pair for a purification
/// tree of `rounds` levels: product over levels of 2 / p_success(level).
double expected_pairs_for_rounds(int rounds, std::span<const double> p_success = {});

/// One round-trip of a queue-purifier level: classical outcome exchange
/// spans d cells.
Microseconds queue_purifier_round_latency(const OperationTimes& t, DistanceCells d);

/// FIFO chain of `depth` purifier stations; level i implements tree
/// level i, so a depth-n chain realizes a depth-n tree with n stations.
struct QueuePurifierModel {
    int depth = 3;
};

class QueueStarvationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Steady-state interval between delivered pairs for a FIFO level chain
/// fed at incoming_rate pairs/us. Each level halves the pair stream
/// (scaled by its success probability) and serializes its rounds at the
/// round latency. p_success defaults to 1 per level.
Microseconds queue_purifier_latency(double incoming_rate, int rounds, const OperationTimes& t,
                                    DistanceCells d, std::span<const double> p_success = {});

struct PurifyRoundPoint {
    int round = 0;
    Fidelity fidelity = 0.0;
    double p_success = 1.0;        // of the round that produced this level
    double expected_pairs = 1.0;   // cumulative raw pairs per pair at this level
};

/// Iterates a protocol from a Werner start, recording fidelity and the
/// cumulative expected raw-pair cost per surviving pair at every level.
std::vector<PurifyRoundPoint> purify_trajectory(Protocol protocol, Fidelity f_start,
                                                const ErrorRates& p, int rounds);

}  // namespace qnet
