#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qnet {

/// Time values are microseconds; per-cell values are microseconds per
/// ion-trap cell. One cell is the minimum distance of a ballistic move.
using Microseconds = double;

/// Number of ion-trap cells along a channel.
using DistanceCells = std::int64_t;

/// Overlap with the error-free reference state, in [0, 1].
using Fidelity = double;

struct OperationTimes {
    Microseconds t_1q   = 1.0;    // one-qubit gate
    Microseconds t_2q   = 20.0;   // two-qubit gate
    Microseconds t_mv   = 0.2;    // ballistic move, per cell
    Microseconds t_ms   = 100.0;  // measurement
    Microseconds t_gen  = 122.0;  // EPR pair generation
    Microseconds t_tprt = 122.0;  // teleport (local operations, zero classical distance)
    Microseconds t_prfy = 121.0;  // one purification round (zero classical distance)
    Microseconds t_cb   = 0.002;  // classical bit transit, per cell
};

struct ErrorRates {
    double p_1q = 1e-8;  // one-qubit gate
    double p_2q = 1e-7;  // two-qubit gate
    double p_mv = 1e-6;  // ballistic move, per cell
    double p_ms = 1e-8;  // measurement
};

/// Minimum EPR fidelity at which data teleportation stays inside
/// fault-tolerance bounds.
struct ThresholdPolicy {
    Fidelity f_min = 1.0 - 7.5e-5;
};

struct ParameterSet {
    OperationTimes  times;
    ErrorRates      errors;
    ThresholdPolicy threshold;
    Fidelity        f_zero = 1.0;  // fidelity of freshly initialized qubits
};

class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

class ConfigValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ion-trap technology defaults.
ParameterSet default_ion_trap();

/// Parses a plain-text `key = value` document ('#' starts a comment).
/// Omitted keys fall back to default_ion_trap(). Recognized keys:
/// t_1q t_2q t_mv t_ms t_gen t_tprt t_prfy t_cb p_1q p_2q p_mv p_ms
/// f_min f_zero.
ParameterSet load_config(const std::string& text);

/// Emits every key; load_config(save_config(p)) == p.
std::string save_config(const ParameterSet& params);

/// Throws ConfigValidationError unless all times are positive, all
/// probabilities are in [0, 1), f_min in (0, 1) and f_zero in (0, 1].
void validate(const ParameterSet& params);

}  // namespace qnet
