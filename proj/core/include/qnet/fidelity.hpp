#pragma once

#include "qnet/params.hpp"

namespace qnet {

// Closed-form fidelity and latency models for the two qubit transports:
// ballistic movement through a channel of ion traps, and teleportation
// assisted by a pre-shared EPR pair.

/// F_new = F_old * (1 - p_mv)^d.
Fidelity ballistic_fidelity(Fidelity f_old, DistanceCells d, const ErrorRates& p);

/// t = t_mv * d.
Microseconds ballistic_latency(DistanceCells d, const OperationTimes& t);

/// Fidelity of a qubit after one teleport that consumes an EPR pair of
/// fidelity f_epr:
///   1/4 * (1 + 3 (1-p_1q)(1-p_2q) * (4(1-p_ms)^2 - 1)/3
///            * (4 f_old - 1)(4 f_epr - 1)/9)
Fidelity teleport_fidelity(Fidelity f_old, Fidelity f_epr, const ErrorRates& p);

/// Fidelity of a freshly generated EPR pair: (1-p_1q)(1-p_2q) * f_zero.
Fidelity generation_fidelity(const ErrorRates& p, Fidelity f_zero);

/// t = 2 t_1q + t_2q + t_ms + t_cb * d, with the EPR pair already at the
/// endpoints; d is the classical-bit distance.
Microseconds teleport_latency(DistanceCells d, const OperationTimes& t);

/// Folds teleport_fidelity `hops` times, each hop assisted by a pair of
/// fidelity f_link.
Fidelity chained_teleport_fidelity(Fidelity f_initial, int hops, Fidelity f_link,
                                   const ErrorRates& p);

/// Fidelity of a virtual-wire pair as delivered to its two endpoint
/// routers: generation fidelity degraded by half a hop of ballistic
/// movement on each side (the pair is generated at the link midpoint).
Fidelity link_fidelity(const ParameterSet& params, DistanceCells hop_spacing);

/// Smallest distance at which a teleport beats the equivalent ballistic
/// move. Throws std::domain_error when t_mv <= t_cb (no crossover).
DistanceCells crossover_distance(const OperationTimes& t);

}  // namespace qnet
