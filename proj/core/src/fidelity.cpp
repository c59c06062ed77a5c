#include "qnet/fidelity.hpp"

#include <cmath>
#include <stdexcept>

namespace qnet {

Fidelity ballistic_fidelity(Fidelity f_old, DistanceCells d, const ErrorRates& p) {
    return f_old * std::pow(1.0 - p.p_mv, static_cast<double>(d));
}

Microseconds ballistic_latency(DistanceCells d, const OperationTimes& t) {
    return t.t_mv * static_cast<double>(d);
}

Fidelity teleport_fidelity(Fidelity f_old, Fidelity f_epr, const ErrorRates& p) {
    const double gate = (1.0 - p.p_1q) * (1.0 - p.p_2q);
    const double ms = 1.0 - p.p_ms;
    const double measure = (4.0 * ms * ms - 1.0) / 3.0;
    const double signal = (4.0 * f_old - 1.0) * (4.0 * f_epr - 1.0) / 9.0;
    return 0.25 * (1.0 + 3.0 * gate * measure * signal);
}

Fidelity generation_fidelity(const ErrorRates& p, Fidelity f_zero) {
    return (1.0 - p.p_1q) * (1.0 - p.p_2q) * f_zero;
}

Microseconds teleport_latency(DistanceCells d, const OperationTimes& t) {
    return 2.0 * t.t_1q + t.t_2q + t.t_ms + t.t_cb * static_cast<double>(d);
}

Fidelity chained_teleport_fidelity(Fidelity f_initial, int hops, Fidelity f_link,
                                   const ErrorRates& p) {
    Fidelity f = f_initial;
    for (int i = 0; i < hops; ++i) f = teleport_fidelity(f, f_link, p);
    return f;
}

Fidelity link_fidelity(const ParameterSet& params, DistanceCells hop_spacing) {
    const Fidelity gen = generation_fidelity(params.errors, params.f_zero);
    // Both halves move hop_spacing/2 cells; the exact composition rule
    // makes that one ballistic_fidelity over the full spacing.
    return ballistic_fidelity(gen, hop_spacing, params.errors);
}

DistanceCells crossover_distance(const OperationTimes& t) {
    if (!(t.t_mv > t.t_cb))
        throw std::domain_error(
            "no crossover: ballistic movement per cell is not slower than classical transit");
    const double base = 2.0 * t.t_1q + t.t_2q + t.t_ms;
    // Smallest integer d with base + t_cb*d < t_mv*d.
    DistanceCells d = static_cast<DistanceCells>(std::floor(base / (t.t_mv - t.t_cb))) + 1;
    if (d < 0) d = 0;
    while (teleport_latency(d, t) >= ballistic_latency(d, t)) ++d;
    while (d > 0 && teleport_latency(d - 1, t) < ballistic_latency(d - 1, t)) --d;
    return d;
}

}  // namespace qnet
