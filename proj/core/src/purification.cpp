#include "qnet/purification.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

namespace qnet {

void BellDiagonalState::validate() const {
    const double sum = a + b + c + d;
    if (a < 0.0 || b < 0.0 || c < 0.0 || d < 0.0)
        throw std::invalid_argument("Bell-diagonal coefficients must be non-negative");
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("Bell-diagonal coefficients must sum to 1, got " +
                                    std::to_string(sum));
}

void WernerState::validate() const {
    if (!(f >= 0.25 - 1e-12 && f <= 1.0 + 1e-12))
        throw std::invalid_argument("Werner fidelity must be in [1/4, 1], got " +
                                    std::to_string(f));
}

BellDiagonalState werner_state(Fidelity f) {
    const double r = (1.0 - f) / 3.0;
    return BellDiagonalState{f, r, r, r};
}

namespace {

// Bell states carry two labels: a phase bit (0 for +, 1 for -) and a
// parity bit (0 for Phi, 1 for Psi). Coefficient order (a, b, c, d) =
// (Phi+, Psi-, Psi+, Phi-).
constexpr int kPhase[4] = {0, 1, 0, 1};
constexpr int kParity[4] = {0, 1, 1, 0};
constexpr int kIndexOf[2][2] = {{0, 2}, {3, 1}};  // [phase][parity]

using Coeffs = std::array<double, 4>;

// The DEJMPS pre-rotation (Rx(pi/2) on one side, Rx(-pi/2) on the other)
// exchanges the Phi- and Psi- populations and fixes Phi+ and Psi+.
Coeffs dejmps_rotation(const Coeffs& c) { return {c[0], c[3], c[2], c[1]}; }

Coeffs twirl_to_werner(const Coeffs& c) {
    const double r = (c[1] + c[2] + c[3]) / 3.0;
    return {c[0], r, r, r};
}

// One-qubit depolarizing on one half of a pair: with probability p the
// qubit is replaced by the maximally mixed state, which takes the pair
// to the uniform Bell mixture.
Coeffs depolarize_half(const Coeffs& c, double p) {
    const double avg = (c[0] + c[1] + c[2] + c[3]) / 4.0;
    Coeffs out;
    for (int k = 0; k < 4; ++k) out[k] = (1.0 - p) * c[k] + p * avg;
    return out;
}

// One noisy purification round in Bell-coefficient space. source/target
// are the prepared (rotated or twirled, gate-noise-applied) pair states.
// Both endpoint CNOTs commute with the depolarizing channels on the
// other endpoint's qubits, so the two two-qubit depolarizings can be
// applied after the joint BXOR permutation.
PurifyOutcome coefficient_round(const Coeffs& source, const Coeffs& target, const ErrorRates& p) {
    double v[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) v[i][j] = source[i] * target[j];

    // Bilateral CNOT: source phase picks up target phase, target parity
    // picks up source parity.
    double w[4][4] = {};
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const int si = kIndexOf[kPhase[i] ^ kPhase[j]][kParity[i]];
            const int tj = kIndexOf[kPhase[j]][kParity[j] ^ kParity[i]];
            w[si][tj] += v[i][j];
            total += v[i][j];
        }
    }

    // Two two-qubit depolarizings (one per endpoint CNOT). Each mixes the
    // four involved qubits toward the uniform product mixture.
    const double keep = (1.0 - p.p_2q) * (1.0 - p.p_2q);
    const double mix = (1.0 - keep) * total / 16.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w[i][j] = keep * w[i][j] + mix;

    // Measure both target qubits; keep when the reported outcomes agree.
    const double pm = p.p_ms;
    const double q_same = (1.0 - pm) * (1.0 - pm) + pm * pm;
    const double q_diff = 2.0 * pm * (1.0 - pm);

    Coeffs out = {0, 0, 0, 0};
    double p_success = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double q = (kParity[j] == 0) ? q_same : q_diff;
            out[i] += w[i][j] * q;
            p_success += w[i][j] * q;
        }
    }
    if (p_success <= 0.0)
        throw NonPurifiableError("purification post-selection has zero success probability");
    for (double& x : out) x /= p_success;

    return PurifyOutcome{BellDiagonalState{out[0], out[1], out[2], out[3]}, p_success};
}

PurifyOutcome dejmps_pair_round(const Coeffs& pair1, const Coeffs& pair2, const ErrorRates& p) {
    auto prep = [&](const Coeffs& c) {
        // Rotation is one one-qubit gate on each half of the pair.
        Coeffs r = dejmps_rotation(c);
        r = depolarize_half(r, p.p_1q);
        r = depolarize_half(r, p.p_1q);
        return r;
    };
    return coefficient_round(prep(pair1), prep(pair2), p);
}

PurifyOutcome bbpssw_pair_round(const Coeffs& pair1, const Coeffs& pair2, const ErrorRates& p) {
    // The defining twirl is modeled as a noiseless projection to Werner
    // form; the round itself contributes the CNOT and measurement noise.
    return coefficient_round(twirl_to_werner(pair1), twirl_to_werner(pair2), p);
}

}  // namespace

PurifyOutcome bbpssw_round(const WernerState& s, const ErrorRates& p) {
    if (!(s.f > 0.25))
        throw NonPurifiableError("BBPSSW cannot improve fidelity at or below 1/4, got f = " +
                                 std::to_string(s.f));
    s.validate();
    const Coeffs in = werner_state(s.f).coefficients();
    PurifyOutcome out = bbpssw_pair_round(in, in, p);
    out.state = werner_state(out.state.fidelity());
    return out;
}

PurifyOutcome dejmps_round(const BellDiagonalState& s, const ErrorRates& p) {
    s.validate();
    if (!(s.a > s.b && s.a > s.c && s.a > s.d))
        throw NonPurifiableError("DEJMPS requires a strictly dominant fidelity coefficient");
    const Coeffs in = s.coefficients();
    return dejmps_pair_round(in, in, p);
}

// ---------------------------------------------------------------------------
// Density-matrix oracle.
//
// Qubit order (a1, b1, a2, b2) mapped to index bits 3..0; pair 1 = (a1, b1)
// is the kept pair, pair 2 = (a2, b2) is measured.

namespace {

using cx = std::complex<double>;
constexpr int kDim = 16;

struct Mat {
    std::array<cx, kDim * kDim> m{};
    cx& at(int r, int c) { return m[r * kDim + c]; }
    const cx& at(int r, int c) const { return m[r * kDim + c]; }
};

Mat mat_mul(const Mat& x, const Mat& y) {
    Mat out;
    for (int r = 0; r < kDim; ++r)
        for (int k = 0; k < kDim; ++k) {
            const cx xv = x.at(r, k);
            if (xv == cx{}) continue;
            for (int c = 0; c < kDim; ++c) out.at(r, c) += xv * y.at(k, c);
        }
    return out;
}

Mat adjoint(const Mat& x) {
    Mat out;
    for (int r = 0; r < kDim; ++r)
        for (int c = 0; c < kDim; ++c) out.at(r, c) = std::conj(x.at(c, r));
    return out;
}

Mat conjugate(const Mat& u, const Mat& rho) { return mat_mul(mat_mul(u, rho), adjoint(u)); }

// Dense 16x16 embedding of a one-qubit operator acting on `qubit`
// (3 = a1, 2 = b1, 1 = a2, 0 = b2).
Mat embed_1q(const std::array<cx, 4>& u2, int qubit) {
    Mat out;
    for (int r = 0; r < kDim; ++r) {
        for (int c = 0; c < kDim; ++c) {
            if ((r & ~(1 << qubit)) != (c & ~(1 << qubit))) continue;
            const int rb = (r >> qubit) & 1, cb = (c >> qubit) & 1;
            out.at(r, c) = u2[rb * 2 + cb];
        }
    }
    return out;
}

Mat cnot_matrix(int control, int target) {
    Mat out;
    for (int c = 0; c < kDim; ++c) {
        int r = c;
        if ((c >> control) & 1) r ^= (1 << target);
        out.at(r, c) = 1.0;
    }
    return out;
}

const std::array<cx, 4> kPauli[3] = {
    {cx(0, 0), cx(1, 0), cx(1, 0), cx(0, 0)},    // X
    {cx(0, 0), cx(0, -1), cx(0, 1), cx(0, 0)},   // Y
    {cx(1, 0), cx(0, 0), cx(0, 0), cx(-1, 0)},   // Z
};

void depolarize_1q(Mat& rho, int qubit, double p) {
    if (p <= 0.0) return;
    Mat twirl = rho;  // identity term
    for (const auto& pauli : kPauli) {
        const Mat pm = embed_1q(pauli, qubit);
        const Mat term = conjugate(pm, rho);
        for (int i = 0; i < kDim * kDim; ++i) twirl.m[i] += term.m[i];
    }
    for (int i = 0; i < kDim * kDim; ++i)
        rho.m[i] = (1.0 - p) * rho.m[i] + (p / 4.0) * twirl.m[i];
}

void depolarize_2q(Mat& rho, int qa, int qb, double p) {
    if (p <= 0.0) return;
    Mat twirl{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            Mat pm;
            if (i == 0 && j == 0) {
                for (int r = 0; r < kDim; ++r) pm.at(r, r) = 1.0;
            } else {
                Mat pa, pb;
                if (i == 0)
                    for (int r = 0; r < kDim; ++r) pa.at(r, r) = 1.0;
                else
                    pa = embed_1q(kPauli[i - 1], qa);
                if (j == 0)
                    for (int r = 0; r < kDim; ++r) pb.at(r, r) = 1.0;
                else
                    pb = embed_1q(kPauli[j - 1], qb);
                pm = mat_mul(pa, pb);
            }
            const Mat term = conjugate(pm, rho);
            for (int k = 0; k < kDim * kDim; ++k) twirl.m[k] += term.m[k];
        }
    }
    for (int k = 0; k < kDim * kDim; ++k)
        rho.m[k] = (1.0 - p) * rho.m[k] + (p / 16.0) * twirl.m[k];
}

// Bell vectors on a two-qubit subsystem, coefficient order
// (Phi+, Psi-, Psi+, Phi-); amplitudes over |00>,|01>,|10>,|11>.
const double kBellVec[4][4] = {
    {1, 0, 0, 1},    // Phi+
    {0, 1, -1, 0},   // Psi-
    {0, 1, 1, 0},    // Psi+
    {1, 0, 0, -1},   // Phi-
};

std::array<std::array<double, 4>, 4> bell_density(const std::array<double, 4>& c) {
    std::array<std::array<double, 4>, 4> rho{};
    for (int k = 0; k < 4; ++k)
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s)
                rho[r][s] += c[k] * 0.5 * kBellVec[k][r] * kBellVec[k][s];
    return rho;
}

Mat joint_state(const std::array<double, 4>& pair1, const std::array<double, 4>& pair2) {
    const auto rho1 = bell_density(pair1);
    const auto rho2 = bell_density(pair2);
    Mat rho;
    for (int r1 = 0; r1 < 4; ++r1)
        for (int c1 = 0; c1 < 4; ++c1)
            for (int r2 = 0; r2 < 4; ++r2)
                for (int c2 = 0; c2 < 4; ++c2)
                    rho.at(r1 * 4 + r2, c1 * 4 + c2) = rho1[r1][c1] * rho2[r2][c2];
    return rho;
}

constexpr double kPi = 3.14159265358979323846;

std::array<cx, 4> rx_gate(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return {cx(c, 0), cx(0, -s), cx(0, -s), cx(c, 0)};
}

}  // namespace

PurifyOutcome oracle_purify(const std::array<double, 4>& pair1, const std::array<double, 4>& pair2,
                            Protocol protocol, const ErrorRates& p) {
    for (const auto& c : {pair1, pair2}) {
        double sum = 0.0;
        for (double x : c) {
            if (x < -1e-12) throw std::invalid_argument("Bell coefficients must be non-negative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("Bell coefficients must sum to 1");
    }

    std::array<double, 4> in1 = pair1, in2 = pair2;
    if (protocol == Protocol::BBPSSW) {
        in1 = twirl_to_werner(in1);
        in2 = twirl_to_werner(in2);
    }

    constexpr int kA1 = 3, kB1 = 2, kA2 = 1, kB2 = 0;
    Mat rho = joint_state(in1, in2);

    if (protocol == Protocol::DEJMPS) {
        const auto rx_pos = rx_gate(kPi / 2.0), rx_neg = rx_gate(-kPi / 2.0);
        for (int q : {kA1, kA2}) {
            rho = conjugate(embed_1q(rx_pos, q), rho);
            depolarize_1q(rho, q, p.p_1q);
        }
        for (int q : {kB1, kB2}) {
            rho = conjugate(embed_1q(rx_neg, q), rho);
            depolarize_1q(rho, q, p.p_1q);
        }
    }

    rho = conjugate(cnot_matrix(kA1, kA2), rho);
    depolarize_2q(rho, kA1, kA2, p.p_2q);
    rho = conjugate(cnot_matrix(kB1, kB2), rho);
    depolarize_2q(rho, kB1, kB2, p.p_2q);

    // Z measurement on a2/b2 with classically flipped readout; keep the
    // branches whose reported outcomes agree.
    const double pm = p.p_ms;
    const double q_same = (1.0 - pm) * (1.0 - pm) + pm * pm;
    const double q_diff = 2.0 * pm * (1.0 - pm);

    Mat kept;
    for (int ma = 0; ma < 2; ++ma) {
        for (int mb = 0; mb < 2; ++mb) {
            const double weight = (ma == mb) ? q_same : q_diff;
            for (int r = 0; r < kDim; ++r) {
                if (((r >> kA2) & 1) != ma || ((r >> kB2) & 1) != mb) continue;
                for (int c = 0; c < kDim; ++c) {
                    if (((c >> kA2) & 1) != ma || ((c >> kB2) & 1) != mb) continue;
                    kept.at(r, c) += weight * rho.at(r, c);
                }
            }
        }
    }

    double p_success = 0.0;
    for (int r = 0; r < kDim; ++r) p_success += kept.at(r, r).real();
    if (p_success <= 0.0)
        throw NonPurifiableError("oracle post-selection has zero success probability");

    // Trace out the measured pair.
    std::array<std::array<cx, 4>, 4> src{};
    for (int r1 = 0; r1 < 4; ++r1)
        for (int c1 = 0; c1 < 4; ++c1)
            for (int low = 0; low < 4; ++low)
                src[r1][c1] += kept.at(r1 * 4 + low, c1 * 4 + low);

    std::array<double, 4> coeffs{};
    for (int k = 0; k < 4; ++k) {
        cx acc{};
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s)
                acc += 0.5 * kBellVec[k][r] * src[r][s] * kBellVec[k][s];
        coeffs[k] = std::max(0.0, acc.real() / p_success);
    }

    return PurifyOutcome{BellDiagonalState{coeffs[0], coeffs[1], coeffs[2], coeffs[3]}, p_success};
}

// ---------------------------------------------------------------------------
// Iteration helpers.

namespace {

PurifyOutcome protocol_round(Protocol protocol, const BellDiagonalState& s, const ErrorRates& p) {
    if (protocol == Protocol::BBPSSW) return bbpssw_round(WernerState{s.fidelity()}, p);
    return dejmps_round(s, p);
}

}  // namespace

std::optional<int> rounds_to_threshold(Fidelity f_in, Protocol protocol, const ErrorRates& p,
                                       Fidelity f_target) {
    if (!(f_in > 0.25 && f_in <= 1.0))
        throw std::invalid_argument("starting fidelity must be in (1/4, 1]");
    if (f_in >= f_target) return 0;

    BellDiagonalState state = werner_state(f_in);
    Fidelity f = f_in;
    for (int round = 1; round <= 10000; ++round) {
        PurifyOutcome out;
        try {
            out = protocol_round(protocol, state, p);
        } catch (const NonPurifiableError&) {
            return std::nullopt;
        }
        const Fidelity next = out.fidelity();
        if (next >= f_target) return round;
        if (next <= f + 1e-15) return std::nullopt;  // stalled below target
        state = out.state;
        f = next;
    }
    return std::nullopt;
}

Fidelity max_achievable_fidelity(Protocol protocol, const ErrorRates& p) {
    BellDiagonalState state = werner_state(0.99);
    Fidelity f = state.fidelity();
    std::array<double, 8> trace{};
    for (int i = 0; i < 10000; ++i) {
        PurifyOutcome out;
        try {
            out = protocol_round(protocol, state, p);
        } catch (const NonPurifiableError&) {
            return f;  // recurrence collapsed; report the last attainable value
        }
        const Fidelity next = out.fidelity();
        trace[i % trace.size()] = next;
        if (std::abs(next - f) < 1e-12) return next;
        state = out.state;
        f = next;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "fixpoint iteration did not converge in 10000 rounds; trailing iterates "
                  "%.17g %.17g %.17g %.17g",
                  trace[4], trace[5], trace[6], trace[7]);
    throw FixpointError(buf);
}

std::optional<int> rounds_to_near_fixpoint(Fidelity f_start, Protocol protocol,
                                           const ErrorRates& p, double rel) {
    const Fidelity fix = max_achievable_fidelity(protocol, p);
    const double target_error = (1.0 + rel) * (1.0 - fix) + 1e-12;

    BellDiagonalState state = werner_state(f_start);
    if (1.0 - state.fidelity() <= target_error) return 0;
    for (int round = 1; round <= 100000; ++round) {
        PurifyOutcome out;
        try {
            out = protocol_round(protocol, state, p);
        } catch (const NonPurifiableError&) {
            return std::nullopt;
        }
        if (1.0 - out.fidelity() <= target_error) return round;
        state = out.state;
    }
    return std::nullopt;
}

double expected_pairs_for_rounds(int rounds, std::span<const double> p_success) {
    if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");
    if (!p_success.empty() && static_cast<int>(p_success.size()) < rounds)
        throw std::invalid_argument("p_success sequence shorter than round count");
    double pairs = 1.0;
    for (int i = 0; i < rounds; ++i) {
        const double ps = p_success.empty() ? 1.0 : p_success[i];
        if (!(ps > 0.0 && ps <= 1.0))
            throw std::invalid_argument("success probabilities must be in (0, 1]");
        pairs *= 2.0 / ps;
    }
    return pairs;
}

Microseconds queue_purifier_round_latency(const OperationTimes& t, DistanceCells d) {
    return t.t_prfy + t.t_cb * static_cast<double>(d);
}

Microseconds queue_purifier_latency(double incoming_rate, int rounds, const OperationTimes& t,
                                    DistanceCells d, std::span<const double> p_success) {
    if (!(incoming_rate > 0.0))
        throw QueueStarvationError("queue purifier starves at zero incoming rate");
    if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");
    if (!p_success.empty() && static_cast<int>(p_success.size()) < rounds)
        throw std::invalid_argument("p_success sequence shorter than round count");
    if (rounds == 0) return 1.0 / incoming_rate;

    const Microseconds round_latency = queue_purifier_round_latency(t, d);
    double rate = incoming_rate;
    for (int i = 0; i < rounds; ++i) {
        const double ps = p_success.empty() ? 1.0 : p_success[i];
        if (!(ps > 0.0 && ps <= 1.0))
            throw std::invalid_argument("success probabilities must be in (0, 1]");
        const double attempts = std::min(rate / 2.0, 1.0 / round_latency);
        rate = attempts * ps;
    }
    return 1.0 / rate;
}

std::vector<PurifyRoundPoint> purify_trajectory(Protocol protocol, Fidelity f_start,
                                                const ErrorRates& p, int rounds) {
    std::vector<PurifyRoundPoint> points;
    points.push_back(PurifyRoundPoint{0, f_start, 1.0, 1.0});
    BellDiagonalState state = werner_state(f_start);
    double pairs = 1.0;
    for (int round = 1; round <= rounds; ++round) {
        PurifyOutcome out;
        try {
            out = protocol_round(protocol, state, p);
        } catch (const NonPurifiableError&) {
            break;
        }
        pairs *= 2.0 / out.p_success;
        points.push_back(PurifyRoundPoint{round, out.fidelity(), out.p_success, pairs});
        state = out.state;
    }
    return points;
}

}  // namespace qnet
