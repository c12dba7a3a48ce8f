#include "qfl/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfl/rng.hpp"

namespace qfl::qsim {

namespace {

constexpr double kNormTolerance = 1e-10;

void check_qubit_count(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw ValidationError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                              std::to_string(n_qubits));
}

// Applies the 2x2 unitary [[u00, u01], [u10, u11]] to the target qubit.
void apply_single_qubit(std::vector<Complex>& amps, int target,
                        Complex u00, Complex u01, Complex u10, Complex u11) {
    const std::uint64_t stride = 1ULL << target;
    const std::uint64_t dim = amps.size();
    for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
        for (std::uint64_t offset = 0; offset < stride; ++offset) {
            const std::uint64_t i0 = base + offset;
            const std::uint64_t i1 = i0 + stride;
            const Complex a0 = amps[i0];
            const Complex a1 = amps[i1];
            amps[i0] = u00 * a0 + u01 * a1;
            amps[i1] = u10 * a0 + u11 * a1;
        }
    }
}

void apply_controlled_single_qubit(std::vector<Complex>& amps, int control, int target,
                                   Complex u00, Complex u01, Complex u10, Complex u11) {
    const std::uint64_t tbit = 1ULL << target;
    const std::uint64_t cbit = 1ULL << control;
    const std::uint64_t dim = amps.size();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & cbit) != 0 && (i & tbit) == 0) {
            const std::uint64_t j = i | tbit;
            const Complex a0 = amps[i];
            const Complex a1 = amps[j];
            amps[i] = u00 * a0 + u01 * a1;
            amps[j] = u10 * a0 + u11 * a1;
        }
    }
}

void apply_gate_in_place(std::vector<Complex>& amps, const Gate& gate) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (gate.kind) {
        case GateKind::H:
            apply_single_qubit(amps, gate.target, inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
            break;
        case GateKind::X:
            apply_single_qubit(amps, gate.target, 0, 1, 1, 0);
            break;
        case GateKind::Z:
            apply_single_qubit(amps, gate.target, 1, 0, 0, -1);
            break;
        case GateKind::RX: {
            const double c = std::cos(gate.angle0 / 2), s = std::sin(gate.angle0 / 2);
            apply_single_qubit(amps, gate.target, c, Complex(0, -s), Complex(0, -s), c);
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(gate.angle0 / 2), s = std::sin(gate.angle0 / 2);
            apply_single_qubit(amps, gate.target, c, -s, s, c);
            break;
        }
        case GateKind::RZ: {
            const Complex em(std::cos(gate.angle0 / 2), -std::sin(gate.angle0 / 2));
            apply_single_qubit(amps, gate.target, em, 0, 0, std::conj(em));
            break;
        }
        case GateKind::Rot:
            // Eq-order convention: the state sees RX(phi), then RY(theta),
            // then RZ(omega).
            apply_gate_in_place(amps, Gate::rx(gate.target, gate.angle0));
            apply_gate_in_place(amps, Gate::ry(gate.target, gate.angle1));
            apply_gate_in_place(amps, Gate::rz(gate.target, gate.angle2));
            break;
        case GateKind::CNOT:
            apply_controlled_single_qubit(amps, *gate.control, gate.target, 0, 1, 1, 0);
            break;
        case GateKind::CRX: {
            const double c = std::cos(gate.angle0 / 2), s = std::sin(gate.angle0 / 2);
            apply_controlled_single_qubit(amps, *gate.control, gate.target,
                                          c, Complex(0, -s), Complex(0, -s), c);
            break;
        }
    }
}

} // namespace

Statevector Statevector::zero(int n_qubits) {
    check_qubit_count(n_qubits);
    std::vector<Complex> amps(1ULL << n_qubits, Complex(0, 0));
    amps[0] = Complex(1, 0);
    return Statevector(n_qubits, std::move(amps));
}

Statevector::Statevector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    check_qubit_count(n_qubits_);
    if (amps_.size() != (1ULL << n_qubits_))
        throw StructuralError("statevector length " + std::to_string(amps_.size()) +
                              " does not match 2^" + std::to_string(n_qubits_));
    if (std::abs(norm_squared() - 1.0) > kNormTolerance)
        throw StructuralError("statevector is not normalized");
}

double Statevector::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps_) total += std::norm(a);
    return total;
}

void Gate::validate(int n_qubits) const {
    if (target < 0 || target >= n_qubits)
        throw StructuralError("gate target " + std::to_string(target) + " out of range for " +
                              std::to_string(n_qubits) + " qubits");
    const bool needs_control = kind == GateKind::CNOT || kind == GateKind::CRX;
    if (needs_control != control.has_value())
        throw StructuralError("control qubit presence does not match gate kind");
    if (control) {
        if (*control < 0 || *control >= n_qubits)
            throw StructuralError("gate control " + std::to_string(*control) + " out of range");
        if (*control == target) throw StructuralError("gate control equals target");
    }
}

Circuit::Circuit(int n, std::vector<Gate> g) : n_qubits(n), gates(std::move(g)) {
    check_qubit_count(n_qubits);
    for (const auto& gate : gates) gate.validate(n_qubits);
}

void Circuit::append(const Gate& gate) {
    gate.validate(n_qubits);
    gates.push_back(gate);
}

BooleanOracle::BooleanOracle(int n, std::vector<std::uint8_t> t)
    : n_inputs(n), table(std::move(t)) {
    if (n_inputs < 1 || n_inputs > kMaxQubits)
        throw ValidationError("oracle input count out of range");
    if (table.size() != (1ULL << n_inputs))
        throw ValidationError("oracle table length must be 2^n_inputs");
    for (auto v : table)
        if (v > 1) throw ValidationError("oracle table entries must be 0 or 1");
}

bool BooleanOracle::is_constant() const {
    return std::all_of(table.begin(), table.end(),
                       [&](std::uint8_t v) { return v == table.front(); });
}

bool BooleanOracle::is_balanced() const {
    const std::size_t ones = static_cast<std::size_t>(
        std::count(table.begin(), table.end(), std::uint8_t{1}));
    return ones * 2 == table.size();
}

void NoiseSpec::validate() const {
    if (p < 0.0 || p > 1.0) throw ValidationError("noise strength p must lie in [0, 1]");
}

Statevector apply_gate(const Statevector& state, const Gate& gate) {
    gate.validate(state.n_qubits());
    std::vector<Complex> amps = state.amplitudes();
    apply_gate_in_place(amps, gate);
    return Statevector(state.n_qubits(), std::move(amps));
}

Statevector run_circuit(const Circuit& circuit, const Statevector& initial) {
    if (circuit.n_qubits != initial.n_qubits())
        throw StructuralError("circuit width does not match initial state");
    std::vector<Complex> amps = initial.amplitudes();
    for (const auto& gate : circuit.gates) {
        gate.validate(circuit.n_qubits);
        apply_gate_in_place(amps, gate);
    }
    return Statevector(circuit.n_qubits, std::move(amps));
}

double expectation_z(const Statevector& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits())
        throw StructuralError("expectation_z: qubit index out of range");
    const std::uint64_t bit = 1ULL << qubit;
    double value = 0.0;
    const auto& amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        value += (i & bit) ? -p : p;
    }
    return value;
}

std::vector<double> all_z_expectations(const Statevector& state) {
    std::vector<double> out(state.n_qubits());
    for (int q = 0; q < state.n_qubits(); ++q) out[q] = expectation_z(state, q);
    return out;
}

std::vector<double> apply_noise(const std::vector<double>& expectations, const NoiseSpec& noise) {
    noise.validate();
    std::vector<double> out = expectations;
    if (noise.channel == NoiseChannel::Depolarizing) {
        // rho -> (1-p) rho + p I/2 sends every Pauli expectation to (1-p)<P>.
        for (auto& e : out) e *= (1.0 - noise.p);
    }
    return out;
}

std::map<std::uint64_t, std::size_t> sample_counts(const Statevector& state,
                                                   std::size_t shots,
                                                   std::uint64_t seed) {
    if (shots == 0) throw ValidationError("sample_counts: shots must be >= 1");
    std::vector<double> cdf(state.dim());
    double running = 0.0;
    const auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        running += std::norm(amps[i]);
        cdf[i] = running;
    }
    cdf.back() = 1.0;

    Rng rng(seed);
    std::map<std::uint64_t, std::size_t> counts;
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::uint64_t idx = static_cast<std::uint64_t>(it - cdf.begin());
        ++counts[std::min<std::uint64_t>(idx, cdf.size() - 1)];
    }
    return counts;
}

std::vector<double> z_expectations_from_counts(const std::map<std::uint64_t, std::size_t>& counts,
                                               int n_qubits, std::size_t shots) {
    if (shots == 0) throw ValidationError("z_expectations_from_counts: shots must be >= 1");
    std::vector<double> out(n_qubits, 0.0);
    for (const auto& [index, count] : counts) {
        for (int q = 0; q < n_qubits; ++q) {
            const double sign = (index >> q) & 1ULL ? -1.0 : 1.0;
            out[q] += sign * static_cast<double>(count);
        }
    }
    for (auto& e : out) e /= static_cast<double>(shots);
    return out;
}

std::string format_bitstring(std::uint64_t basis_index, int n_qubits) {
    std::string s(n_qubits, '0');
    for (int q = 0; q < n_qubits; ++q)
        if ((basis_index >> q) & 1ULL) s[q] = '1';
    return s;
}

Statevector apply_phase_oracle(const Statevector& state, const BooleanOracle& oracle) {
    if (oracle.n_inputs != state.n_qubits())
        throw StructuralError("oracle width does not match state");
    std::vector<Complex> amps = state.amplitudes();
    for (std::size_t x = 0; x < amps.size(); ++x)
        if (oracle.table[x]) amps[x] = -amps[x];
    return Statevector(state.n_qubits(), std::move(amps));
}

double deutsch_jozsa_zero_prob(const BooleanOracle& oracle) {
    if (!oracle.is_constant() && !oracle.is_balanced())
        throw ValidationError("Deutsch-Jozsa requires a constant or balanced oracle");
    Circuit hadamards(oracle.n_inputs, {});
    for (int q = 0; q < oracle.n_inputs; ++q) hadamards.append(Gate::h(q));

    Statevector state = run_circuit(hadamards, Statevector::zero(oracle.n_inputs));
    state = apply_phase_oracle(state, oracle);
    state = run_circuit(hadamards, state);
    return std::norm(state.amplitude(0));
}

} // namespace qfl::qsim
