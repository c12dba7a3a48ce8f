#ifndef QFL_QSIM_HPP
#define QFL_QSIM_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfl/errors.hpp"

namespace qfl::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 14;

// Dense statevector over n qubits. Qubit 0 is the least-significant bit of
// the basis-state index throughout the lab. Treat instances as immutable
// values: every operation returns a new state.
class Statevector {
public:
    // |0...0> on n qubits.
    static Statevector zero(int n_qubits);

    // Takes ownership of the amplitude vector; validates length and norm.
    Statevector(int n_qubits, std::vector<Complex> amplitudes);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<Complex>& amplitudes() const { return amps_; }
    Complex amplitude(std::uint64_t basis_index) const { return amps_.at(basis_index); }

    double norm_squared() const;

private:
    int n_qubits_;
    std::vector<Complex> amps_;
};

enum class GateKind { H, X, Z, RX, RY, RZ, Rot, CNOT, CRX };

// One typed gate application. Angles are radians; Rot carries the triple
// (phi, theta, omega) applied to the state as RX(phi), then RY(theta), then
// RZ(omega).
struct Gate {
    GateKind kind = GateKind::H;
    int target = 0;
    std::optional<int> control;
    double angle0 = 0.0;
    double angle1 = 0.0;
    double angle2 = 0.0;

    static Gate h(int target) { return {GateKind::H, target, std::nullopt, 0, 0, 0}; }
    static Gate x(int target) { return {GateKind::X, target, std::nullopt, 0, 0, 0}; }
    static Gate z(int target) { return {GateKind::Z, target, std::nullopt, 0, 0, 0}; }
    static Gate rx(int target, double theta) { return {GateKind::RX, target, std::nullopt, theta, 0, 0}; }
    static Gate ry(int target, double theta) { return {GateKind::RY, target, std::nullopt, theta, 0, 0}; }
    static Gate rz(int target, double theta) { return {GateKind::RZ, target, std::nullopt, theta, 0, 0}; }
    static Gate rot(int target, double phi, double theta, double omega) {
        return {GateKind::Rot, target, std::nullopt, phi, theta, omega};
    }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, 0, 0, 0}; }
    static Gate crx(int control, int target, double theta) {
        return {GateKind::CRX, target, control, theta, 0, 0};
    }

    // Throws StructuralError if indices do not fit a circuit of this width.
    void validate(int n_qubits) const;
};

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    Circuit(int n, std::vector<Gate> g);

    void append(const Gate& gate);
};

// Truth table of a boolean function on n input bits; entry x holds f(x).
struct BooleanOracle {
    int n_inputs = 0;
    std::vector<std::uint8_t> table;

    BooleanOracle(int n, std::vector<std::uint8_t> t);

    bool is_constant() const;
    bool is_balanced() const;
};

enum class NoiseChannel { None, Depolarizing, Dephasing };

struct NoiseSpec {
    NoiseChannel channel = NoiseChannel::None;
    double p = 0.0; // strength in [0, 1], applied end-of-circuit

    void validate() const;
};

// -- operations ------------------------------------------------------------

Statevector apply_gate(const Statevector& state, const Gate& gate);

Statevector run_circuit(const Circuit& circuit, const Statevector& initial);

// Exact <Z_qubit> from amplitude magnitudes.
double expectation_z(const Statevector& state, int qubit);

// All per-qubit Z expectations in one pass.
std::vector<double> all_z_expectations(const Statevector& state);

// End-of-circuit noise on a vector of Z expectations. Depolarizing scales
// every entry by (1 - p); dephasing leaves Z expectations unchanged (it only
// damps X/Y observables, which this lab does not measure).
std::vector<double> apply_noise(const std::vector<double>& expectations, const NoiseSpec& noise);

// Computational-basis sampling from |amplitude|^2, keyed by basis index.
// Deterministic for a given seed.
std::map<std::uint64_t, std::size_t> sample_counts(const Statevector& state,
                                                   std::size_t shots,
                                                   std::uint64_t seed);

// Z expectations estimated from a histogram of basis-state counts.
std::vector<double> z_expectations_from_counts(const std::map<std::uint64_t, std::size_t>& counts,
                                               int n_qubits, std::size_t shots);

// Basis index rendered with qubit 0 as the leftmost character, so
// basis_encode's input bit sequence reads back unchanged.
std::string format_bitstring(std::uint64_t basis_index, int n_qubits);

// Multiplies the amplitude of |x> by (-1)^f(x).
Statevector apply_phase_oracle(const Statevector& state, const BooleanOracle& oracle);

// H^n -> phase oracle -> H^n on |0...0>; returns the probability of the
// all-zeros outcome (1 for constant oracles, 0 for balanced ones).
double deutsch_jozsa_zero_prob(const BooleanOracle& oracle);

} // namespace qfl::qsim

#endif
